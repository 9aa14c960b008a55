#pragma once

// Unsigned treelet counts. Two widths are supported: 128-bit (the default for
// fixed-width tables) and 256-bit (the variable-length table format). All
// arithmetic is checked; overflow raises CapacityError instead of wrapping.

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

namespace motifcc {

using u128 = unsigned __int128;
using U256 = boost::multiprecision::checked_uint256_t;

/// Raised when a count does not fit in the selected count width.
class CapacityError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Raised for malformed binary inputs (tables, caches, records).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
struct count_traits;

template <>
struct count_traits<u128> {
  static constexpr unsigned bytes = 16;

  static u128 add(u128 a, u128 b) {
    u128 r;
    if (__builtin_add_overflow(a, b, &r)) throw CapacityError("128-bit count overflow (add)");
    return r;
  }
  static u128 mul(u128 a, u128 b) {
    u128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw CapacityError("128-bit count overflow (mul)");
    return r;
  }
  static bool is_zero(u128 a) { return a == 0; }
  static long double to_ld(u128 a) { return static_cast<long double>(a); }

  static void store_le(u128 v, unsigned char* out) {
    for (unsigned i = 0; i < bytes; ++i) {
      out[i] = static_cast<unsigned char>(v & 0xff);
      v >>= 8;
    }
  }
  static u128 load_le(const unsigned char* in, unsigned len = bytes) {
    if (len > bytes) {
      for (unsigned i = bytes; i < len; ++i)
        if (in[i] != 0) throw CapacityError("count does not fit in 128 bits");
      len = bytes;
    }
    u128 v = 0;
    for (unsigned i = len; i-- > 0;) v = (v << 8) | in[i];
    return v;
  }
  /// Minimal number of bytes needed to hold v (0 for v == 0).
  static unsigned byte_length(u128 v) {
    unsigned n = 0;
    while (v != 0) {
      v >>= 8;
      ++n;
    }
    return n;
  }
};

template <>
struct count_traits<U256> {
  static constexpr unsigned bytes = 32;

  static U256 add(const U256& a, const U256& b) {
    try {
      return a + b;
    } catch (const std::overflow_error&) {
      throw CapacityError("256-bit count overflow (add)");
    }
  }
  static U256 mul(const U256& a, const U256& b) {
    try {
      return a * b;
    } catch (const std::overflow_error&) {
      throw CapacityError("256-bit count overflow (mul)");
    }
  }
  static bool is_zero(const U256& a) { return a.is_zero(); }
  static long double to_ld(const U256& a) { return a.convert_to<long double>(); }

  static void store_le(U256 v, unsigned char* out) {
    for (unsigned i = 0; i < bytes; ++i) {
      out[i] = static_cast<unsigned char>(static_cast<unsigned>(v & 0xff));
      v >>= 8;
    }
  }
  static U256 load_le(const unsigned char* in, unsigned len = bytes) {
    if (len > bytes) throw CapacityError("count does not fit in 256 bits");
    U256 v = 0;
    for (unsigned i = len; i-- > 0;) {
      v <<= 8;
      v |= in[i];
    }
    return v;
  }
  static unsigned byte_length(U256 v) {
    unsigned n = 0;
    while (!v.is_zero()) {
      v >>= 8;
      ++n;
    }
    return n;
  }
};

template <typename T>
concept CountType = requires { count_traits<T>::bytes; };

/// Exact conversion between count widths; throws if the value does not fit.
template <CountType To, CountType From>
To count_cast(const From& v) {
  if constexpr (std::is_same_v<To, From>) {
    return v;
  } else {
    std::array<unsigned char, 32> buf{};
    count_traits<From>::store_le(v, buf.data());
    return count_traits<To>::load_le(buf.data(), count_traits<From>::bytes);
  }
}

inline std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return {s.rbegin(), s.rend()};
}

inline std::string to_string(const U256& v) { return v.str(); }

/// Binomial coefficient C(n, r) in 256-bit arithmetic.
inline U256 binomial(std::uint64_t n, unsigned r) {
  if (r > n) return 0;
  U256 acc = 1;
  for (unsigned i = 1; i <= r; ++i) {
    acc = count_traits<U256>::mul(acc, U256(n - r + i));
    acc /= i;
  }
  return acc;
}

}  // namespace motifcc
