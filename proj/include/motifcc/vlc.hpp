#pragma once

// Variable-length count records: a 16-bit little-endian header holding an
// 11-bit treelet code (low bits) and the count length in bytes minus one
// (high 5 bits), followed by the count in little-endian bytes. The length is
// minimal, so counts up to 2^256 - 1 take 1..32 bytes.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "count.hpp"

namespace motifcc::vlc {

inline constexpr unsigned kKeyBits = 11;
inline constexpr std::uint32_t kMaxKey = (1u << kKeyBits) - 1;
inline constexpr unsigned kMaxBytes = 32;

template <CountType C>
struct Decoded {
  std::uint16_t key = 0;
  C count{};
  std::size_t consumed = 0;
};

/// Appends one record to `out`; returns the number of bytes written.
template <CountType C>
std::size_t encode(std::uint32_t key, const C& count, std::vector<unsigned char>& out) {
  if (key > kMaxKey) throw std::invalid_argument("VLC key must fit in 11 bits");
  if (count_traits<C>::is_zero(count)) throw std::invalid_argument("VLC never stores a zero count");
  const unsigned len = count_traits<C>::byte_length(count);
  if (len > kMaxBytes) throw CapacityError("count exceeds 256 bits");
  const auto header = static_cast<std::uint16_t>(key | ((len - 1u) << kKeyBits));
  out.push_back(static_cast<unsigned char>(header & 0xff));
  out.push_back(static_cast<unsigned char>(header >> 8));
  unsigned char buf[count_traits<C>::bytes];
  count_traits<C>::store_le(count, buf);
  out.insert(out.end(), buf, buf + len);
  return 2 + len;
}

template <CountType C>
Decoded<C> decode(std::span<const unsigned char> in) {
  if (in.size() < 2) throw FormatError("truncated VLC header");
  const auto header = static_cast<std::uint16_t>(in[0] | (in[1] << 8));
  const unsigned len = (header >> kKeyBits) + 1u;
  if (in.size() < 2 + len) throw FormatError("truncated VLC count");
  if (in[1 + len] == 0) throw FormatError("non-minimal VLC length");
  Decoded<C> d;
  d.key = static_cast<std::uint16_t>(header & kMaxKey);
  d.count = count_traits<C>::load_le(in.data() + 2, len);
  d.consumed = 2 + len;
  return d;
}

}  // namespace motifcc::vlc
