#pragma once

// Count tables: one per DP round h, holding for every node v the sorted
// record of (treelet key, count) pairs with non-zero count.
//
// File layout (all integers little-endian):
//   "MCT1"
//   u32 k, u32 h, u64 n, u32 flags, u32 shape_count, f64 lambda
//   u256 t (colorful k-treelet copies), u256 S (k-stars over raw degrees)
//   shape_count x { u32 size, u32 bits, u32 multiplicity, u32 is_star, u256 copies }
//   u64 checksum (FNV-1a over offsets and payload), u64 payload bytes
//   (n+1) x u64 record offsets, relative to the payload start
//   payload
// A fixed-width record is a run of 22-byte entries: 48-bit key and 128-bit
// cumulative count. A VLC record is a run of vlc:: records holding raw counts.

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "algebra.hpp"
#include "count.hpp"
#include "vlc.hpp"

namespace motifcc {

enum TableFlag : std::uint32_t {
  kFlagVlc = 1u << 0,
  kFlagZeroRooted = 1u << 1,
  kFlagRoundSkipped = 1u << 2,
  kFlagBiased = 1u << 3,
  kFlagIndexedKeys = 1u << 4,
};

template <CountType C>
struct Entry {
  TreeletKey key = 0;
  C count{};
  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Per-copy colorful total for one unrooted k-treelet class. The table stores
/// `multiplicity` rooted counts per copy (1 with zero-rooting, k without, the
/// root orbit size at a balanced representative).
struct ShapeTotal {
  TreeletShape canonical;
  std::uint32_t multiplicity = 1;
  bool star = false;
  U256 copies = 0;
  friend bool operator==(const ShapeTotal&, const ShapeTotal&) = default;
};

struct TableHeader {
  std::uint32_t k = 0;
  std::uint32_t h = 0;
  std::uint64_t n = 0;
  std::uint32_t flags = 0;
  double lambda = 0.0;
  U256 total = 0;
  U256 star_total = 0;
  std::vector<ShapeTotal> shapes;

  bool has(TableFlag f) const { return (flags & f) != 0; }
  friend bool operator==(const TableHeader&, const TableHeader&) = default;
};

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put_u256(std::vector<unsigned char>& out, const U256& v) {
  unsigned char buf[32];
  count_traits<U256>::store_le(v, buf);
  out.insert(out.end(), buf, buf + 32);
}
inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct Fnv64 {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void feed(const unsigned char* p, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  }
};

inline std::vector<unsigned char> encode_header(const TableHeader& hd) {
  std::vector<unsigned char> out{'M', 'C', 'T', '1'};
  put_u32(out, hd.k);
  put_u32(out, hd.h);
  put_u64(out, hd.n);
  put_u32(out, hd.flags);
  put_u32(out, static_cast<std::uint32_t>(hd.shapes.size()));
  std::uint64_t lambda_bits;
  std::memcpy(&lambda_bits, &hd.lambda, 8);
  put_u64(out, lambda_bits);
  put_u256(out, hd.total);
  put_u256(out, hd.star_total);
  for (const auto& s : hd.shapes) {
    put_u32(out, s.canonical.size);
    put_u32(out, s.canonical.bits);
    put_u32(out, s.multiplicity);
    put_u32(out, s.star ? 1 : 0);
    put_u256(out, s.copies);
  }
  return out;
}

/// Parses a header; returns the number of bytes it occupies.
inline std::size_t decode_header(std::span<const unsigned char> in, TableHeader& hd) {
  constexpr std::size_t fixed = 4 + 4 + 4 + 8 + 4 + 4 + 8 + 32 + 32;
  if (in.size() < fixed || std::memcmp(in.data(), "MCT1", 4) != 0) throw FormatError("not an MCT1 count table");
  const unsigned char* p = in.data() + 4;
  hd.k = get_u32(p);
  hd.h = get_u32(p + 4);
  hd.n = get_u64(p + 8);
  hd.flags = get_u32(p + 16);
  const std::uint32_t nshapes = get_u32(p + 20);
  const std::uint64_t lambda_bits = get_u64(p + 24);
  std::memcpy(&hd.lambda, &lambda_bits, 8);
  hd.total = count_traits<U256>::load_le(p + 32);
  hd.star_total = count_traits<U256>::load_le(p + 64);
  std::size_t pos = fixed;
  if (in.size() < pos + nshapes * 48ull) throw FormatError("truncated table header");
  hd.shapes.resize(nshapes);
  for (auto& s : hd.shapes) {
    const unsigned char* q = in.data() + pos;
    s.canonical.size = static_cast<std::uint8_t>(get_u32(q));
    s.canonical.bits = get_u32(q + 4);
    s.multiplicity = get_u32(q + 8);
    s.star = get_u32(q + 12) != 0;
    s.copies = count_traits<U256>::load_le(q + 16);
    pos += 48;
  }
  return pos;
}

inline constexpr std::size_t kFixedEntryBytes = 6 + 16;

/// Serializes one node's sorted entries.
template <CountType C>
void encode_record(std::span<const Entry<C>> entries, bool vlc_format, std::vector<unsigned char>& out) {
  if (vlc_format) {
    for (const auto& e : entries) vlc::encode<C>(static_cast<std::uint32_t>(e.key), e.count, out);
    return;
  }
  u128 cumulative = 0;
  for (const auto& e : entries) {
    cumulative = count_traits<u128>::add(cumulative, count_cast<u128>(e.count));
    for (int i = 0; i < 6; ++i) out.push_back(static_cast<unsigned char>(e.key >> (8 * i)));
    unsigned char buf[16];
    count_traits<u128>::store_le(cumulative, buf);
    out.insert(out.end(), buf, buf + 16);
  }
}

/// Calls f(key, raw count) for every entry of a serialized record.
template <CountType C, typename F>
void decode_record(std::span<const unsigned char> bytes, bool vlc_format, F&& f) {
  if (vlc_format) {
    while (!bytes.empty()) {
      auto d = vlc::decode<C>(bytes);
      f(static_cast<TreeletKey>(d.key), d.count);
      bytes = bytes.subspan(d.consumed);
    }
    return;
  }
  if (bytes.size() % kFixedEntryBytes != 0) throw FormatError("corrupt fixed-width record");
  u128 prev = 0;
  for (std::size_t pos = 0; pos < bytes.size(); pos += kFixedEntryBytes) {
    TreeletKey key = 0;
    for (int i = 5; i >= 0; --i) key = (key << 8) | bytes[pos + i];
    const u128 cum = count_traits<u128>::load_le(bytes.data() + pos + 6);
    if (cum <= prev) throw FormatError("cumulative counts must be strictly increasing");
    f(key, count_cast<C>(cum - prev));
    prev = cum;
  }
}

}  // namespace detail

/// Read-only memory mapping of a whole file.
class MappedFile {
 public:
  MappedFile() = default;
  explicit MappedFile(const std::string& path) {
    fd_ = ::open(path.c_str(), O_RDONLY);
    if (fd_ < 0) throw IoError("cannot open " + path);
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
      ::close(fd_);
      throw IoError("cannot stat " + path);
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0) {
      void* p = ::mmap(nullptr, size_, PROT_READ, MAP_SHARED, fd_, 0);
      if (p == MAP_FAILED) {
        ::close(fd_);
        throw IoError("cannot map " + path);
      }
      data_ = static_cast<const unsigned char*>(p);
    }
  }
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;
  MappedFile(MappedFile&& o) noexcept { swap(o); }
  MappedFile& operator=(MappedFile&& o) noexcept {
    MappedFile tmp(std::move(o));
    swap(tmp);
    return *this;
  }
  ~MappedFile() {
    if (data_) ::munmap(const_cast<unsigned char*>(data_), size_);
    if (fd_ >= 0) ::close(fd_);
  }

  std::span<const unsigned char> bytes() const { return {data_, size_}; }

 private:
  void swap(MappedFile& o) noexcept {
    std::swap(fd_, o.fd_);
    std::swap(data_, o.data_);
    std::swap(size_, o.size_);
  }
  int fd_ = -1;
  const unsigned char* data_ = nullptr;
  std::size_t size_ = 0;
};

/// A finished round held in memory.
template <CountType C>
class MemoryRound {
 public:
  MemoryRound() = default;
  MemoryRound(TableHeader header) : header_(std::move(header)), records_(header_.n) {}

  const TableHeader& header() const { return header_; }
  TableHeader& header() { return header_; }
  std::size_t num_nodes() const { return records_.size(); }

  void put(NodeId v, std::vector<Entry<C>> entries) { records_[v] = std::move(entries); }
  std::span<const Entry<C>> record(NodeId v) const { return records_[v]; }

  template <typename F>
  void for_each_entry(NodeId v, F&& f) const {
    for (const auto& e : records_[v]) f(e.key, e.count);
  }

 private:
  TableHeader header_;
  std::vector<std::vector<Entry<C>>> records_;
};

/// A finished round read through a file mapping.
template <CountType C>
class MappedRound {
 public:
  explicit MappedRound(const std::string& path, bool verify_checksum = true) : file_(path) {
    auto bytes = file_.bytes();
    std::size_t pos = detail::decode_header(bytes, header_);
    if (bytes.size() < pos + 16) throw FormatError("truncated table");
    const std::uint64_t checksum = detail::get_u64(bytes.data() + pos);
    const std::uint64_t payload_bytes = detail::get_u64(bytes.data() + pos + 8);
    pos += 16;
    const std::size_t index_bytes = (header_.n + 1) * 8;
    if (bytes.size() != pos + index_bytes + payload_bytes) throw FormatError("table size mismatch");
    index_ = bytes.data() + pos;
    payload_ = bytes.data() + pos + index_bytes;
    payload_bytes_ = payload_bytes;
    if (verify_checksum) {
      detail::Fnv64 fnv;
      fnv.feed(index_, index_bytes);
      fnv.feed(payload_, payload_bytes);
      if (fnv.h != checksum) throw FormatError("checksum mismatch in " + path);
    }
    if (offset(0) != 0 || offset(header_.n) != payload_bytes) throw FormatError("corrupt record index");
  }

  const TableHeader& header() const { return header_; }
  std::size_t num_nodes() const { return header_.n; }

  std::span<const unsigned char> record_bytes(NodeId v) const {
    const auto a = offset(v), b = offset(v + 1);
    if (a > b || b > payload_bytes_) throw FormatError("corrupt record index");
    return {payload_ + a, payload_ + b};
  }

  template <typename F>
  void for_each_entry(NodeId v, F&& f) const {
    detail::decode_record<C>(record_bytes(v), header_.has(kFlagVlc), std::forward<F>(f));
  }

 private:
  std::uint64_t offset(std::size_t v) const { return detail::get_u64(index_ + 8 * v); }

  MappedFile file_;
  TableHeader header_;
  const unsigned char* index_ = nullptr;
  const unsigned char* payload_ = nullptr;
  std::uint64_t payload_bytes_ = 0;
};

/// Two-pass writer. Records are appended to a spool file in completion order
/// (any thread), then finish() rewrites them ordered by node id with an
/// offset index. The final file does not depend on completion order.
template <CountType C>
class TableWriter {
 public:
  TableWriter(std::string path, TableHeader header)
      : path_(std::move(path)), spool_path_(path_ + ".spool"), header_(std::move(header)),
        spool_(spool_path_, std::ios::binary | std::ios::trunc), where_(header_.n, {0, 0}) {
    if (!spool_) throw IoError("cannot create " + spool_path_);
  }

  TableHeader& header() { return header_; }

  void put(NodeId v, std::span<const Entry<C>> entries) {
    std::vector<unsigned char> bytes;
    detail::encode_record<C>(entries, header_.has(kFlagVlc), bytes);
    std::lock_guard lock(mu_);
    where_[v] = {spool_pos_, bytes.size()};
    spool_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!spool_) throw IoError("spool write failed: " + spool_path_);
    spool_pos_ += bytes.size();
  }

  /// Second pass: sort by node id, write the final table, drop the spool.
  void finish() {
    spool_.close();
    if (!spool_) throw IoError("spool write failed: " + spool_path_);
    std::vector<unsigned char> index;
    index.reserve((header_.n + 1) * 8);
    std::uint64_t off = 0;
    for (const auto& [pos, len] : where_) {
      detail::put_u64(index, off);
      off += len;
    }
    detail::put_u64(index, off);

    std::ifstream spool(spool_path_, std::ios::binary);
    detail::Fnv64 fnv;
    fnv.feed(index.data(), index.size());
    std::vector<unsigned char> payload;
    payload.reserve(std::min<std::uint64_t>(off, 1ull << 26));
    const std::string tmp = path_ + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot create " + tmp);
      auto hdr = detail::encode_header(header_);
      // Checksum needs the payload first: stream it twice through the spool.
      std::vector<unsigned char> buf;
      for (const auto& [pos, len] : where_) {
        buf.resize(len);
        spool.seekg(static_cast<std::streamoff>(pos));
        if (len && !spool.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len)))
          throw IoError("spool read failed");
        fnv.feed(buf.data(), len);
      }
      detail::put_u64(hdr, fnv.h);
      detail::put_u64(hdr, off);
      out.write(reinterpret_cast<const char*>(hdr.data()), static_cast<std::streamsize>(hdr.size()));
      out.write(reinterpret_cast<const char*>(index.data()), static_cast<std::streamsize>(index.size()));
      for (const auto& [pos, len] : where_) {
        buf.resize(len);
        spool.clear();
        spool.seekg(static_cast<std::streamoff>(pos));
        if (len && !spool.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len)))
          throw IoError("spool read failed");
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(len));
      }
      out.flush();
      if (!out) throw IoError("table write failed: " + tmp);
    }
    spool.close();
    std::filesystem::remove(spool_path_);
    std::filesystem::rename(tmp, path_);
  }

 private:
  std::string path_;
  std::string spool_path_;
  TableHeader header_;
  std::ofstream spool_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> where_;
  std::uint64_t spool_pos_ = 0;
  std::mutex mu_;
};

/// Writes a finished in-memory round to disk (single pass, already ordered).
template <CountType C>
void write_table(const std::string& path, const MemoryRound<C>& round) {
  TableWriter<C> w(path, round.header());
  for (NodeId v = 0; v < round.num_nodes(); ++v) w.put(v, round.record(v));
  w.finish();
}

/// A round loaded for sampling: per node, keys with cumulative counts so that
/// occ() and draw-by-rank are binary searches. VLC records are prefix-summed
/// at load time.
template <CountType C>
class CountTable {
 public:
  CountTable() = default;

  template <typename Source>
  static CountTable load(const Source& src) {
    CountTable t;
    t.header_ = src.header();
    const std::size_t n = src.num_nodes();
    t.offsets_.assign(n + 1, 0);
    for (NodeId v = 0; v < n; ++v) {
      C cum{};
      src.for_each_entry(v, [&](TreeletKey key, const C& c) {
        if (!t.keys_.empty() && t.offsets_[v] < t.keys_.size() && t.keys_.back() >= key)
          throw FormatError("record keys must be strictly increasing");
        cum = count_traits<C>::add(cum, c);
        t.keys_.push_back(key);
        t.cumulative_.push_back(cum);
      });
      t.offsets_[v + 1] = t.keys_.size();
    }
    return t;
  }

  const TableHeader& header() const { return header_; }
  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  std::span<const TreeletKey> keys(NodeId v) const { return {keys_.data() + offsets_[v], keys_.data() + offsets_[v + 1]}; }
  std::span<const C> cumulative(NodeId v) const {
    return {cumulative_.data() + offsets_[v], cumulative_.data() + offsets_[v + 1]};
  }

  /// Total rooted count at v.
  C occ(NodeId v) const {
    check(v);
    if (offsets_[v] == offsets_[v + 1]) return C{};
    return cumulative_[offsets_[v + 1] - 1];
  }
  /// Count of one treelet rooted at v; zero when absent.
  C occ(TreeletKey key, NodeId v) const {
    check(v);
    auto ks = keys(v);
    auto it = std::lower_bound(ks.begin(), ks.end(), key);
    if (it == ks.end() || *it != key) return C{};
    const auto i = static_cast<std::size_t>(it - ks.begin());
    auto cs = cumulative(v);
    return i == 0 ? cs[0] : C(cs[i] - cs[i - 1]);
  }
  /// Index within v's record of the entry covering rank x in [1, occ(v)].
  std::size_t entry_at_rank(NodeId v, const C& x) const {
    auto cs = cumulative(v);
    return static_cast<std::size_t>(std::lower_bound(cs.begin(), cs.end(), x) - cs.begin());
  }
  C count_at(NodeId v, std::size_t i) const {
    auto cs = cumulative(v);
    return i == 0 ? cs[0] : C(cs[i] - cs[i - 1]);
  }

 private:
  void check(NodeId v) const {
    if (v >= num_nodes()) throw std::out_of_range("node id out of range");
  }

  TableHeader header_;
  std::vector<std::uint64_t> offsets_;
  std::vector<TreeletKey> keys_;
  std::vector<C> cumulative_;
};

inline std::string round_path(const std::string& dir, unsigned h) {
  return (std::filesystem::path(dir) / ("round_" + std::to_string(h) + ".mct")).string();
}

}  // namespace motifcc
