#pragma once

// Treelet algebras: the key space used by count tables plus the merge and
// decomposition operations the dynamic program and the sampler need.
//
//   StructuralAlgebra  keys are 46-bit bitstring encodings; any k <= 16.
//   IndexedAlgebra     keys are 11-bit ITE indices with precomputed
//                      merge/decompose tables; k <= 8.
//
// Both order keys within one treelet size by the total order on colored
// treelets, so sorted records look the same under either algebra.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "treelet.hpp"

namespace motifcc {

using TreeletKey = std::uint64_t;

/// Rooted k-node representative counted for one unrooted class, with the
/// root-level split used to count it.
struct CountedRepresentative {
  TreeletShape rooted;
  TreeletShape rest;
  TreeletShape child;
  unsigned beta = 1;
};

class StructuralAlgebra {
 public:
  explicit StructuralAlgebra(unsigned k) : universe_(std::make_shared<TreeletUniverse>(k)) {
    if (k < 2 || k > kMaxK) throw TreeletError("k must be in [2, 16]");
    for (std::uint32_t j = 0; j < universe_->unrooted().size(); ++j) {
      const auto& u = universe_->unrooted()[j];
      if (!u.balanced) continue;
      const auto& b = *u.balanced;
      balanced_.emplace(pair_key(b.rest, b.child), Balanced{b.rooted, b.beta});
      rep_by_rooted_.emplace(b.rooted.bits, j);
    }
  }

  unsigned k() const { return universe_->k(); }
  static constexpr bool indexed() { return false; }
  const TreeletUniverse& universe() const { return *universe_; }

  TreeletKey key(const ColoredTreelet& t) const { return t.key(); }
  ColoredTreelet treelet(TreeletKey key) const { return ColoredTreelet::from_key(key); }
  std::optional<TreeletKey> find(TreeletShape s, ColorSet c) const { return ColoredTreelet{s, c}.key(); }

  TreeletKey singleton(Color c) const { return motifcc::singleton(c).key(); }
  unsigned size(TreeletKey key) const { return static_cast<unsigned>(std::popcount(static_cast<ColorSet>(key & 0xffffu))); }
  ColorSet colors(TreeletKey key) const { return static_cast<ColorSet>(key & 0xffffu); }
  TreeletShape shape(TreeletKey key) const { return treelet(key).shape; }

  std::optional<TreeletKey> merge(TreeletKey base, TreeletKey child) const {
    auto m = motifcc::merge(treelet(base), treelet(child), k());
    if (!m) return std::nullopt;
    return m->key();
  }
  unsigned beta(TreeletKey key) const { return motifcc::beta(shape(key)); }
  std::pair<TreeletShape, TreeletShape> canonical_parts(TreeletKey key) const { return canonical_decompose(shape(key)); }

  /// Merge along the balanced split of a non-star k-treelet; FAIL unless
  /// (base, child) is exactly the chosen split of some class.
  std::optional<TreeletKey> balanced_merge(TreeletKey base, TreeletKey child) const {
    const ColorSet cb = colors(base), cc = colors(child);
    if (cb & cc) return std::nullopt;
    auto it = balanced_.find(pair_key(shape(base), shape(child)));
    if (it == balanced_.end()) return std::nullopt;
    return ColoredTreelet{it->second.rooted, static_cast<ColorSet>(cb | cc)}.key();
  }
  unsigned balanced_beta(TreeletKey rep) const { return representative(rep).beta; }
  CountedRepresentative representative(TreeletKey rep) const {
    const auto& b = *universe_->unrooted()[rep_by_rooted_.at(shape(rep).bits)].balanced;
    return {b.rooted, b.rest, b.child, b.beta};
  }

  std::uint32_t unrooted_of(TreeletKey key) const { return universe_->unrooted_id(shape(key)); }

 private:
  struct Balanced {
    TreeletShape rooted;
    unsigned beta;
  };
  static std::uint64_t pair_key(TreeletShape a, TreeletShape b) {
    return (static_cast<std::uint64_t>(a.size) << 59) | (static_cast<std::uint64_t>(a.bits) << 30) | b.bits;
  }

  std::shared_ptr<TreeletUniverse> universe_;
  std::unordered_map<std::uint64_t, Balanced> balanced_;
  std::unordered_map<std::uint32_t, std::uint32_t> rep_by_rooted_;
};

/// Integer treelet encoding (ITE): the colored rooted treelets on at most
/// k <= 8 nodes numbered 0..count-1 in the total order, plus lookup tables
/// for every treelet operation.
class TreeletIndexTables {
 public:
  static constexpr std::uint16_t kFail = 0xffff;
  static constexpr unsigned kMaxIndexedK = 8;

  explicit TreeletIndexTables(unsigned k) : universe_(std::make_shared<TreeletUniverse>(k)) {
    if (k < 2 || k > kMaxIndexedK) throw TreeletError("ITE tables support 2 <= k <= 8");
    build();
  }

  unsigned k() const { return universe_->k(); }
  std::size_t count() const { return treelets_.size(); }
  const TreeletUniverse& universe() const { return *universe_; }

  std::uint16_t to_code(const ColoredTreelet& t) const {
    const auto sid = universe_->shape_id(t.shape);
    const auto code = by_shape_colors_[sid * ncolorsets() + t.colors];
    if (code == kFail) throw TreeletError("treelet not representable under this k");
    return code;
  }
  const ColoredTreelet& from_code(std::uint16_t code) const { return treelets_.at(code); }

  /// Code for (shape id, colorset) or kFail.
  std::uint16_t lookup(std::uint32_t shape_id, ColorSet colors) const {
    return by_shape_colors_[shape_id * ncolorsets() + colors];
  }

  /// merge(i, j) or kFail. Pairs whose sizes exceed k are also kFail.
  std::uint16_t merge(std::uint16_t i, std::uint16_t j) const {
    if (j >= merge_limit_[i]) return kFail;
    return merge_table_[merge_offset_[i] + j];
  }
  std::uint16_t balanced_merge(std::uint16_t i, std::uint16_t j) const {
    const auto& row = balanced_rows_[i];
    if (j < row.first || j >= row.first + row.length) return kFail;
    return balanced_table_[row.offset + (j - row.first)];
  }

  struct Decomposition {
    std::uint32_t rest_shape = 0;
    std::uint32_t child_shape = 0;
  };
  const Decomposition& decomposition(std::uint16_t code) const { return decomp_table_[code]; }
  std::uint8_t beta(std::uint16_t code) const { return beta_table_[code]; }
  std::uint32_t shape_id(std::uint16_t code) const { return skeleton_shape_[code]; }
  ColorSet colors(std::uint16_t code) const { return treelets_[code].colors; }
  unsigned size(std::uint16_t code) const { return treelets_[code].shape.size; }
  /// Unrooted class for size-k codes, UINT32_MAX otherwise.
  std::uint32_t unrooted(std::uint16_t code) const { return unrooted_table_[code]; }

  /// Total bytes held by the lookup tables.
  std::size_t footprint_bytes() const {
    return merge_table_.size() * 2 + balanced_table_.size() * 2 + merge_offset_.size() * 4 + merge_limit_.size() * 2 +
           balanced_rows_.size() * sizeof(Row) + decomp_table_.size() * sizeof(Decomposition) + beta_table_.size() +
           skeleton_shape_.size() * 4 + by_shape_colors_.size() * 2 + unrooted_table_.size() * 4 +
           treelets_.size() * sizeof(ColoredTreelet);
  }

  /// Binary cache: "ITE1", k, count, then the merge and balanced tables.
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write("ITE1", 4);
    detail::write_le<std::uint32_t>(out, k());
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(count()));
    detail::write_le<std::uint64_t>(out, merge_table_.size());
    for (auto v : merge_table_) detail::write_le<std::uint16_t>(out, v);
    detail::write_le<std::uint64_t>(out, balanced_table_.size());
    for (auto v : balanced_table_) detail::write_le<std::uint16_t>(out, v);
    for (const auto& d : decomp_table_) {
      detail::write_le<std::uint32_t>(out, d.rest_shape);
      detail::write_le<std::uint32_t>(out, d.child_shape);
    }
    for (auto b : beta_table_) detail::write_le<std::uint8_t>(out, b);
    if (!out) throw IoError("ITE cache write failed");
  }

  /// Loads a cache written by save(), regenerating (and rewriting) it when
  /// it is absent or does not match a fresh build for k.
  static TreeletIndexTables load_or_build(const std::string& path, unsigned k) {
    TreeletIndexTables fresh(k);
    std::ifstream in(path, std::ios::binary);
    bool ok = false;
    if (in) {
      try {
        char magic[4];
        in.read(magic, 4);
        ok = in && std::memcmp(magic, "ITE1", 4) == 0 && detail::read_le<std::uint32_t>(in) == k &&
             detail::read_le<std::uint32_t>(in) == fresh.count();
        if (ok) ok = read_array(in, fresh.merge_table_) && read_array(in, fresh.balanced_table_);
        for (std::size_t i = 0; ok && i < fresh.decomp_table_.size(); ++i)
          ok = detail::read_le<std::uint32_t>(in) == fresh.decomp_table_[i].rest_shape &&
               detail::read_le<std::uint32_t>(in) == fresh.decomp_table_[i].child_shape;
        for (std::size_t i = 0; ok && i < fresh.beta_table_.size(); ++i)
          ok = detail::read_le<std::uint8_t>(in) == fresh.beta_table_[i];
      } catch (const IoError&) {
        ok = false;
      }
    }
    if (!ok) fresh.save(path);
    return fresh;
  }

 private:
  struct Row {
    std::uint32_t offset = 0;
    std::uint16_t first = 0;
    std::uint16_t length = 0;
  };

  std::size_t ncolorsets() const { return std::size_t{1} << k(); }

  template <typename T>
  static bool read_array(std::istream& in, const std::vector<T>& expected) {
    if (detail::read_le<std::uint64_t>(in) != expected.size()) return false;
    for (auto v : expected)
      if (detail::read_le<T>(in) != v) return false;
    return true;
  }

  void build() {
    const unsigned kk = k();
    treelets_ = enumerate_colored(kk);
    if (treelets_.size() >= kFail) throw TreeletError("too many treelets for 16-bit codes");
    const auto nshapes = universe_->shapes().size();
    by_shape_colors_.assign(nshapes * ncolorsets(), kFail);
    skeleton_shape_.resize(count());
    for (std::size_t i = 0; i < count(); ++i) {
      const auto sid = universe_->shape_id(treelets_[i].shape);
      skeleton_shape_[i] = sid;
      by_shape_colors_[sid * ncolorsets() + treelets_[i].colors] = static_cast<std::uint16_t>(i);
    }
    // Codes are sorted by size first: codes of size <= s form a prefix.
    std::vector<std::uint16_t> size_end(kk + 2, 0), size_begin(kk + 2, 0);
    for (std::size_t i = 0; i < count(); ++i) size_end[treelets_[i].shape.size] = static_cast<std::uint16_t>(i + 1);
    for (unsigned s = 1; s <= kk; ++s) size_begin[s] = s == 1 ? 0 : size_end[s - 1];

    merge_offset_.resize(count());
    merge_limit_.resize(count());
    for (std::size_t i = 0; i < count(); ++i) {
      const unsigned s = treelets_[i].shape.size;
      merge_offset_[i] = static_cast<std::uint32_t>(merge_table_.size());
      merge_limit_[i] = s < kk ? size_end[kk - s] : 0;
      for (std::uint16_t j = 0; j < merge_limit_[i]; ++j) {
        auto m = motifcc::merge(treelets_[i], treelets_[j], kk);
        merge_table_.push_back(m ? to_code(*m) : kFail);
      }
    }

    StructuralAlgebra structural(kk);
    balanced_rows_.resize(count());
    for (std::size_t i = 0; i < count(); ++i) {
      const unsigned s = treelets_[i].shape.size;
      Row& row = balanced_rows_[i];
      row.offset = static_cast<std::uint32_t>(balanced_table_.size());
      if (s < 2 || s + 2 > kk) continue;
      row.first = size_begin[kk - s];
      row.length = static_cast<std::uint16_t>(size_end[kk - s] - size_begin[kk - s]);
      for (std::uint16_t j = row.first; j < row.first + row.length; ++j) {
        auto m = structural.balanced_merge(treelets_[i].key(), treelets_[j].key());
        balanced_table_.push_back(m ? to_code(ColoredTreelet::from_key(*m)) : kFail);
      }
    }

    decomp_table_.resize(count());
    beta_table_.assign(count(), 0);
    unrooted_table_.assign(count(), UINT32_MAX);
    for (std::size_t i = 0; i < count(); ++i) {
      const auto& t = treelets_[i];
      if (t.shape.size >= 2) {
        auto [rest, child] = canonical_decompose(t.shape);
        decomp_table_[i] = {universe_->shape_id(rest), universe_->shape_id(child)};
        beta_table_[i] = static_cast<std::uint8_t>(motifcc::beta(t.shape));
      }
      if (t.shape.size == kk) unrooted_table_[i] = universe_->unrooted_id(t.shape);
    }
  }

  std::shared_ptr<TreeletUniverse> universe_;
  std::vector<ColoredTreelet> treelets_;
  std::vector<std::uint16_t> by_shape_colors_;
  std::vector<std::uint32_t> skeleton_shape_;
  std::vector<std::uint32_t> merge_offset_;
  std::vector<std::uint16_t> merge_limit_;
  std::vector<std::uint16_t> merge_table_;
  std::vector<Row> balanced_rows_;
  std::vector<std::uint16_t> balanced_table_;
  std::vector<Decomposition> decomp_table_;
  std::vector<std::uint8_t> beta_table_;
  std::vector<std::uint32_t> unrooted_table_;
};

class IndexedAlgebra {
 public:
  explicit IndexedAlgebra(unsigned k) : tables_(std::make_shared<TreeletIndexTables>(k)) { init(); }
  explicit IndexedAlgebra(std::shared_ptr<const TreeletIndexTables> tables) : tables_(std::move(tables)) { init(); }

  unsigned k() const { return tables_->k(); }
  static constexpr bool indexed() { return true; }
  const TreeletUniverse& universe() const { return tables_->universe(); }
  const TreeletIndexTables& tables() const { return *tables_; }

  TreeletKey key(const ColoredTreelet& t) const { return tables_->to_code(t); }
  ColoredTreelet treelet(TreeletKey key) const { return tables_->from_code(code(key)); }
  std::optional<TreeletKey> find(TreeletShape s, ColorSet c) const {
    const auto v = tables_->lookup(universe().shape_id(s), c);
    if (v == TreeletIndexTables::kFail) return std::nullopt;
    return v;
  }

  TreeletKey singleton(Color c) const { return singletons_[c]; }
  unsigned size(TreeletKey key) const { return tables_->size(code(key)); }
  ColorSet colors(TreeletKey key) const { return tables_->colors(code(key)); }
  TreeletShape shape(TreeletKey key) const { return treelet(key).shape; }

  std::optional<TreeletKey> merge(TreeletKey base, TreeletKey child) const {
    const auto m = tables_->merge(code(base), code(child));
    if (m == TreeletIndexTables::kFail) return std::nullopt;
    return m;
  }
  unsigned beta(TreeletKey key) const { return tables_->beta(code(key)); }
  std::pair<TreeletShape, TreeletShape> canonical_parts(TreeletKey key) const {
    const auto& d = tables_->decomposition(code(key));
    return {universe().shapes()[d.rest_shape], universe().shapes()[d.child_shape]};
  }

  std::optional<TreeletKey> balanced_merge(TreeletKey base, TreeletKey child) const {
    const auto m = tables_->balanced_merge(code(base), code(child));
    if (m == TreeletIndexTables::kFail) return std::nullopt;
    return m;
  }
  unsigned balanced_beta(TreeletKey rep) const { return representative(rep).beta; }
  CountedRepresentative representative(TreeletKey rep) const {
    const auto& b = *universe().unrooted()[tables_->unrooted(code(rep))].balanced;
    return {b.rooted, b.rest, b.child, b.beta};
  }

  std::uint32_t unrooted_of(TreeletKey key) const { return tables_->unrooted(code(key)); }

 private:
  static std::uint16_t code(TreeletKey key) { return static_cast<std::uint16_t>(key); }
  void init() {
    for (unsigned c = 0; c < k(); ++c) singletons_[c] = tables_->to_code(motifcc::singleton(static_cast<Color>(c)));
  }

  std::shared_ptr<const TreeletIndexTables> tables_;
  std::array<TreeletKey, TreeletIndexTables::kMaxIndexedK> singletons_{};
};

}  // namespace motifcc
