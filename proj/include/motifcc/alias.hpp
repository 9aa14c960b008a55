#pragma once

// Walker/Vose alias table over integer weights. Thresholds are kept as exact
// integers, so draws are exactly proportional to the weights.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "count.hpp"
#include "rng.hpp"

namespace motifcc {

class AliasTable {
 public:
  AliasTable() = default;

  template <CountType C>
  explicit AliasTable(std::span<const C> weights) {
    build(weights);
  }
  template <CountType C>
  explicit AliasTable(const std::vector<C>& weights) {
    build(std::span<const C>(weights));
  }

  std::size_t size() const { return alias_.size(); }
  const U256& total() const { return total_; }

  std::size_t operator()(Rng& rng) const {
    const auto slot = static_cast<std::size_t>(rng.below(alias_.size()));
    if (small_) {
      const auto x = rng.below(small_total_);
      return x < small_threshold_[slot] ? slot : alias_[slot];
    }
    const U256 x = rng.below_count<U256>(total_);
    return x < threshold_[slot] ? slot : alias_[slot];
  }

 private:
  template <CountType C>
  void build(std::span<const C> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("alias table needs at least one weight");
    total_ = 0;
    for (const auto& w : weights) total_ = count_traits<U256>::add(total_, count_cast<U256>(w));
    if (total_.is_zero()) throw std::invalid_argument("alias table needs a positive weight");
    // Slot i holds n * w_i units out of a capacity of total_ per slot.
    std::vector<U256> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = count_traits<U256>::mul(count_cast<U256>(weights[i]), U256(n));
      (scaled[i] < total_ ? small : large).push_back(i);
    }
    threshold_.assign(n, total_);
    alias_.resize(n);
    for (std::size_t i = 0; i < n; ++i) alias_[i] = i;
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      small.pop_back();
      const auto l = large.back();
      threshold_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= total_ - scaled[s];
      if (scaled[l] < total_) {
        large.pop_back();
        small.push_back(l);
      }
    }
    small_ = total_ <= U256(UINT64_MAX);
    if (small_) {
      small_total_ = static_cast<std::uint64_t>(total_);
      small_threshold_.resize(n);
      for (std::size_t i = 0; i < n; ++i) small_threshold_[i] = static_cast<std::uint64_t>(threshold_[i]);
      threshold_.clear();
    }
  }

  U256 total_ = 0;
  std::vector<U256> threshold_;
  std::vector<std::size_t> alias_;
  bool small_ = false;
  std::uint64_t small_total_ = 0;
  std::vector<std::uint64_t> small_threshold_;
};

}  // namespace motifcc
