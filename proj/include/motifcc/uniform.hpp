#pragma once

// Uniform graphlet sampling runs: draw from the star/table mixture, tally
// spanned classes, turn tallies into estimates.

#include <atomic>
#include <chrono>
#include <map>
#include <thread>
#include <vector>

#include "estimate.hpp"
#include "graphlet.hpp"
#include "sampler.hpp"

namespace motifcc {

struct UniformOptions {
  std::uint64_t samples = 0;  ///< 0: run until max_seconds
  double max_seconds = 0;     ///< 0: no time cap
  unsigned threads = 1;
  std::uint64_t seed = 0;
  /// Draws per chunk. Chunk c always uses stream c, so results do not
  /// depend on the thread count.
  std::uint64_t chunk = 4096;
};

struct UniformTallies {
  std::map<GraphletSignature, std::uint64_t> hits;
  std::uint64_t samples = 0;
};

template <CountType C, typename Algebra>
UniformTallies uniform_tallies(const TreeletSampler<C, Algebra>& treelets, const StarSampler& stars,
                               long double colorful_probability, const UniformOptions& opt) {
  if (opt.samples == 0 && !(opt.max_seconds > 0)) throw std::invalid_argument("need a sample count or a time budget");
  const std::uint64_t chunk = std::max<std::uint64_t>(1, opt.chunk);
  const std::uint64_t nchunks = opt.samples ? (opt.samples + chunk - 1) / chunk : UINT64_MAX;
  const auto t0 = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    return opt.max_seconds > 0 &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= opt.max_seconds;
  };

  // Chunks are claimed in order and merged in order of index.
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::exception_ptr error;
  std::map<std::uint64_t, std::map<GraphletSignature, std::uint64_t>> done;
  SignatureCache signatures;

  auto worker = [&] {
    try {
      GraphletMixture<C, Algebra> mixture(treelets, stars, colorful_probability);
      for (;;) {
        if (stop.load(std::memory_order_relaxed)) break;
        const std::uint64_t c = next.fetch_add(1);
        if (c >= nchunks) break;
        if (out_of_time()) {
          stop = true;
          break;
        }
        const std::uint64_t n = opt.samples ? std::min(chunk, opt.samples - c * chunk) : chunk;
        Rng rng(opt.seed, c);
        std::map<GraphletSignature, std::uint64_t> local;
        for (std::uint64_t i = 0; i < n; ++i) ++local[signatures.get(extract_induced(treelets.graph(), mixture.sample(rng).nodes))];
        std::lock_guard lock(mu);
        done.emplace(c, std::move(local));
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
      stop = true;
    }
  };
  const unsigned nthreads = std::max(1u, opt.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  // Keep only the unbroken prefix of chunks so a time cap stays reproducible
  // up to where it cut.
  UniformTallies r;
  std::uint64_t expect = 0;
  for (auto& [c, local] : done) {
    if (c != expect) break;
    ++expect;
    for (auto& [sig, n] : local) {
      r.hits[sig] += n;
      r.samples += n;
    }
  }
  return r;
}

/// Estimates from uniform tallies; σ_i is the spanning-tree count of each
/// class, and t includes the star pool scaled to colorful units.
inline EstimateReport uniform_report(const UniformTallies& tallies, const TableHeader& header, long double colorful_probability) {
  std::map<GraphletSignature, std::uint64_t> sigma;
  for (const auto& [sig, n] : tallies.hits) sigma[sig] = spanning_trees_kirchhoff(sig.graph());
  Decimal t = to_decimal(header.total);
  if (header.has(kFlagRoundSkipped)) t += Decimal(colorful_probability) * to_decimal(header.star_total);
  return uniform_estimate(tallies.hits, t, sigma, tallies.samples, colorful_probability, header.k);
}

}  // namespace motifcc
