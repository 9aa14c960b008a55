#pragma once

// Adaptive graphlet sampling: sample one treelet class at a time and switch
// to the class least likely to land on already-covered graphlets whenever a
// graphlet class reaches the covering threshold.

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "estimate.hpp"
#include "graphlet.hpp"
#include "profile.hpp"
#include "sampler.hpp"

namespace motifcc {

/// Number of connected graphs on k unlabeled nodes, k <= 16.
inline long double graphlet_class_count(unsigned k) {
  static const char* const values[] = {"1", "1", "1", "2", "6", "21", "112", "853", "11117", "261080", "11716571",
                                       "1006700565", "164059830476", "50335907869219", "29003487462848061",
                                       "31397381142761241960", "63969560113225176176277"};
  if (k > kMaxK) throw std::invalid_argument("k must be at most 16");
  return std::strtold(values[k], nullptr);
}

/// ceil((4 / eps^2) ln(2 s / delta)).
inline std::uint64_t covering_threshold(double epsilon, double delta, long double s) {
  if (!(epsilon > 0) || !(delta > 0) || !(s >= 1)) throw std::invalid_argument("need eps > 0, delta > 0, s >= 1");
  const long double v = 4.0L / (static_cast<long double>(epsilon) * epsilon) * std::log(2.0L * s / delta);
  // Guard against the value landing a rounding error above an integer.
  const long double r = std::nearbyint(v);
  const long double c = std::fabs(v - r) < 1e-12L * std::max(1.0L, r) ? r : std::ceil(v);
  return static_cast<std::uint64_t>(std::max(1.0L, c));
}

/// One samplable pool: a treelet class of the table, or the star pool.
struct AgsShape {
  TreeletShape canonical;
  std::uint32_t class_id = 0;  ///< unrooted class id
  bool star_pool = false;      ///< uncolored stars, drawn from degrees
  Rational mass = 0;           ///< t_j, or P * S for the star pool
};

struct AgsClass {
  GraphletSignature signature;
  std::uint64_t hits = 0;
  bool covered = false;
  SpanningProfile profile;
};

struct AgsState {
  std::vector<AgsShape> shapes;
  std::vector<std::uint64_t> taken;  ///< n_j
  std::vector<bool> retired;
  std::map<GraphletSignature, AgsClass> classes;
  std::vector<GraphletSignature> covered_order;
  std::uint64_t threshold = 1;
  std::optional<std::size_t> current;
  std::uint64_t samples = 0;
  std::uint64_t epochs = 0;
  /// Consecutive draws of the current pool that hit covered classes.
  std::uint64_t streak = 0;

  /// ã_ji: expected hits on class i per colorful copy of i, per sample of j.
  Rational yield(std::size_t j, const AgsClass& c) const {
    const auto& s = shapes[j];
    if (s.mass == 0) return 0;
    return Rational(c.profile.sigma[s.class_id]) / s.mass;
  }
  /// w_i = sum_j n_j ã_ji.
  Rational weight(const AgsClass& c) const {
    Rational w = 0;
    for (std::size_t j = 0; j < shapes.size(); ++j)
      if (taken[j]) w += Rational(taken[j]) * yield(j, c);
    return w;
  }
  /// ĉ_i = c_i / w_i.
  Rational colorful_estimate(const AgsClass& c) const {
    const Rational w = weight(c);
    return w == 0 ? Rational(0) : Rational(c.hits) / w;
  }
};

/// Estimated probability that one sample of pool j spans a covered class.
inline Rational covered_probability(const AgsState& st, std::size_t j) {
  Rational p = 0;
  for (const auto& sig : st.covered_order) {
    const auto& c = st.classes.at(sig);
    p += st.yield(j, c) * st.colorful_estimate(c);
  }
  return p;
}

/// The argmin over live pools of the covered probability; ties go to the
/// smallest shape encoding. Pools whose covered probability reaches
/// 1 - 1/threshold are retired. nullopt: nothing left to sample.
inline std::optional<std::size_t> select_next_treelet(AgsState& st) {
  std::optional<std::size_t> best;
  Rational best_p = 0;
  const Rational retire_at = 1 - Rational(1, st.threshold);
  for (std::size_t j = 0; j < st.shapes.size(); ++j) {
    if (st.retired[j] || st.shapes[j].mass == 0) continue;
    const Rational p = covered_probability(st, j);
    if (p >= retire_at) {
      st.retired[j] = true;
      continue;
    }
    if (!best || p < best_p || (p == best_p && st.shapes[j].canonical < st.shapes[*best].canonical)) {
      best = j;
      best_p = p;
    }
  }
  return best;
}

struct AgsOptions {
  std::optional<std::uint64_t> threshold;  ///< pins c̄
  double epsilon = 0.1;
  double delta = 0.05;
  std::optional<std::uint64_t> max_samples;  ///< unset: no sample cap
  double max_seconds = 0;         ///< 0: no time cap
  std::size_t batch = 1024;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  /// Classes to report even if never sampled.
  std::vector<GraphletSignature> universe;

  struct Epoch {
    std::uint64_t index = 0;
    std::string shape;
    std::uint64_t samples = 0;
    std::size_t covered = 0;
  };
  std::function<void(const Epoch&)> on_epoch;
};

struct AgsResult {
  EstimateReport report;
  AgsState state;
};

/// Initial pools from a table header: every class with t_j > 0, plus the
/// star pool when stars were left out of the table.
inline std::vector<AgsShape> ags_shapes(const TableHeader& header, const TreeletUniverse& universe, const Rational& colorful_probability) {
  std::vector<AgsShape> shapes;
  for (const auto& s : header.shapes) {
    if (s.copies.is_zero()) continue;
    AgsShape a;
    a.canonical = s.canonical;
    a.class_id = universe.unrooted_id(s.canonical);
    a.mass = Rational(boost::multiprecision::cpp_int(s.copies));
    shapes.push_back(a);
  }
  if (header.has(kFlagRoundSkipped) && !header.star_total.is_zero()) {
    if (auto star = universe.star_id()) {
      AgsShape a;
      a.canonical = universe.unrooted()[*star].canonical;
      a.class_id = *star;
      a.star_pool = true;
      a.mass = colorful_probability * Rational(boost::multiprecision::cpp_int(header.star_total));
      shapes.push_back(a);
    }
  }
  std::sort(shapes.begin(), shapes.end(), [](const auto& a, const auto& b) { return a.canonical < b.canonical; });
  return shapes;
}

/// Runs AGS to termination and returns per-class estimates.
template <CountType C, typename Algebra>
AgsResult ags_run(const TreeletSampler<C, Algebra>& sampler, const StarSampler& stars, const Rational& colorful_probability,
                  ProfileCache& profiles, const AgsOptions& opt) {
  const auto& header = sampler.tables().header();
  const unsigned k = header.k;
  AgsResult res;
  AgsState& st = res.state;
  st.threshold = opt.threshold ? *opt.threshold : covering_threshold(opt.epsilon, opt.delta, graphlet_class_count(k));
  if (st.threshold == 0) throw std::invalid_argument("threshold must be positive");
  st.shapes = ags_shapes(header, sampler.algebra().universe(), colorful_probability);
  st.taken.assign(st.shapes.size(), 0);
  st.retired.assign(st.shapes.size(), false);
  const long double s_total = graphlet_class_count(k);

  // Start from the most frequent pool.
  for (std::size_t j = 0; j < st.shapes.size(); ++j)
    if (!st.current || st.shapes[j].mass > st.shapes[*st.current].mass) st.current = j;

  const auto t0 = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    return opt.max_seconds > 0 &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= opt.max_seconds;
  };
  SignatureCache signatures;
  const unsigned nthreads = std::max(1u, opt.threads);
  std::vector<typename TreeletSampler<C, Algebra>::Session> sessions;
  for (unsigned w = 0; w < nthreads; ++w) sessions.emplace_back(sampler);
  std::uint64_t batch_index = 0;

  auto log_epoch = [&] {
    if (!opt.on_epoch) return;
    AgsOptions::Epoch e;
    e.index = st.epochs;
    e.shape = st.current ? st.shapes[*st.current].canonical.to_string() + (st.shapes[*st.current].star_pool ? "*" : "") : "-";
    e.samples = st.samples;
    e.covered = st.covered_order.size();
    opt.on_epoch(e);
  };
  log_epoch();

  while (st.current && static_cast<long double>(st.covered_order.size()) < s_total) {
    if (opt.max_samples && st.samples >= *opt.max_samples) break;
    if (out_of_time()) break;
    std::size_t want = opt.batch;
    if (opt.max_samples) want = static_cast<std::size_t>(std::min<std::uint64_t>(want, *opt.max_samples - st.samples));
    const std::size_t j = *st.current;
    const auto& shape = st.shapes[j];

    // Draw a batch in parallel; worker w fills slots w, w + T, ...
    std::vector<GraphletSignature> drawn(want);
    auto work = [&](unsigned w) {
      Rng rng(opt.seed, (batch_index << 8) | w);
      for (std::size_t i = w; i < want; i += nthreads) {
        const SampledCopy copy = shape.star_pool ? stars.sample(rng) : sessions[w].sample_class(shape.class_id, rng);
        drawn[i] = signatures.get(extract_induced(sampler.graph(), copy.nodes));
      }
    };
    if (nthreads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < nthreads; ++w) pool.emplace_back(work, w);
      for (auto& th : pool) th.join();
    }
    ++batch_index;

    // Consume in order; a coverage event ends the epoch and discards the rest.
    for (const auto& sig : drawn) {
      ++st.samples;
      ++st.taken[j];
      auto [it, fresh] = st.classes.try_emplace(sig);
      AgsClass& c = it->second;
      if (fresh) {
        c.signature = sig;
        c.profile = profiles.get(sig);
      }
      ++c.hits;
      if (!c.covered && c.hits >= st.threshold) {
        c.covered = true;
        st.covered_order.push_back(sig);
        ++st.epochs;
        st.streak = 0;
        st.current = select_next_treelet(st);
        log_epoch();
        break;
      }
      // A pool whose last c̄ draws all hit covered classes is spent.
      st.streak = c.covered ? st.streak + 1 : 0;
      if (st.streak >= st.threshold) {
        st.retired[j] = true;
        st.streak = 0;
        st.current = select_next_treelet(st);
        break;
      }
    }
  }

  // Report.
  EstimateReport& r = res.report;
  r.mode = "ags";
  r.k = k;
  Rational t = 0;
  for (const auto& s : st.shapes) t += s.mass;
  r.total = Decimal(t.convert_to<Decimal>());
  r.colorful_probability = colorful_probability.convert_to<long double>();
  r.total_samples = st.samples;
  std::map<GraphletSignature, ClassEstimate> rows;
  for (const auto& sig : opt.universe) rows[sig].signature = sig;
  for (const auto& [sig, c] : st.classes) {
    ClassEstimate e;
    e.signature = sig;
    e.samples = c.hits;
    e.covered = c.covered;
    const Rational w = st.weight(c);
    e.weight = w.convert_to<Decimal>();
    const Rational chat = w == 0 ? Rational(0) : Rational(c.hits) / w;
    e.colorful = chat.convert_to<Decimal>();
    e.count = (chat / colorful_probability).convert_to<Decimal>();
    rows[sig] = e;
  }
  for (auto& [sig, e] : rows) r.classes.push_back(e);
  normalize_frequencies(r);
  return res;
}

}  // namespace motifcc
