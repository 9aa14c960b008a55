#pragma once

// Graphlet-count estimates from sample tallies, relative errors, CSV I/O.

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "count.hpp"
#include "graphlet.hpp"
#include "treelet.hpp"

namespace motifcc {

using Decimal = boost::multiprecision::cpp_dec_float_50;
using Rational = boost::multiprecision::cpp_rational;

inline Decimal to_decimal(const U256& v) { return Decimal(v.str()); }

/// Probability that a fixed k-set is colorful under uniform coloring, k!/k^k.
inline Rational colorful_probability_exact(unsigned k) {
  boost::multiprecision::cpp_int num = 1, den = 1;
  for (unsigned i = 1; i <= k; ++i) {
    num *= i;
    den *= k;
  }
  return Rational(num, den);
}
inline long double colorful_probability(unsigned k) {
  return static_cast<long double>(colorful_probability_exact(k).convert_to<long double>());
}

namespace detail {
inline void check_lambda(unsigned k, const Rational& lambda) {
  if (k < 2 || k > kMaxK) throw std::invalid_argument("k must be in [2, 16]");
  if (!(lambda > 0) || !(lambda * (k - 1) < 1)) throw std::invalid_argument("lambda must satisfy 0 < lambda < 1/(k-1)");
}
}  // namespace detail

/// Probability that the nodes of a fixed set get exactly the colors `colors`
/// (one node per color) under biased coloring: j! lambda^|C\{0}| (1 - lambda (k-1))^[0 in C].
inline Rational biased_subset_probability(unsigned k, const Rational& lambda, ColorSet colors) {
  detail::check_lambda(k, lambda);
  const unsigned j = static_cast<unsigned>(std::popcount(static_cast<unsigned>(colors)));
  Rational p = 1;
  for (unsigned i = 2; i <= j; ++i) p *= i;
  for (unsigned c = 1; c < k; ++c)
    if ((colors >> c) & 1u) p *= lambda;
  if (colors & 1u) p *= 1 - lambda * (k - 1);
  return p;
}

/// Probability that a fixed k-set is colorful under biased coloring:
/// k! lambda^(k-1) (1 - lambda (k-1)).
inline Rational biased_correction(unsigned k, const Rational& lambda) {
  return biased_subset_probability(k, lambda, static_cast<ColorSet>((1u << k) - 1));
}
inline long double biased_correction(unsigned k, double lambda) {
  if (!(lambda > 0.0) || !(lambda * (k - 1) < 1.0)) throw std::invalid_argument("lambda must satisfy 0 < lambda < 1/(k-1)");
  long double p = 1;
  for (unsigned i = 2; i <= k; ++i) p *= i;
  for (unsigned i = 1; i < k; ++i) p *= lambda;
  return p * (1.0L - static_cast<long double>(lambda) * (k - 1));
}

struct ClassEstimate {
  GraphletSignature signature;
  Decimal colorful = 0;  ///< estimated colorful copies
  Decimal count = 0;     ///< estimated copies
  long double frequency = 0;
  std::uint64_t samples = 0;
  bool covered = false;
  Decimal weight = 0;  ///< AGS weight, or sample share in uniform mode
};

struct EstimateReport {
  std::string mode;
  unsigned k = 0;
  Decimal total = 0;  ///< t, in colorful units
  long double colorful_probability = 0;
  std::uint64_t total_samples = 0;
  std::vector<ClassEstimate> classes;  ///< sorted by signature

  const ClassEstimate* find(const GraphletSignature& s) const {
    for (const auto& c : classes)
      if (c.signature == s) return &c;
    return nullptr;
  }
};

/// Fills frequencies from counts; they sum to one when any count is positive.
inline void normalize_frequencies(EstimateReport& r) {
  Decimal sum = 0;
  for (const auto& c : r.classes) sum += c.count;
  for (auto& c : r.classes) c.frequency = sum > 0 ? static_cast<long double>(c.count / sum) : 0.0L;
}

/// ĝ_i = t * hits_i / (sigma_i * N * p).
inline EstimateReport uniform_estimate(const std::map<GraphletSignature, std::uint64_t>& tallies, const Decimal& t,
                                       const std::map<GraphletSignature, std::uint64_t>& sigma, std::uint64_t samples,
                                       long double colorful_probability, unsigned k) {
  if (samples == 0) throw std::invalid_argument("no samples");
  if (!(colorful_probability > 0)) throw std::invalid_argument("colorful probability must be positive");
  EstimateReport r;
  r.mode = "uniform";
  r.k = k;
  r.total = t;
  r.colorful_probability = colorful_probability;
  r.total_samples = samples;
  for (const auto& [sig, hits] : tallies) {
    auto it = sigma.find(sig);
    if (it == sigma.end() || it->second == 0) throw std::invalid_argument("missing spanning-tree count for " + sig.to_hex());
    ClassEstimate c;
    c.signature = sig;
    c.samples = hits;
    c.covered = hits > 0;
    c.weight = Decimal(hits) / Decimal(samples);
    c.colorful = t * Decimal(hits) / (Decimal(it->second) * Decimal(samples));
    c.count = c.colorful / Decimal(colorful_probability);
    r.classes.push_back(c);
  }
  normalize_frequencies(r);
  return r;
}

/// err_H = (estimate - truth) / truth; +inf when truth is zero and the
/// estimate is not.
struct ErrorRow {
  GraphletSignature signature;
  Decimal estimate = 0;
  U256 truth = 0;
  double error = 0;
};

struct ErrorSummary {
  std::vector<ErrorRow> rows;
  std::size_t within_25 = 0;
};

inline double relative_error(const Decimal& estimate, const U256& truth) {
  if (truth.is_zero()) return estimate == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  const Decimal t = to_decimal(truth);
  return static_cast<double>((estimate - t) / t);
}

inline ErrorSummary relative_error(const EstimateReport& report, const std::map<GraphletSignature, U256>& truth) {
  ErrorSummary s;
  std::map<GraphletSignature, ErrorRow> rows;
  for (const auto& [sig, g] : truth) rows[sig] = {sig, 0, g, 0};
  for (const auto& c : report.classes) {
    auto& row = rows[c.signature];
    row.signature = c.signature;
    row.estimate = c.count;
  }
  for (auto& [sig, row] : rows) {
    row.error = relative_error(row.estimate, row.truth);
    if (std::fabs(row.error) <= 0.25) ++s.within_25;
    s.rows.push_back(row);
  }
  return s;
}

inline std::string format_decimal(const Decimal& x) { return x.str(6, std::ios_base::fixed); }

inline void write_report_csv(std::ostream& out, const EstimateReport& r) {
  out << "signature_hex,count_estimate,frequency,samples,covered,mode\n";
  std::ostringstream freq;
  freq.precision(12);
  for (const auto& c : r.classes) {
    freq.str("");
    freq << std::fixed << static_cast<double>(c.frequency);
    out << c.signature.to_hex() << ',' << format_decimal(c.count) << ',' << freq.str() << ',' << c.samples << ','
        << (c.covered ? 1 : 0) << ',' << r.mode << '\n';
  }
}

/// Exact counts in the report schema, mode "exact".
inline void write_truth_csv(std::ostream& out, const std::map<GraphletSignature, U256>& truth) {
  out << "signature_hex,count_estimate,frequency,samples,covered,mode\n";
  U256 total = 0;
  for (const auto& [sig, g] : truth) total += g;
  for (const auto& [sig, g] : truth) {
    const double f = total.is_zero() ? 0.0 : static_cast<double>(to_decimal(g) / to_decimal(total));
    std::ostringstream freq;
    freq.precision(12);
    freq << std::fixed << f;
    out << sig.to_hex() << ',' << g.str() << ',' << freq.str() << ",0,1,exact\n";
  }
}

/// Reads signature and count columns of a report-schema CSV; the count must
/// be a non-negative integer (fractional digits of zero are accepted).
inline std::map<GraphletSignature, U256> read_truth_csv(std::istream& in, unsigned k) {
  std::map<GraphletSignature, U256> truth;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || lineno == 1) continue;
    std::istringstream ls(line);
    std::string hex, count;
    if (!std::getline(ls, hex, ',') || !std::getline(ls, count, ',')) throw ParseError(lineno, "expected signature and count");
    if (auto dot = count.find('.'); dot != std::string::npos) {
      if (count.find_first_not_of('0', dot + 1) != std::string::npos) throw ParseError(lineno, "truth count must be an integer");
      count.resize(dot);
    }
    try {
      truth[GraphletSignature::from_hex(k, hex)] = U256(count);
    } catch (const std::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return truth;
}

inline void write_error_csv(std::ostream& out, const ErrorSummary& s) {
  out << "signature_hex,count_estimate,truth,err_h\n";
  for (const auto& r : s.rows) {
    out << r.signature.to_hex() << ',' << format_decimal(r.estimate) << ',' << r.truth.str() << ',';
    if (std::isinf(r.error))
      out << "inf";
    else
      out << r.error;
    out << '\n';
  }
}

}  // namespace motifcc
