// motifcc: build color-coding tables, sample graphlets, census and exact
// counts.
//
//   motifcc build  --graph G -k K --tables DIR [--seed S] [--lambda L] [--threads T]
//                  [--vlc] [--skip-round] [--all-roots]
//   motifcc sample --graph G --tables DIR [--mode uniform|ags] [--samples N] [--time SEC]
//                  [--eps E --delta D | --threshold C] [--delta0 D0] [--buffer B]
//                  [--threads T] [--seed S] [--out CSV] [--truth CSV]
//   motifcc census -k K
//   motifcc exact  --graph G -k K [--out CSV]
//
// Progress goes to stderr as one JSON object per line.
// Exit codes: 0 ok, 1 other failure, 2 usage, 3 I/O, 4 capacity, 5 mismatch.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <motifcc/ags.hpp>
#include <motifcc/algebra.hpp>
#include <motifcc/buildup.hpp>
#include <motifcc/estimate.hpp>
#include <motifcc/graph.hpp>
#include <motifcc/oracle.hpp>
#include <motifcc/profile.hpp>
#include <motifcc/sampler.hpp>
#include <motifcc/uniform.hpp>

using namespace motifcc;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kCapacity = 4, kMismatch = 5 };

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class MismatchError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void progress(const json& j) { std::cerr << j.dump() << std::endl; }

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string manifest_path(const std::string& dir) { return (std::filesystem::path(dir) / "manifest.json").string(); }

void check_k(unsigned k) {
  if (k < 3 || k > kMaxK) throw UsageError("k must be in [3, 16]");
}

void check_lambda(unsigned k, const std::optional<double>& lambda) {
  if (lambda && !(*lambda > 0 && *lambda * (k - 1) < 1)) throw UsageError("lambda must satisfy 0 < lambda < 1/(k-1)");
}

void color(ColoredGraph& g, unsigned k, std::uint64_t seed, const std::optional<double>& lambda) {
  if (lambda)
    color_biased(g, k, *lambda, seed);
  else
    color_uniform(g, k, seed);
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw IoError("cannot write " + path);
  return file;
}

// ---------------------------------------------------------------------------
// build

struct BuildConfig {
  std::string graph, tables;
  unsigned k = 0;
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  unsigned threads = 1;
  bool vlc = false, skip_round = false, all_roots = false;
};

template <CountType C, typename Algebra>
BuildSummary run_build(const ColoredGraph& g, const Algebra& alg, const BuildOptions& opt, const std::string& dir) {
  FileStore<C> store(dir);
  return build_tables<C>(g, alg, opt, store);
}

int cmd_build(const BuildConfig& cfg) {
  check_k(cfg.k);
  check_lambda(cfg.k, cfg.lambda);
  if (cfg.vlc && cfg.k > 8) throw UsageError("--vlc needs indexed keys, so k <= 8");
  const auto t0 = Clock::now();
  auto g = load_graph_file(cfg.graph);
  const double load_seconds = seconds_since(t0);
  progress({{"event", "loaded"}, {"n", g.num_nodes()}, {"m", g.num_edges()}, {"seconds", load_seconds}});
  color(g, cfg.k, cfg.seed, cfg.lambda);

  BuildOptions opt;
  opt.skip_round = cfg.skip_round;
  opt.zero_root = !cfg.all_roots;
  opt.vlc = cfg.vlc;
  opt.threads = cfg.threads;
  opt.lambda = cfg.lambda.value_or(0.0);
  json rounds = json::array();
  opt.on_round = [&](const BuildOptions::RoundStats& s) {
    json r{{"event", "round"}, {"h", s.h}, {"entries", s.entries}, {"seconds", s.seconds}};
    progress(r);
    r.erase("event");
    rounds.push_back(r);
  };

  const auto t1 = Clock::now();
  BuildSummary summary;
  const bool indexed = cfg.k <= 8;
  if (cfg.vlc)
    summary = run_build<U256>(g, IndexedAlgebra(cfg.k), opt, cfg.tables);
  else if (indexed)
    summary = run_build<u128>(g, IndexedAlgebra(cfg.k), opt, cfg.tables);
  else
    summary = run_build<u128>(g, StructuralAlgebra(cfg.k), opt, cfg.tables);
  const double build_seconds = seconds_since(t1);

  const auto& h = summary.header;
  json shapes = json::array();
  for (const auto& s : h.shapes)
    shapes.push_back({{"shape", s.canonical.to_string()}, {"copies", s.copies.str()}, {"multiplicity", s.multiplicity}, {"star", s.star}});
  json manifest{
      {"format", "motifcc-manifest-1"},
      {"graph", cfg.graph},
      {"graph_hash", hex64(g.content_hash())},
      {"n", g.num_nodes()},
      {"m", g.num_edges()},
      {"k", cfg.k},
      {"seed", cfg.seed},
      {"lambda", cfg.lambda ? json(*cfg.lambda) : json(nullptr)},
      {"count_bits", cfg.vlc ? 256 : 128},
      {"flags", {{"vlc", cfg.vlc}, {"skip_round", cfg.skip_round}, {"zero_root", h.has(kFlagZeroRooted)}, {"indexed_keys", indexed}}},
      {"rounds", summary.rounds},
      {"totals", {{"t", h.total.str()}, {"star_total", h.star_total.str()}, {"shapes", shapes}}},
      {"timings", {{"load_seconds", load_seconds}, {"build_seconds", build_seconds}, {"rounds", rounds}}},
  };
  std::ofstream out(manifest_path(cfg.tables));
  if (!out) throw IoError("cannot write " + manifest_path(cfg.tables));
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("manifest write failed");
  std::cout << json{{"event", "built"}, {"tables", cfg.tables}, {"t", h.total.str()}, {"star_total", h.star_total.str()}, {"seconds", build_seconds}}.dump()
            << std::endl;
  return kOk;
}

// ---------------------------------------------------------------------------
// sample

struct SampleConfig {
  std::string graph, tables, mode = "uniform", out, truth;
  std::optional<unsigned> k;
  std::uint64_t samples = 0;
  double time = 0;
  std::optional<double> eps, delta;
  std::optional<std::uint64_t> threshold;
  std::size_t delta0 = 4096, buffer = 1024;
  unsigned threads = 1;
  std::uint64_t seed = 0;
};

json read_manifest(const std::string& dir) {
  std::ifstream in(manifest_path(dir));
  if (!in) throw IoError("cannot open " + manifest_path(dir));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("malformed manifest: " + std::string(e.what()));
  }
}

std::string error_csv_path(const std::string& out) {
  if (out.empty() || out == "-") return "errors.csv";
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_errors.csv")).string();
}

template <CountType C, typename Algebra>
EstimateReport run_sample(const SampleConfig& cfg, const json& manifest, const ColoredGraph& g, const Algebra& alg) {
  const unsigned k = alg.k();
  const auto tables = TableSet<C>::load_directory(cfg.tables, k);
  SamplerOptions sopt;
  sopt.delta0 = cfg.delta0;
  sopt.buffer = cfg.buffer;
  TreeletSampler<C, Algebra> sampler(g, alg, tables, sopt);
  StarSampler stars(g, k);
  const auto& header = tables.header();
  const bool biased = !manifest["lambda"].is_null();
  const Rational p = biased ? biased_correction(k, Rational(manifest["lambda"].get<double>())) : colorful_probability_exact(k);
  const long double pl = p.convert_to<long double>();

  if (sampler.empty() && (stars.empty() || !header.has(kFlagRoundSkipped))) throw EmptyPoolError();

  if (cfg.mode == "uniform") {
    UniformOptions opt;
    opt.samples = cfg.samples;
    opt.max_seconds = cfg.time;
    opt.threads = cfg.threads;
    opt.seed = cfg.seed;
    const auto t0 = Clock::now();
    auto tallies = uniform_tallies(sampler, stars, pl, opt);
    progress({{"event", "sampled"}, {"samples", tallies.samples}, {"classes", tallies.hits.size()}, {"seconds", seconds_since(t0)}});
    return uniform_report(tallies, header, pl);
  }

  AgsOptions opt;
  opt.threshold = cfg.threshold;
  if (cfg.eps) opt.epsilon = *cfg.eps;
  if (cfg.delta) opt.delta = *cfg.delta;
  if (cfg.samples) opt.max_samples = cfg.samples;
  opt.max_seconds = cfg.time;
  opt.threads = cfg.threads;
  opt.seed = cfg.seed;
  const auto threshold = cfg.threshold ? *cfg.threshold : covering_threshold(opt.epsilon, opt.delta, graphlet_class_count(k));
  progress({{"event", "threshold"}, {"value", threshold}, {"pinned", cfg.threshold.has_value()}});
  opt.on_epoch = [](const AgsOptions::Epoch& e) {
    progress({{"event", "epoch"}, {"index", e.index}, {"shape", e.shape}, {"samples", e.samples}, {"covered", e.covered}});
  };
  ProfileCache profiles(k, {header.has(kFlagRoundSkipped), header.has(kFlagZeroRooted)});
  return ags_run(sampler, stars, p, profiles, opt).report;
}

int cmd_sample(const SampleConfig& cfg) {
  if (cfg.mode != "uniform" && cfg.mode != "ags") throw UsageError("--mode must be uniform or ags");
  if (cfg.mode == "uniform" && cfg.samples == 0 && !(cfg.time > 0)) throw UsageError("uniform sampling needs --samples or --time");
  if (cfg.threshold && (cfg.eps || cfg.delta)) throw UsageError("--threshold pins c̄; drop --eps/--delta");
  if (cfg.threshold && *cfg.threshold == 0) throw UsageError("--threshold must be positive");
  if (cfg.eps && !(*cfg.eps > 0 && *cfg.eps < 1)) throw UsageError("--eps must be in (0, 1)");
  if (cfg.delta && !(*cfg.delta > 0 && *cfg.delta < 1)) throw UsageError("--delta must be in (0, 1)");
  if (cfg.time < 0) throw UsageError("--time must be non-negative");

  const auto manifest = read_manifest(cfg.tables);
  const unsigned k = manifest.at("k").get<unsigned>();
  if (cfg.k && *cfg.k != k) throw MismatchError("tables were built with k=" + std::to_string(k));
  auto g = load_graph_file(cfg.graph);
  if (hex64(g.content_hash()) != manifest.at("graph_hash").get<std::string>())
    throw MismatchError("graph does not match the graph the tables were built from");
  std::optional<double> lambda;
  if (!manifest.at("lambda").is_null()) lambda = manifest["lambda"].get<double>();
  color(g, k, manifest.at("seed").get<std::uint64_t>(), lambda);

  const bool vlc = manifest.at("flags").at("vlc").get<bool>();
  const bool indexed = manifest.at("flags").at("indexed_keys").get<bool>();
  EstimateReport report;
  if (vlc)
    report = run_sample<U256>(cfg, manifest, g, IndexedAlgebra(k));
  else if (indexed)
    report = run_sample<u128>(cfg, manifest, g, IndexedAlgebra(k));
  else
    report = run_sample<u128>(cfg, manifest, g, StructuralAlgebra(k));

  std::ofstream file;
  write_report_csv(open_out(cfg.out, file), report);
  json summary{{"event", "report"}, {"mode", report.mode}, {"samples", report.total_samples}, {"classes", report.classes.size()}};
  if (!cfg.truth.empty()) {
    std::ifstream in(cfg.truth);
    if (!in) throw IoError("cannot open " + cfg.truth);
    const auto truth = read_truth_csv(in, k);
    const auto errors = relative_error(report, truth);
    const auto path = error_csv_path(cfg.out);
    std::ofstream err(path);
    if (!err) throw IoError("cannot write " + path);
    write_error_csv(err, errors);
    summary["errors"] = path;
    summary["within_25"] = errors.within_25;
    summary["truth_classes"] = errors.rows.size();
  }
  progress(summary);
  return kOk;
}

// ---------------------------------------------------------------------------
// census, exact

int cmd_census(unsigned k) {
  check_k(k);
  std::vector<std::uint64_t> rooted(k + 1, 0);
  for (const auto& s : enumerate_shapes(k)) ++rooted[s.size];
  // Colorful rooted treelets on at most k nodes: each h-node shape with each
  // h-subset of the k colors.
  std::uint64_t colored = 0;
  for (unsigned h = 1; h <= k; ++h) colored += rooted[h] * static_cast<std::uint64_t>(binomial(k, h));
  std::cout << "k " << k << '\n';
  std::cout << "rooted_shapes";
  for (unsigned h = 1; h <= k; ++h) std::cout << ' ' << rooted[h];
  std::cout << '\n';
  std::cout << "colored_treelets " << colored << '\n';
  std::cout << "unrooted_treelets " << TreeletUniverse(k).unrooted().size() << '\n';
  if (k <= 8)
    std::cout << "graphlet_classes " << graphlet_classes(k).size() << '\n';
  else
    std::cout << "graphlet_classes " << std::fixed << std::setprecision(0) << graphlet_class_count(k) << " (tabulated)\n";
  return kOk;
}

int cmd_exact(const std::string& graph, unsigned k, const std::string& out) {
  check_k(k);
  const auto g = load_graph_file(graph);
  const auto t0 = Clock::now();
  OracleLimits lim;
  lim.max_sets = 200'000'000;
  const auto truth = exact_graphlet_counts(g, k, lim);
  progress({{"event", "exact"}, {"classes", truth.size()}, {"seconds", seconds_since(t0)}});
  std::ofstream file;
  write_truth_csv(open_out(out, file), truth);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphlet counting and sampling by color coding"};
  app.require_subcommand(1);
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());

  BuildConfig build;
  build.threads = cores;
  auto* b = app.add_subcommand("build", "Color the graph and build count tables");
  b->add_option("--graph", build.graph, "Edge list or GFG1 graph cache")->required();
  b->add_option("-k", build.k, "Graphlet size")->required();
  b->add_option("--tables", build.tables, "Output table directory")->required();
  b->add_option("--seed", build.seed, "Coloring seed");
  b->add_option("--lambda", build.lambda, "Biased coloring parameter");
  b->add_option("--threads", build.threads, "Worker threads");
  b->add_flag("--vlc", build.vlc, "Variable-length count records (k <= 8)");
  b->add_flag("--skip-round", build.skip_round, "Skip round k-1; stars come from degrees");
  b->add_flag("--all-roots", build.all_roots, "Store final-round counts at every root");

  SampleConfig sample;
  sample.threads = cores;
  auto* s = app.add_subcommand("sample", "Estimate graphlet counts from built tables");
  s->add_option("--graph", sample.graph, "Graph the tables were built from")->required();
  s->add_option("--tables", sample.tables, "Table directory")->required();
  s->add_option("-k", sample.k, "Graphlet size (checked against the tables)");
  s->add_option("--mode", sample.mode, "uniform or ags");
  s->add_option("--samples", sample.samples, "Sample budget");
  s->add_option("--time", sample.time, "Time budget in seconds");
  s->add_option("--eps", sample.eps, "AGS accuracy");
  s->add_option("--delta", sample.delta, "AGS failure probability");
  s->add_option("--threshold", sample.threshold, "Pin the AGS covering threshold");
  s->add_option("--delta0", sample.delta0, "Degree from which neighbor draws are buffered");
  s->add_option("--buffer", sample.buffer, "Neighbor buffer size (0 disables)");
  s->add_option("--threads", sample.threads, "Worker threads");
  s->add_option("--seed", sample.seed, "Sampling seed");
  s->add_option("--out", sample.out, "Report CSV (default stdout)");
  s->add_option("--truth", sample.truth, "Exact counts CSV; writes an error CSV next to --out");

  unsigned census_k = 0;
  auto* c = app.add_subcommand("census", "Count treelet shapes and graphlet classes");
  c->add_option("-k", census_k, "Graphlet size")->required();

  std::string exact_graph, exact_out;
  unsigned exact_k = 0;
  auto* e = app.add_subcommand("exact", "Exact graphlet counts by enumeration (small graphs)");
  e->add_option("--graph", exact_graph, "Edge list or GFG1 graph cache")->required();
  e->add_option("-k", exact_k, "Graphlet size")->required();
  e->add_option("--out", exact_out, "Truth CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*b) return cmd_build(build);
    if (*s) return cmd_sample(sample);
    if (*c) return cmd_census(census_k);
    if (*e) return cmd_exact(exact_graph, exact_k, exact_out);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return kUsage;
  } catch (const MismatchError& err) {
    std::cerr << "mismatch: " << err.what() << '\n';
    return kMismatch;
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << '\n';
    return kIo;
  } catch (const IoError& err) {
    std::cerr << "I/O error: " << err.what() << '\n';
    return kIo;
  } catch (const FormatError& err) {
    std::cerr << "format error: " << err.what() << '\n';
    return kIo;
  } catch (const CapacityError& err) {
    std::cerr << "capacity error: " << err.what() << '\n';
    return kCapacity;
  } catch (const ScaleError& err) {
    std::cerr << "capacity error: " << err.what() << '\n';
    return kCapacity;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
