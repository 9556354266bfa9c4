// hullmert: exact MERT line search over packed forests.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hullmert/hullmert.hpp"

namespace {

using namespace hullmert;
using io::json;

struct CommonArgs {
  std::vector<std::string> paths;
  std::string config_path;
  std::string weights;
  std::string direction;
  std::string metric;
  std::optional<double> offset;
  std::optional<double> merge_eps;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> iterations;
};

struct Loaded {
  io::RunConfig config;
  io::FeatureIndex index;
  Corpus corpus;
  std::vector<double> w0;
  std::vector<double> v;
  Metric metric;
  LineSearchOptions options;
};

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

void warn_missing(const char* what, const std::vector<std::string>& missing) {
  if (missing.empty()) return;
  std::string names;
  for (const auto& n : missing) names += (names.empty() ? "" : ", ") + n;
  warn(std::string(what) + ": " + std::to_string(missing.size()) + " feature(s) absent, using 0.0: " + names);
}

io::RunConfig resolve_config(const CommonArgs& a) {
  io::RunConfig c;
  if (!a.config_path.empty()) {
    try {
      c = io::parse_config(json::parse(io::read_text(a.config_path)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, a.config_path + ": " + e.what());
    }
  }
  if (!a.weights.empty()) c.weights = io::load_feature_map(a.weights, "weights");
  if (!a.direction.empty()) c.direction = io::load_feature_map(a.direction, "direction");
  if (!a.metric.empty()) c.metric = a.metric;
  if (a.offset) c.offset = *a.offset;
  if (a.merge_eps) c.merge_eps = *a.merge_eps;
  if (a.threads) c.threads = *a.threads;
  if (a.iterations) c.iterations = *a.iterations;
  if (!(c.offset > 0.0)) throw Error(ErrorCode::kUsage, "--offset must be positive");
  if (!(c.merge_eps >= 0.0)) throw Error(ErrorCode::kUsage, "--merge-eps must be non-negative");
  return c;
}

Loaded load(const CommonArgs& a, bool need_direction) {
  Loaded l;
  l.config = resolve_config(a);
  l.metric = metric_by_name(l.config.metric);
  std::vector<io::ForestDocument> docs;
  for (const auto& p : a.paths) {
    auto more = io::read_forest_file(p);
    docs.insert(docs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  if (docs.empty()) throw Error(ErrorCode::kUsage, "empty corpus");

  std::set<std::string> names;
  for (const auto& d : docs)
    for (const auto& e : d.edges)
      for (const auto& [n, _] : e.features) names.insert(n);
  for (const auto* m : {&l.config.weights, &l.config.direction})
    for (const auto& [n, _] : *m) names.insert(n);
  for (const auto& m : l.config.directions)
    for (const auto& [n, _] : m) names.insert(n);
  l.index = io::FeatureIndex(std::move(names));

  for (std::size_t i = 0; i < docs.size(); ++i) {
    try {
      l.corpus.push_back({io::to_hypergraph(docs[i], l.index), tokenize(docs[i].reference)});
    } catch (const Error& e) {
      throw Error(e.code(), "sentence " + std::to_string(i) + ": " + e.what());
    }
    for (const auto& w : l.corpus.back().forest.report().warnings) warn("sentence " + std::to_string(i) + ": " + w);
  }

  std::vector<std::string> missing;
  l.w0 = l.index.dense(l.config.weights, &missing);
  warn_missing("weights", missing);
  if (need_direction) {
    missing.clear();
    l.v = l.index.dense(l.config.direction, &missing);
    warn_missing("direction", missing);
  } else {
    l.v.assign(l.index.size(), 0.0);
  }
  l.options.merge_eps = l.config.merge_eps;
  l.options.selection.unbounded_offset = l.config.offset;
  l.options.threads = std::max<std::size_t>(1, l.config.threads);
  return l;
}

int cmd_validate(const CommonArgs& a) {
  io::FeatureMap weights;
  if (!a.weights.empty()) weights = io::load_feature_map(a.weights, "weights");
  std::vector<io::ForestDocument> docs;
  for (const auto& p : a.paths) {
    auto more = io::read_forest_file(p);
    docs.insert(docs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  if (docs.empty()) throw Error(ErrorCode::kUsage, "empty corpus");
  const auto index = io::build_feature_index(docs, {&weights});
  if (!a.weights.empty()) {
    std::vector<std::string> missing;
    index.dense(weights, &missing);
    warn_missing("weights", missing);
  }

  int status = 0;
  json sentences = json::array();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    json s = {{"index", i}, {"nodes", docs[i].nodes.size()}, {"edges", docs[i].edges.size()}};
    try {
      const Hypergraph g = io::to_hypergraph(docs[i], index);
      const std::uint64_t n = count_derivations(g);
      s["derivations"] = n == CountingSemiring::kSaturated ? json("overflow") : json(n);
      s["lattice"] = g.is_lattice();
      json unusable = json::array();
      for (NodeId u : g.report().unusable_nodes) unusable.push_back(g.label(u));
      s["unusable_nodes"] = unusable;
      s["warnings"] = g.report().warnings;
      for (const auto& w : g.report().warnings) warn("sentence " + std::to_string(i) + ": " + w);
      s["valid"] = true;
    } catch (const Error& e) {
      s["valid"] = false;
      s["error"] = e.what();
      std::cerr << "error: sentence " << i << ": " << e.what() << '\n';
      status = std::max(status, exit_code(e.code()));
    }
    sentences.push_back(std::move(s));
  }
  std::cout << json{{"sentences", sentences}}.dump(2) << '\n';
  return status;
}

int cmd_linesearch(const CommonArgs& a) {
  const Loaded l = load(a, true);
  const auto r = line_search(l.corpus, {l.w0, l.v}, l.metric, l.metric.loss, l.options);
  for (const auto& w : r.warnings) warn(w);
  std::cout << io::linesearch_report(r, l.index, l.metric.name).dump(2) << '\n';
  return 0;
}

int cmd_sweep(const CommonArgs& a, const std::vector<double>& range, std::size_t steps) {
  if (range.size() != 2) throw Error(ErrorCode::kUsage, "--range takes LO HI");
  const Loaded l = load(a, true);
  const auto r = line_search(l.corpus, {l.w0, l.v}, l.metric, l.metric.loss, l.options);
  for (const auto& w : r.warnings) warn(w);
  std::cout << io::sweep_table(r.corpus, l.metric.loss, range[0], range[1], steps);
  return 0;
}

int cmd_optimize(const CommonArgs& a) {
  const Loaded l = load(a, false);
  std::vector<std::vector<double>> directions;
  for (const auto& m : l.config.directions) directions.push_back(l.index.dense(m));
  const auto r = optimize(l.corpus, l.w0, directions, l.config.iterations, l.metric, l.metric.loss, l.options);
  std::cout << io::optimize_report(r, l.index, l.metric.name).dump(2) << '\n';
  return 0;
}

int cmd_verify(const CommonArgs& a, std::uint64_t seed) {
  const Loaded l = load(a, true);
  const auto checks = verify_corpus(l.corpus, {l.w0, l.v}, l.metric, l.metric.loss, l.options, seed);
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.cases << " checked";
    if (c.skipped) std::cout << ", " << c.skipped << " skipped";
    std::cout << ')';
    if (!c.passed) std::cout << "  " << c.detail;
    std::cout << '\n';
    ok = ok && c.passed;
  }
  const auto stats = size_bound_stats();
  std::cout << (stats.violations == 0 ? "PASS" : "FAIL") << "  |A op B| <= |A| + |B|  (" << stats.operations
            << " operations)\n";
  return ok && stats.violations == 0 ? 0 : 3;
}

void add_common(CLI::App* cmd, CommonArgs& a, bool search_flags) {
  cmd->add_option("files", a.paths, "Forest files (JSON lines, one sentence per line)")->required();
  cmd->add_option("--weights", a.weights, "Starting weights: JSON object or path to one");
  if (!search_flags) return;
  cmd->add_option("--config", a.config_path, "Run configuration (JSON)");
  cmd->add_option("--direction", a.direction, "Search direction: JSON object or path to one");
  cmd->add_option("--metric", a.metric, "Error metric: exact or bleu");
  cmd->add_option("--offset", a.offset, "Offset used for unbounded best intervals");
  cmd->add_option("--merge-eps", a.merge_eps, "Tolerance for coalescing surface boundaries");
  cmd->add_option("--threads", a.threads, "Worker threads for per-sentence work");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact MERT line search with the convex hull semiring"};
  app.require_subcommand(1);

  CommonArgs validate_args, search_args, sweep_args, optimize_args, verify_args;
  std::vector<double> range{-10.0, 10.0};
  std::size_t steps = 201;
  std::uint64_t seed = 1;

  auto* validate = app.add_subcommand("validate", "Check forest files and report sizes");
  add_common(validate, validate_args, false);
  auto* search = app.add_subcommand("linesearch", "Run one exact line search and print a JSON report");
  add_common(search, search_args, true);
  auto* sweep = app.add_subcommand("sweep", "Print corpus loss along the search line");
  add_common(sweep, sweep_args, true);
  sweep->add_option("--range", range, "LO HI")->expected(2);
  sweep->add_option("--steps", steps, "Number of rows");
  auto* opt = app.add_subcommand("optimize", "Coordinate-wise MERT");
  add_common(opt, optimize_args, true);
  opt->add_option("--iterations", optimize_args.iterations, "Maximum direction sweeps");
  auto* verify = app.add_subcommand("verify", "Cross-check the fast path against brute force");
  add_common(verify, verify_args, true);
  verify->add_option("--seed", seed, "Seed for sampled eta values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(validate_args);
    if (*search) return cmd_linesearch(search_args);
    if (*sweep) return cmd_sweep(sweep_args, range, steps);
    if (*opt) return cmd_optimize(optimize_args);
    if (*verify) return cmd_verify(verify_args, seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
