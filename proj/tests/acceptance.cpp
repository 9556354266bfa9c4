// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
//   acceptance            run all criteria
//   acceptance 3 7        run only criteria 3 and 7

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hullmert/hullmert.hpp"
#include "support/random_instances.hpp"

namespace {

using namespace hullmert;
using testing::Rng;

struct Outcome {
  bool pass = true;
  std::string detail;
};

constexpr double kRelTol = 1e-9;
constexpr double kMergeEps = kDefaultMergeEps;

bool close_rel(double a, double b) { return std::abs(a - b) <= kRelTol * std::max({1.0, std::abs(a), std::abs(b)}); }

std::string str(double x) {
  std::ostringstream ss;
  ss << x;
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Forests with between `lo` and `hi` derivations; small ones are skipped so
// the oracle comparisons see non-trivial envelopes.
Hypergraph sized_forest(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  testing::ForestShape shape;
  shape.max_nodes = 10;
  shape.max_in_edges = 4;
  shape.feature_range = 20;
  while (true) {
    Hypergraph g = testing::random_enumerable_forest(rng, hi, shape);
    if (count_derivations(g) >= lo) return g;
  }
}

Outcome semiring_axioms() {
  Rng rng(101);
  std::vector<DualPointSet> sample{DualPointSet::zero(), DualPointSet::one()};
  for (int i = 0; i < 8; ++i) sample.push_back(testing::random_hull(rng, 6));
  const auto t0 = std::chrono::steady_clock::now();
  const AxiomReport r = check_axioms<HullSemiring>(sample);
  const double secs = seconds_since(t0);
  std::size_t failures = 0;
  for (std::size_t l = 0; l < static_cast<std::size_t>(Law::kCount); ++l) failures += r[static_cast<Law>(l)].failures;
  Outcome o;
  o.pass = r.triples >= 500 && failures == 0 && secs < 10.0;
  o.detail = std::to_string(r.triples) + " triples, " + std::to_string(failures) + " counterexamples, " + str(secs) +
             " s";
  if (!r.ok()) o.detail += ", first failing law " + std::string(to_string(r.first_failure()));
  return o;
}

Outcome total_hull_bound() {
  Rng rng(103);
  const int forests = 200;
  int over_edges = 0, over_derived = 0;
  std::size_t worst = 0, worst_edges = 0;
  for (int i = 0; i < forests; ++i) {
    const Hypergraph g = testing::random_enumerable_forest(rng, std::numeric_limits<std::uint64_t>::max());
    const auto goal = goal_hull(g, testing::random_weights(rng, g.dim()), testing::random_weights(rng, g.dim()));
    if (goal.size() > g.num_edges()) {
      ++over_edges;
      if (goal.size() - g.num_edges() > worst - worst_edges || worst == 0) {
        worst = goal.size();
        worst_edges = g.num_edges();
      }
    }
    if (goal.size() > hull_size_bound(g)) ++over_derived;
  }
  Outcome o;
  o.pass = over_edges == 0;
  o.detail = std::to_string(forests) + " forests, " + std::to_string(over_edges) + " with |goal| > |E|";
  if (over_edges) o.detail += " (e.g. " + std::to_string(worst) + " > " + std::to_string(worst_edges) + ")";
  o.detail += ", " + std::to_string(over_derived) + " over the per-operation bound";
  return o;
}

Outcome convexify() {
  Rng rng(104);
  int failures = 0;
  const int pairs = 500;
  for (int i = 0; i < pairs; ++i) {
    const auto a = testing::random_points(rng, static_cast<std::size_t>(rng.uniform(1, 12)));
    const auto b = testing::random_points(rng, static_cast<std::size_t>(rng.uniform(1, 12)));
    if (!convexify_equivalence(a, b)) ++failures;
  }
  return {failures == 0, std::to_string(pairs) + " pairs, " + std::to_string(failures) + " mismatches"};
}

Outcome oracle_equivalence() {
  Rng rng(105);
  int mismatches = 0;
  const int forests = 200;
  for (int i = 0; i < forests; ++i) {
    const Hypergraph g = sized_forest(rng, 50, 1000);
    const auto w0 = testing::random_weights(rng, g.dim());
    const auto v = testing::random_weights(rng, g.dim());
    std::vector<Point2> pts;
    for (const auto& d : enumerate(g, 1000)) pts.push_back(d.project(w0, v));
    if (goal_hull(g, w0, v).chain() != full_hull(pts)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(forests) + " forests, " + std::to_string(mismatches) + " mismatches"};
}

Outcome tropical_consistency() {
  Rng rng(106);
  int mismatches = 0, checks = 0;
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Hypergraph g = testing::random_enumerable_forest(rng, 100000);
    const auto w0 = testing::random_weights(rng, g.dim());
    const auto v = testing::random_weights(rng, g.dim());
    const auto goal = goal_hull(g, w0, v);
    std::vector<double> w(g.dim());
    for (int k = 0; k < 100; ++k) {
      const double eta = rng.real(-10, 10);
      for (std::size_t f = 0; f < w.size(); ++f) w[f] = w0[f] + eta * v[f];
      const double trop =
          inside<TropicalSemiring>(g, [&](EdgeId e) { return TropicalValue{dot(w, g.edge(e).features)}; }).score;
      const double hull = max_score_at(goal, eta);
      ++checks;
      worst = std::max(worst, std::abs(trop - hull) / std::max(1.0, std::abs(trop)));
      if (!close_rel(trop, hull)) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(checks) + " (forest, eta) pairs, " + std::to_string(mismatches) +
                               " mismatches, worst relative gap " + str(worst)};
}

Outcome envelope_correctness() {
  Rng rng(107);
  int mismatches = 0, checked = 0, excluded = 0;
  for (int i = 0; i < 100; ++i) {
    const Hypergraph g = sized_forest(rng, 50, 1000);
    const SearchSpec spec{testing::random_weights(rng, g.dim()), testing::random_direction(rng, g.dim())};
    const Envelope env = envelope(g, spec);
    const auto all = enumerate(g, 1000);
    std::vector<oracle::Line> lines;
    for (const auto& d : all) {
      const Point2 p = d.project(spec.w0, spec.v);
      lines.push_back({p.slope(), p.intercept()});
    }
    const auto bounds = env.boundaries();
    for (const auto& s : oracle::naive_envelope(lines, 1000)) {
      const bool adjacent =
          std::any_of(bounds.begin(), bounds.end(), [&](double b) { return std::abs(b - s.eta) <= 1e-6; });
      if (adjacent) {
        ++excluded;
        continue;
      }
      ++checked;
      const Segment& seg = env.segments[env.segment_at(s.eta)];
      const auto& best = lines[s.argmax];
      const double best_score = best.slope * s.eta + best.intercept;
      bool ok = close_rel(seg.score_at(s.eta), best_score);
      // Where the sampled argmax line is unique, the derivation must match too.
      int at_top = 0;
      for (const auto& l : lines) at_top += close_rel(l.slope * s.eta + l.intercept, best_score) ? 1 : 0;
      if (ok && at_top == 1 && seg.derivation.tree != all[s.argmax].tree) ok = false;
      if (!ok) ++mismatches;
    }
  }
  return {mismatches == 0, "100 instances, " + std::to_string(checked) + " samples (" + std::to_string(excluded) +
                               " boundary-adjacent excluded), " + std::to_string(mismatches) + " mismatches"};
}

Outcome exact_search_optimality() {
  Rng rng(108);
  int worse_than_grid = 0, worse_than_zero = 0;
  const int corpora = 50;
  for (int i = 0; i < corpora; ++i) {
    const Corpus corpus = testing::random_corpus(rng, static_cast<std::size_t>(rng.uniform(1, 5)), 200);
    const std::size_t dim = corpus[0].forest.dim();
    const SearchSpec spec{testing::random_weights(rng, dim), testing::random_direction(rng, dim)};
    const Metric metric = i % 2 ? exact_match_metric() : bleu_metric();
    const auto exact = line_search(corpus, spec, metric, metric.loss);
    const auto grid = oracle::grid_line_search(corpus, spec, metric, metric.loss);
    if (exact.loss > grid.min_loss()) ++worse_than_grid;
    if (exact.loss > exact.loss_at_zero) ++worse_than_zero;
  }
  return {worse_than_grid == 0 && worse_than_zero == 0,
          std::to_string(corpora) + " corpora, " + std::to_string(worse_than_grid) + " above grid minimum, " +
              std::to_string(worse_than_zero) + " above loss at eta=0"};
}

Outcome nbest_agreement() {
  Rng rng(109);
  int mismatches = 0;
  const int forests = 100;
  for (int i = 0; i < forests; ++i) {
    const Hypergraph g = sized_forest(rng, 50, 1000);
    const SearchSpec spec{testing::random_weights(rng, g.dim()), testing::random_direction(rng, g.dim())};
    const Envelope dp = envelope(g, spec);
    const Envelope nb = envelope_of(enumerate(g, 1000), spec);
    bool same = dp.size() == nb.size();
    for (std::size_t k = 0; same && k < dp.size(); ++k) {
      const auto& a = dp.segments[k];
      const auto& b = nb.segments[k];
      auto near = [](double x, double y) { return x == y || std::abs(x - y) <= kMergeEps; };
      same = near(a.lo, b.lo) && near(a.hi, b.hi) && a.derivation.yield == b.derivation.yield;
    }
    if (!same) ++mismatches;
  }
  return {mismatches == 0, std::to_string(forests) + " forests, " + std::to_string(mismatches) + " mismatches"};
}

// Per-call time of goal_hull on a lattice, best of several timed batches.
double time_goal_hull(const Hypergraph& g, const std::vector<double>& w0, const std::vector<double>& v) {
  std::size_t reps = 1;
  while (true) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reps; ++r) goal_hull(g, w0, v);
    if (seconds_since(t0) > 0.02 || reps >= (1u << 20)) break;
    reps *= 2;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int batch = 0; batch < 5; ++batch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reps; ++r) goal_hull(g, w0, v);
    best = std::min(best, seconds_since(t0) / static_cast<double>(reps));
  }
  return best;
}

Outcome runtime_scaling() {
  Rng rng(110);
  std::vector<double> times;
  std::string detail;
  for (std::size_t edges : {100u, 1000u, 10000u}) {
    const Hypergraph g = testing::random_lattice(rng, edges);
    const auto w0 = testing::random_weights(rng, g.dim());
    const auto v = testing::random_direction(rng, g.dim());
    times.push_back(time_goal_hull(g, w0, v));
    // Inside work is the sum of operand sizes, so report the hull sizes too.
    const auto values = inside_values<HullSemiring>(g, [&](EdgeId e) { return project_edge(g, e, w0, v); });
    std::size_t total = 0;
    for (const auto& h : values) total += h.size();
    detail += (detail.empty() ? "" : ", ") + std::string("|E|=") + std::to_string(edges) + ": " +
              str(times.back() * 1e3) + " ms (mean node hull " +
              str(static_cast<double>(total) / static_cast<double>(values.size())) + ")";
  }
  bool pass = true;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double ratio = times[k] / times[k - 1];
    pass = pass && ratio <= 20.0;
    detail += ", ratio " + str(ratio);
  }
  return {pass, detail};
}

struct Shell {
  int status = -1;
  std::string out;
};

Shell shell(const std::string& cmd) {
  Shell r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

Outcome golden_pipeline() {
  const std::string dir = HULLMERT_FIXTURES;
  std::ifstream in(dir + "/golden_linesearch.json");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string golden = ss.str();
  if (golden.empty()) return {false, "golden report missing"};
  const std::string base = std::string(HULLMERT_CLI) + " linesearch " + dir + "/toy_corpus.jsonl --config " + dir +
                           "/toy_config.json 2>/dev/null --threads ";
  std::string detail;
  bool pass = true;
  for (int threads : {1, 2, 3, 4, 8}) {
    const Shell r = shell(base + std::to_string(threads));
    const bool same = r.status == 0 && r.out == golden;
    pass = pass && same;
    detail += (detail.empty() ? "" : ", ") + std::string("threads ") + std::to_string(threads) +
              (same ? " identical" : " differs");
  }
  return {pass, detail};
}

// Criterion 2 reads the process-wide counters, so it runs last and tops the
// count up with random operations if the other criteria were skipped.
Outcome size_bounds() {
  Rng rng(102);
  std::uint64_t thrown = 0;
  std::vector<DualPointSet> pool;
  for (int i = 0; i < 64; ++i) pool.push_back(testing::random_hull(rng, 6));
  while (size_bound_stats().operations < 100000) {
    const auto& a = pool[static_cast<std::size_t>(rng.uniform(0, 63))];
    const auto& b = pool[static_cast<std::size_t>(rng.uniform(0, 63))];
    try {
      if (rng.coin()) hull_plus(a, b);
      else hull_times(a, b);
    } catch (const Error&) {
      ++thrown;
    }
  }
  const auto stats = size_bound_stats();
  return {stats.operations >= 100000 && stats.violations == 0 && thrown == 0,
          std::to_string(stats.operations) + " operations, " + std::to_string(stats.violations) + " violations"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "semiring axioms", semiring_axioms},
      {3, "total hull bound |goal| <= |E|", total_hull_bound},
      {4, "convexification identity", convexify},
      {5, "goal hull equals hull of enumeration", oracle_equivalence},
      {6, "tropical consistency", tropical_consistency},
      {7, "envelope matches dense sampling", envelope_correctness},
      {8, "exact search optimality", exact_search_optimality},
      {9, "n-best and forest envelopes agree", nbest_agreement},
      {10, "runtime scaling on lattices", runtime_scaling},
      {11, "golden linesearch report", golden_pipeline},
      {2, "size bounds on every plus/times", size_bounds},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2d  %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
