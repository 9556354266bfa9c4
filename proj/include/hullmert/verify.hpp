#pragma once

// Oracle cross-checks over a loaded corpus, as run by `hullmert verify`.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hullmert/forest.hpp"
#include "hullmert/linesearch.hpp"
#include "hullmert/oracle.hpp"

namespace hullmert {

struct CheckResult {
  CheckResult() = default;
  explicit CheckResult(std::string n) : name(std::move(n)) {}

  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::size_t skipped = 0;
  std::string detail;  // first failure

  void fail(const std::string& why) {
    if (passed) detail = why;
    passed = false;
  }
};

inline bool close_rel(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::vector<CheckResult> verify_corpus(const Corpus& corpus, const SearchSpec& spec, const Metric& metric,
                                              const Scalarizer& loss, const LineSearchOptions& opts = {},
                                              std::uint64_t seed = 1) {
  CheckResult hull_vs_enum("goal hull equals hull of enumerated derivations");
  CheckResult size_bound("goal hull size within the per-operation bound");
  CheckResult tropical("tropical inside matches best goal-hull line");
  CheckResult sampled("envelope matches dense argmax sampling");
  CheckResult nbest("envelope over forest equals envelope over enumeration");
  CheckResult traced("reconstructed derivations project onto their points");
  CheckResult grid("exact line search is no worse than grid search");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eta_dist(oracle::kGridLo, oracle::kGridHi);
  bool enumerable = true;

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Hypergraph& g = corpus[i].forest;
    const std::string where = "sentence " + std::to_string(i) + ": ";
    const DualPointSet goal = goal_hull(g, spec.w0, spec.v);

    ++size_bound.cases;
    if (goal.size() > hull_size_bound(g))
      size_bound.fail(where + std::to_string(goal.size()) + " points > " + std::to_string(hull_size_bound(g)));

    ++traced.cases;
    for (std::size_t p = 0; p < goal.size(); ++p) {
      const Point2 back = reconstruct(g, goal, p).project(spec.w0, spec.v);
      if (!close_rel(back.x(), goal.point(p).x()) || !close_rel(back.y(), goal.point(p).y())) {
        traced.fail(where + "point " + std::to_string(p));
        break;
      }
    }

    ++tropical.cases;
    for (int s = 0; s < 100; ++s) {
      const double eta = eta_dist(rng);
      std::vector<double> w(spec.w0.size());
      for (std::size_t f = 0; f < w.size(); ++f) w[f] = spec.w0[f] + eta * spec.v[f];
      const double viterbi =
          inside<TropicalSemiring>(g, [&](EdgeId e) { return TropicalValue{dot(w, g.edge(e).features)}; }).score;
      if (!close_rel(viterbi, max_score_at(goal, eta))) {
        tropical.fail(where + "eta " + std::to_string(eta));
        break;
      }
    }

    std::vector<Derivation> all;
    try {
      all = enumerate(g, oracle::kMaxDerivations);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEnumerationOverflow) throw;
      ++hull_vs_enum.skipped;
      ++sampled.skipped;
      ++nbest.skipped;
      enumerable = false;
      continue;
    }

    ++hull_vs_enum.cases;
    std::vector<Point2> points;
    std::vector<oracle::Line> lines;
    for (const auto& d : all) {
      points.push_back(d.project(spec.w0, spec.v));
      lines.push_back({points.back().slope(), points.back().intercept()});
    }
    if (full_hull(points) != goal.chain()) hull_vs_enum.fail(where + "hulls differ");

    const Envelope env = envelope(g, spec);
    ++sampled.cases;
    for (const auto& sample : oracle::naive_envelope(lines, 1000)) {
      const std::size_t k = env.segment_at(sample.eta);
      const auto& seg = env.segments[k];
      if (std::abs(sample.eta - seg.lo) <= opts.merge_eps || std::abs(sample.eta - seg.hi) <= opts.merge_eps)
        continue;
      const auto& best = lines[sample.argmax];
      if (!close_rel(seg.score_at(sample.eta), best.slope * sample.eta + best.intercept)) {
        sampled.fail(where + "eta " + std::to_string(sample.eta));
        break;
      }
    }

    ++nbest.cases;
    const Envelope flat = envelope_of(all, spec);
    bool same = flat.size() == env.size();
    for (std::size_t k = 0; same && k < env.size(); ++k) {
      const auto& a = env.segments[k];
      const auto& b = flat.segments[k];
      same = a.derivation.yield == b.derivation.yield &&
             (k == 0 || std::abs(a.lo - b.lo) <= opts.merge_eps);
    }
    if (!same) nbest.fail(where + "segment structure differs");
  }

  if (enumerable) {
    const auto exact = line_search(corpus, spec, metric, loss, opts);
    const auto brute = oracle::grid_line_search(corpus, spec, metric, loss);
    ++grid.cases;
    if (exact.loss > brute.min_loss()) {
      std::ostringstream os;
      os << "exact loss " << exact.loss << " > grid minimum " << brute.min_loss();
      grid.fail(os.str());
    }
    if (exact.loss > exact.loss_at_zero) grid.fail("exact loss worse than loss at eta = 0");
  } else {
    ++grid.skipped;
  }

  return {hull_vs_enum, size_bound, tropical, sampled, nbest, traced, grid};
}

}  // namespace hullmert
