#pragma once

// Brute-force references for the fast path. Nothing here is used by the line
// search itself; tests and the `verify` command compare against it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hullmert/error.hpp"
#include "hullmert/forest.hpp"
#include "hullmert/geometry.hpp"
#include "hullmert/linesearch.hpp"
#include "hullmert/metrics.hpp"
#include "hullmert/semiring.hpp"

namespace hullmert::oracle {

inline constexpr std::size_t kMaxPairSums = 10000;
inline constexpr std::size_t kMaxDerivations = 10000;
inline constexpr std::size_t kGridPoints = 2001;
inline constexpr double kGridLo = -10.0;
inline constexpr double kGridHi = 10.0;

/// Hull of every pairwise sum, taken literally from the definition.
inline ConvexChain naive_minkowski(std::span<const Point2> a, std::span<const Point2> b,
                                   std::size_t cap = kMaxPairSums) {
  if (a.size() * b.size() > cap) {
    throw Error(ErrorCode::kCapExceeded, std::to_string(a.size() * b.size()) + " pair sums exceed the cap");
  }
  std::vector<Point2> sums;
  sums.reserve(a.size() * b.size());
  for (const Point2& p : a)
    for (const Point2& q : b) sums.emplace_back(p.x() + q.x(), p.y() + q.y());
  return full_hull(sums);
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

struct EnvelopeSample {
  double eta = 0.0;
  std::size_t argmax = 0;  // index of the best line; first one on exact ties
};

inline std::vector<double> grid(double lo, double hi, std::size_t points) {
  std::vector<double> etas;
  etas.reserve(points);
  if (points == 1) {
    etas.push_back(lo);
    return etas;
  }
  for (std::size_t i = 0; i < points; ++i)
    etas.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  return etas;
}

/// Best line at each of `samples` evenly spaced eta values in [lo, hi].
inline std::vector<EnvelopeSample> naive_envelope(std::span<const Line> lines, std::size_t samples,
                                                  double lo = kGridLo, double hi = kGridHi) {
  if (lines.empty()) throw Error(ErrorCode::kNoHypotheses, "no lines");
  std::vector<EnvelopeSample> out;
  for (double eta : grid(lo, hi, samples)) {
    std::size_t best = 0;
    double best_score = lines[0].slope * eta + lines[0].intercept;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const double s = lines[i].slope * eta + lines[i].intercept;
      if (s > best_score) {
        best = i;
        best_score = s;
      }
    }
    out.push_back({eta, best});
  }
  return out;
}

struct GridSearchResult {
  std::vector<double> etas;
  std::vector<double> losses;
  std::size_t best = 0;  // first grid index attaining the minimum
  double min_loss() const { return losses.at(best); }
  double best_eta() const { return etas.at(best); }
};

/// Decodes every sentence at each grid eta by scoring all enumerated
/// derivations under w0 + eta * v, then scores the corpus. The winning score
/// is cross-checked against a tropical inside pass. Near-ties (scores within
/// 1e-9 relative) go to the steepest line, i.e. the hypothesis that wins
/// just right of eta, then to the earliest derivation.
inline GridSearchResult grid_line_search(const Corpus& corpus, const SearchSpec& spec, const Metric& metric,
                                         const Scalarizer& loss, std::span<const double> etas,
                                         std::size_t cap = kMaxDerivations) {
  struct Hyp {
    std::vector<double> features;
    double slope;
    ErrorCount delta;
  };
  std::vector<std::vector<Hyp>> hyps(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (auto& d : enumerate(corpus[i].forest, cap)) {
      double slope = 0.0;
      for (std::size_t f = 0; f < d.features.size(); ++f) slope += spec.v[f] * d.features[f];
      ErrorCount delta = metric.delta(d.yield, corpus[i].reference);
      hyps[i].push_back({std::move(d.features), slope, std::move(delta)});
    }
    if (hyps[i].empty()) throw Error(ErrorCode::kNoHypotheses, "sentence " + std::to_string(i));
  }

  GridSearchResult r;
  r.etas.assign(etas.begin(), etas.end());
  std::vector<double> w(spec.w0.size());
  for (double eta : etas) {
    for (std::size_t f = 0; f < w.size(); ++f) w[f] = spec.w0[f] + eta * spec.v[f];
    ErrorCount total(metric.dim);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      std::vector<double> scores;
      scores.reserve(hyps[i].size());
      for (const auto& h : hyps[i]) {
        double s = 0.0;
        for (std::size_t f = 0; f < w.size(); ++f) s += w[f] * h.features[f];
        scores.push_back(s);
      }
      const double top = *std::max_element(scores.begin(), scores.end());
      const double tol = 1e-9 * std::max(1.0, std::abs(top));
      std::size_t pick = hyps[i].size();
      for (std::size_t j = 0; j < hyps[i].size(); ++j) {
        if (scores[j] < top - tol) continue;
        if (pick == hyps[i].size() || hyps[i][j].slope > hyps[i][pick].slope) pick = j;
      }

      const double viterbi = inside<TropicalSemiring>(corpus[i].forest, [&](EdgeId e) {
                               return TropicalValue{dot(w, corpus[i].forest.edge(e).features)};
                             }).score;
      if (std::abs(viterbi - top) > tol) {
        throw Error(ErrorCode::kInvariantViolation,
                    "tropical inside disagrees with enumeration at eta " + std::to_string(eta));
      }
      total += hyps[i][pick].delta;
    }
    r.losses.push_back(loss(total));
  }
  r.best = static_cast<std::size_t>(std::min_element(r.losses.begin(), r.losses.end()) - r.losses.begin());
  return r;
}

inline GridSearchResult grid_line_search(const Corpus& corpus, const SearchSpec& spec, const Metric& metric,
                                         const Scalarizer& loss) {
  const auto etas = grid(kGridLo, kGridHi, kGridPoints);
  return grid_line_search(corpus, spec, metric, loss, etas);
}

}  // namespace hullmert::oracle
