#pragma once

// Exact line search along w0 + eta * v: per-sentence upper envelopes from the
// goal hull, their piecewise-constant error surfaces, the corpus-level sum,
// and the choice of eta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hullmert/error.hpp"
#include "hullmert/forest.hpp"
#include "hullmert/geometry.hpp"
#include "hullmert/hull_semiring.hpp"
#include "hullmert/metrics.hpp"
#include "hullmert/parallel.hpp"

namespace hullmert {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultMergeEps = 1e-9;
inline constexpr double kDefaultUnboundedOffset = 0.1;

struct SearchSpec {
  std::vector<double> w0;
  std::vector<double> v;

  bool degenerate() const {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  }
};

struct Segment {
  double lo = -kInf;
  double hi = kInf;
  Derivation derivation;
  double slope = 0.0;
  double intercept = 0.0;

  double score_at(double eta) const { return slope * eta + intercept; }
};

/// Upper envelope: segments left to right whose intervals partition the line.
struct Envelope {
  std::vector<Segment> segments;

  std::size_t size() const noexcept { return segments.size(); }
  std::vector<double> boundaries() const {
    std::vector<double> b;
    for (std::size_t i = 1; i < segments.size(); ++i) b.push_back(segments[i].lo);
    return b;
  }
  /// Segment whose closed-right interval (lo, hi] holds eta.
  std::size_t segment_at(double eta) const {
    std::size_t i = 0;
    while (i + 1 < segments.size() && segments[i].hi < eta) ++i;
    return i;
  }
};

namespace detail {

// Builds segments from the lower chain of a set of dual points; `derive(i)`
// supplies the derivation behind chain point i.
template <class Derive>
Envelope envelope_from_chain(std::span<const Point2> chain, Derive&& derive) {
  const auto etas = envelope_boundaries(chain);
  Envelope env;
  env.segments.reserve(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    Segment s;
    s.lo = i == 0 ? -kInf : etas[i - 1];
    s.hi = i + 1 == chain.size() ? kInf : etas[i];
    s.derivation = derive(i);
    s.slope = chain[i].slope();
    s.intercept = chain[i].intercept();
    env.segments.push_back(std::move(s));
  }
  return env;
}

}  // namespace detail

/// Envelope of every derivation in g, computed by one inside pass in the
/// convex hull semiring. Only hypotheses that win somewhere are reconstructed.
inline Envelope envelope(const Hypergraph& g, const SearchSpec& spec) {
  const DualPointSet goal = goal_hull(g, spec.w0, spec.v);
  if (goal.empty()) throw Error(ErrorCode::kNoHypotheses, "forest has no derivation");
  const auto chain = goal.points().first(lower_chain_length(goal.points()));
  return detail::envelope_from_chain(chain, [&](std::size_t i) { return reconstruct(g, goal, i); });
}

/// Envelope of an explicit hypothesis list (the n-best route). Coincident
/// dual points keep the earliest hypothesis.
inline Envelope envelope_of(std::span<const Derivation> hypotheses, const SearchSpec& spec) {
  if (hypotheses.empty()) throw Error(ErrorCode::kNoHypotheses, "empty hypothesis list");
  std::vector<Point2> points;
  points.reserve(hypotheses.size());
  for (const auto& h : hypotheses) {
    if (h.features.size() != spec.w0.size() || h.features.size() != spec.v.size())
      throw Error(ErrorCode::kDimensionMismatch, "hypothesis feature dimension differs from weights");
    points.push_back(h.project(spec.w0, spec.v));
  }
  const auto idx = lower_hull_indices(points);
  std::vector<Point2> chain;
  for (std::size_t i : idx) chain.push_back(points[i]);
  return detail::envelope_from_chain(chain, [&](std::size_t i) { return hypotheses[idx[i]]; });
}

/// Piecewise-constant error counts: counts[k] holds on the interval between
/// boundaries[k-1] and boundaries[k] (closed on the right).
struct ErrorSurface {
  std::vector<double> boundaries;
  std::vector<ErrorCount> counts;

  std::size_t interval_at(double eta) const {
    return static_cast<std::size_t>(std::lower_bound(boundaries.begin(), boundaries.end(), eta) -
                                    boundaries.begin());
  }
  const ErrorCount& count_at(double eta) const { return counts.at(interval_at(eta)); }
};

/// One error count per envelope segment; the metric runs once per surviving
/// hypothesis. Equal neighbouring counts are kept as separate intervals.
inline ErrorSurface sentence_surface(const Envelope& env, std::span<const std::string> gold, const Metric& metric) {
  ErrorSurface s;
  s.boundaries = env.boundaries();
  s.counts.reserve(env.size());
  for (const auto& seg : env.segments) s.counts.push_back(metric.delta(seg.derivation.yield, gold));
  return s;
}

/// Sum of sentence surfaces over the common refinement of their boundaries.
/// Boundaries closer than merge_eps to the first boundary of their cluster
/// are coalesced into it.
inline ErrorSurface corpus_surface(std::span<const ErrorSurface> surfaces, double merge_eps = kDefaultMergeEps) {
  if (surfaces.empty()) throw Error(ErrorCode::kUsage, "no error surfaces to merge");
  const std::size_t dim = surfaces.front().counts.at(0).dim();
  std::vector<double> all;
  for (const auto& s : surfaces) {
    if (s.counts.size() != s.boundaries.size() + 1)
      throw Error(ErrorCode::kInvariantViolation, "surface has mismatched boundary and count lengths");
    for (const auto& c : s.counts)
      if (c.dim() != dim) throw Error(ErrorCode::kDimensionMismatch, "surfaces use different metrics");
    all.insert(all.end(), s.boundaries.begin(), s.boundaries.end());
  }
  std::sort(all.begin(), all.end());

  ErrorSurface out;
  for (double b : all)
    if (out.boundaries.empty() || b - out.boundaries.back() > merge_eps) out.boundaries.push_back(b);

  const std::size_t intervals = out.boundaries.size() + 1;
  out.counts.assign(intervals, ErrorCount(dim));
  for (const auto& s : surfaces) {
    // Refined boundary index of each of this surface's boundaries.
    std::vector<std::size_t> cluster;
    cluster.reserve(s.boundaries.size());
    for (double b : s.boundaries) {
      auto it = std::upper_bound(out.boundaries.begin(), out.boundaries.end(), b);
      cluster.push_back(static_cast<std::size_t>(it - out.boundaries.begin()) - 1);
    }
    std::size_t passed = 0;
    for (std::size_t k = 0; k < intervals; ++k) {
      while (passed < cluster.size() && cluster[passed] < k) ++passed;
      out.counts[k] += s.counts[passed];
    }
  }
  return out;
}

enum class SegmentSelection { kMidpoint };

struct SelectionOptions {
  double unbounded_offset = kDefaultUnboundedOffset;
  SegmentSelection strategy = SegmentSelection::kMidpoint;
};

struct EtaChoice {
  double eta = 0.0;
  double loss = 0.0;
  std::size_t interval = 0;
  std::vector<double> losses;  // one per surface interval
};

/// Scans the surface left to right and returns the midpoint of the interval
/// with the lowest loss. Unbounded intervals use their finite end moved out
/// by the offset. Ties prefer the interval holding eta = 0, then the
/// leftmost one.
inline EtaChoice pick_eta(const ErrorSurface& surface, const Scalarizer& loss, const SelectionOptions& opts = {}) {
  if (surface.counts.empty()) throw Error(ErrorCode::kNoHypotheses, "empty error surface");
  EtaChoice choice;
  choice.losses.reserve(surface.counts.size());
  for (const auto& c : surface.counts) choice.losses.push_back(loss(c));

  const double best = *std::min_element(choice.losses.begin(), choice.losses.end());
  const std::size_t at_zero = surface.interval_at(0.0);
  std::size_t k = 0;
  if (choice.losses[at_zero] == best) {
    k = at_zero;
  } else {
    while (choice.losses[k] != best) ++k;
  }
  choice.interval = k;
  choice.loss = best;

  const auto& b = surface.boundaries;
  switch (opts.strategy) {
    case SegmentSelection::kMidpoint:
      if (b.empty()) choice.eta = 0.0;
      else if (k == 0) choice.eta = b.front() - opts.unbounded_offset;
      else if (k == b.size()) choice.eta = b.back() + opts.unbounded_offset;
      else choice.eta = 0.5 * (b[k - 1] + b[k]);
      break;
  }
  return choice;
}

struct SentencePair {
  Hypergraph forest;
  Tokens reference;
};

using Corpus = std::vector<SentencePair>;

struct LineSearchOptions {
  double merge_eps = kDefaultMergeEps;
  SelectionOptions selection;
  std::size_t threads = 1;
};

struct LineSearchResult {
  std::vector<double> weights;  // w0 + eta * v
  double eta = 0.0;
  double loss = 0.0;
  double loss_at_zero = 0.0;
  std::vector<Envelope> envelopes;
  std::vector<ErrorSurface> sentence_surfaces;
  ErrorSurface corpus;
  std::vector<double> corpus_losses;
  std::vector<std::string> warnings;
};

inline LineSearchResult line_search(const Corpus& corpus, const SearchSpec& spec, const Metric& metric,
                                    const Scalarizer& loss, const LineSearchOptions& opts = {}) {
  if (corpus.empty()) throw Error(ErrorCode::kUsage, "empty corpus");
  if (spec.w0.size() != spec.v.size())
    throw Error(ErrorCode::kDimensionMismatch, "w0 and v differ in dimension");

  LineSearchResult r;
  if (spec.degenerate()) r.warnings.push_back("degenerate search direction (v = 0)");
  r.envelopes.resize(corpus.size());
  r.sentence_surfaces.resize(corpus.size());
  parallel_for(corpus.size(), opts.threads, [&](std::size_t i) {
    try {
      r.envelopes[i] = envelope(corpus[i].forest, spec);
      r.sentence_surfaces[i] = sentence_surface(r.envelopes[i], corpus[i].reference, metric);
    } catch (const Error& e) {
      throw Error(e.code(), "sentence " + std::to_string(i) + ": " + e.what());
    }
  });
  r.corpus = corpus_surface(r.sentence_surfaces, opts.merge_eps);
  const EtaChoice choice = pick_eta(r.corpus, loss, opts.selection);
  r.eta = choice.eta;
  r.loss = choice.loss;
  r.corpus_losses = choice.losses;
  r.loss_at_zero = choice.losses[r.corpus.interval_at(0.0)];
  r.weights = spec.w0;
  for (std::size_t f = 0; f < r.weights.size(); ++f) r.weights[f] += r.eta * spec.v[f];
  return r;
}

/// Corpus loss of the 1-best hypotheses under weights w.
inline double corpus_loss(const Corpus& corpus, std::span<const double> w, const Metric& metric,
                          const Scalarizer& loss, std::size_t threads = 1) {
  if (corpus.empty()) throw Error(ErrorCode::kUsage, "empty corpus");
  const SearchSpec spec{{w.begin(), w.end()}, std::vector<double>(w.size(), 0.0)};
  std::vector<ErrorCount> counts(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const Envelope env = envelope(corpus[i].forest, spec);
    counts[i] = metric.delta(env.segments.front().derivation.yield, corpus[i].reference);
  });
  ErrorCount total(metric.dim);
  for (const auto& c : counts) total += c;
  return loss(total);
}

struct OptimizeStep {
  std::size_t sweep = 0;
  std::size_t direction = 0;
  double eta = 0.0;
  double loss = 0.0;  // corpus loss after this step
  bool accepted = false;
};

struct OptimizeResult {
  std::vector<double> weights;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t sweeps = 0;
  std::vector<OptimizeStep> trace;
};

/// Repeated line searches over a list of directions (coordinate axes when
/// `directions` is empty). A step is kept only if it strictly lowers the
/// corpus loss. Stops after `max_sweeps` sweeps or after a sweep without
/// improvement.
inline OptimizeResult optimize(const Corpus& corpus, std::vector<double> w0,
                               std::span<const std::vector<double>> directions, std::size_t max_sweeps,
                               const Metric& metric, const Scalarizer& loss, const LineSearchOptions& opts = {}) {
  std::vector<std::vector<double>> axes;
  if (directions.empty()) {
    for (std::size_t f = 0; f < w0.size(); ++f) {
      axes.emplace_back(w0.size(), 0.0);
      axes.back()[f] = 1.0;
    }
    directions = axes;
  }
  OptimizeResult r;
  r.weights = std::move(w0);
  r.initial_loss = corpus_loss(corpus, r.weights, metric, loss, opts.threads);
  double current = r.initial_loss;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    ++r.sweeps;
    bool improved = false;
    for (std::size_t d = 0; d < directions.size(); ++d) {
      const auto step = line_search(corpus, {r.weights, directions[d]}, metric, loss, opts);
      OptimizeStep s{sweep, d, step.eta, current, false};
      if (step.loss < current) {
        r.weights = step.weights;
        current = step.loss;
        s.loss = current;
        s.accepted = true;
        improved = true;
      }
      r.trace.push_back(s);
    }
    if (!improved) break;
  }
  r.final_loss = current;
  return r;
}

}  // namespace hullmert
