#pragma once

// Planar primitives over dual points. A primal line s(eta) = m * eta + b is
// represented by the dual point (m, -b); the upper envelope of a line set is
// the lower convex hull of its dual points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hullmert/error.hpp"

namespace hullmert {

class Point2 {
 public:
  constexpr Point2() = default;
  Point2(double x, double y) : x_(x), y_(y) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      std::ostringstream os;
      os << "non-finite point (" << x << ", " << y << ")";
      throw Error(ErrorCode::kInvalidGeometry, os.str());
    }
  }

  /// Slope of the primal line.
  double x() const noexcept { return x_; }
  /// Negated intercept of the primal line.
  double y() const noexcept { return y_; }

  static Point2 from_line(double slope, double intercept) { return {slope, -intercept}; }
  double slope() const noexcept { return x_; }
  double intercept() const noexcept { return -y_; }
  /// Value of the primal line at eta.
  double score_at(double eta) const noexcept { return x_ * eta - y_; }

  friend Point2 operator+(const Point2& a, const Point2& b) { return {a.x_ + b.x_, a.y_ + b.y_}; }
  friend Point2 operator-(const Point2& a, const Point2& b) { return {a.x_ - b.x_, a.y_ - b.y_}; }
  friend bool operator==(const Point2&, const Point2&) = default;
  friend bool lex_less(const Point2& a, const Point2& b) {
    return a.x_ < b.x_ || (a.x_ == b.x_ && a.y_ < b.y_);
  }

 private:
  double x_ = 0.0;
  double y_ = 0.0;
};

inline std::ostream& operator<<(std::ostream& os, const Point2& p) {
  return os << '(' << p.x() << ", " << p.y() << ')';
}

/// Ordered extreme points of a hull. Full hulls are counterclockwise starting
/// at the lexicographically smallest point; lower chains run left to right
/// with strictly increasing x. Both are strictly convex.
struct ConvexChain {
  std::vector<Point2> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  const Point2& operator[](std::size_t i) const { return points[i]; }
  friend bool operator==(const ConvexChain&, const ConvexChain&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ConvexChain& c) {
  os << '{';
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? ", " : "") << c[i];
  return os << '}';
}

namespace geom {

inline constexpr double kRelativeEpsilon = 1e-9;

/// Sign of the turn o -> a -> b: +1 counterclockwise, -1 clockwise, 0 when
/// the cross product is within kRelativeEpsilon of the magnitude of its two
/// terms. Integer-valued inputs below ~1e7 are decided exactly.
inline int orientation(const Point2& o, const Point2& a, const Point2& b) {
  const double lhs = (a.x() - o.x()) * (b.y() - o.y());
  const double rhs = (a.y() - o.y()) * (b.x() - o.x());
  const double cross = lhs - rhs;
  const double tol = kRelativeEpsilon * (std::abs(lhs) + std::abs(rhs));
  if (cross > tol) return 1;
  if (cross < -tol) return -1;
  return 0;
}

/// Same predicate for two free vectors.
inline int turn(double ux, double uy, double vx, double vy) {
  const double lhs = ux * vy;
  const double rhs = uy * vx;
  const double cross = lhs - rhs;
  const double tol = kRelativeEpsilon * (std::abs(lhs) + std::abs(rhs));
  if (cross > tol) return 1;
  if (cross < -tol) return -1;
  return 0;
}

// Indices of points sorted by (x, y), ties kept in input order.
inline std::vector<std::size_t> sorted_order(std::span<const Point2> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(points[a], points[b]);
  });
  return order;
}

}  // namespace geom

/// Indices (into `points`) of the strictly convex lower chain, left to right.
/// Among equal-x points only the lowest survives; among coincident points the
/// earliest in input order survives.
inline std::vector<std::size_t> lower_hull_indices(std::span<const Point2> points) {
  std::vector<std::size_t> order = geom::sorted_order(points);
  std::vector<std::size_t> chain;
  chain.reserve(order.size());
  for (std::size_t idx : order) {
    if (!chain.empty() && points[chain.back()].x() == points[idx].x()) continue;
    while (chain.size() >= 2 &&
           geom::orientation(points[chain[chain.size() - 2]], points[chain.back()], points[idx]) <= 0) {
      chain.pop_back();
    }
    chain.push_back(idx);
  }
  return chain;
}

/// Indices of all extreme points, counterclockwise from the lexicographically
/// smallest. Collinear boundary points are dropped; coincident points keep
/// the earliest in input order.
inline std::vector<std::size_t> full_hull_indices(std::span<const Point2> points) {
  std::vector<std::size_t> order = geom::sorted_order(points);
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return points[a] == points[b]; }),
              order.end());
  if (order.size() <= 1) return order;

  std::vector<std::size_t> hull;
  hull.reserve(order.size() + 1);
  for (std::size_t idx : order) {
    while (hull.size() >= 2 &&
           geom::orientation(points[hull[hull.size() - 2]], points[hull.back()], points[idx]) <= 0) {
      hull.pop_back();
    }
    hull.push_back(idx);
  }
  const std::size_t lower_size = hull.size();
  for (std::size_t k = order.size() - 1; k-- > 0;) {
    const std::size_t idx = order[k];
    while (hull.size() > lower_size &&
           geom::orientation(points[hull[hull.size() - 2]], points[hull.back()], points[idx]) <= 0) {
      hull.pop_back();
    }
    hull.push_back(idx);
  }
  hull.pop_back();  // the walk ends back at the start
  return hull;
}

namespace geom {

inline ConvexChain gather(std::span<const Point2> points, const std::vector<std::size_t>& indices) {
  ConvexChain out;
  out.points.reserve(indices.size());
  for (std::size_t i : indices) out.points.push_back(points[i]);
  return out;
}

}  // namespace geom

inline ConvexChain lower_hull(std::span<const Point2> points) {
  return geom::gather(points, lower_hull_indices(points));
}

inline ConvexChain full_hull(std::span<const Point2> points) {
  return geom::gather(points, full_hull_indices(points));
}

/// Prefix of a full hull that forms its lower chain: the counterclockwise walk
/// from the first point while x strictly increases.
inline std::size_t lower_chain_length(std::span<const Point2> full) {
  if (full.empty()) return 0;
  std::size_t n = 1;
  while (n < full.size() && full[n].x() > full[n - 1].x()) ++n;
  return n;
}

/// A vertex of a Minkowski sum together with the operand vertices it sums.
struct MinkowskiVertex {
  Point2 point;
  std::size_t left;
  std::size_t right;
};

/// Linear-time Minkowski sum of two full hulls (counterclockwise, starting at
/// the lexicographically smallest vertex). Edge vectors of both operands are
/// merged by polar angle; parallel edges are fused so the result stays
/// strictly convex. Each output vertex records the operand vertices it came
/// from. An empty operand yields an empty result.
inline std::vector<MinkowskiVertex> minkowski_vertices(std::span<const Point2> a,
                                                       std::span<const Point2> b) {
  std::vector<MinkowskiVertex> out;
  if (a.empty() || b.empty()) return out;
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  // A single point has no edges; a segment has two opposite ones.
  const std::size_t edges_a = na == 1 ? 0 : na;
  const std::size_t edges_b = nb == 1 ? 0 : nb;

  // Angles are measured over (-pi/2, 3pi/2], which is exactly the range
  // swept when walking counterclockwise from the lexicographic minimum.
  auto half = [](double dx, double dy) { return (dx > 0 || (dx == 0 && dy > 0)) ? 0 : 1; };
  // -1: edge of a comes first, +1: edge of b first, 0: parallel.
  auto compare = [&](std::size_t i, std::size_t j) {
    const Point2& a0 = a[i];
    const Point2& a1 = a[(i + 1) % na];
    const Point2& b0 = b[j];
    const Point2& b1 = b[(j + 1) % nb];
    const double ax = a1.x() - a0.x(), ay = a1.y() - a0.y();
    const double bx = b1.x() - b0.x(), by = b1.y() - b0.y();
    const int ha = half(ax, ay), hb = half(bx, by);
    if (ha != hb) return ha < hb ? -1 : 1;
    return -geom::turn(ax, ay, bx, by);
  };

  out.reserve(edges_a + edges_b);
  std::size_t i = 0, j = 0;
  out.push_back({a[0] + b[0], 0, 0});
  while (i < edges_a || j < edges_b) {
    int c;
    if (i == edges_a) c = 1;
    else if (j == edges_b) c = -1;
    else c = compare(i, j);
    if (c <= 0) ++i;
    if (c >= 0) ++j;
    if (i == edges_a && j == edges_b) break;  // back at the start
    out.push_back({a[i % na] + b[j % nb], i % na, j % nb});
  }
  return out;
}

inline ConvexChain minkowski_sum(const ConvexChain& a, const ConvexChain& b) {
  ConvexChain out;
  for (const auto& v : minkowski_vertices(a.points, b.points)) out.points.push_back(v.point);
  return out;
}

/// Breakpoints of the upper envelope dual to a lower chain: the slopes of the
/// chain's edges. Point i of the chain is the envelope line on the open
/// interval between breakpoints i-1 and i.
inline std::vector<double> envelope_boundaries(std::span<const Point2> lower_chain) {
  if (lower_chain.empty()) {
    throw Error(ErrorCode::kNoHypotheses, "envelope of an empty chain");
  }
  std::vector<double> etas;
  etas.reserve(lower_chain.size() - 1);
  for (std::size_t i = 0; i + 1 < lower_chain.size(); ++i) {
    const Point2& p = lower_chain[i];
    const Point2& q = lower_chain[i + 1];
    etas.push_back((q.y() - p.y()) / (q.x() - p.x()));
  }
  return etas;
}

inline std::vector<double> envelope_boundaries(const ConvexChain& lower_chain) {
  return envelope_boundaries(std::span<const Point2>(lower_chain.points));
}

}  // namespace hullmert
