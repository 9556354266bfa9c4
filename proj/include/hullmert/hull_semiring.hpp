#pragma once

// The convex hull semiring: values are the extreme points of a planar convex
// hull, plus is the hull of the union, times is the hull of the Minkowski sum.
// Every point carries a provenance record so the derivation behind a goal
// point can be recovered after the inside pass.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "hullmert/error.hpp"
#include "hullmert/geometry.hpp"
#include "hullmert/semiring.hpp"

namespace hullmert {

using EdgeId = std::uint32_t;
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

/// Backpointer for one hull point. Records form an immutable DAG shared
/// between semiring values; following them always terminates at kOne or
/// kLeaf records.
struct Provenance {
  enum class Kind : std::uint8_t { kOne, kLeaf, kTimes, kPlus };
  enum class Side : std::uint8_t { kLeft, kRight };

  Kind kind = Kind::kOne;
  EdgeId edge = kNoEdge;      // kLeaf
  Side side = Side::kLeft;    // kPlus: operand the point survived from
  std::size_t index = 0;      // kPlus: its index within that operand
  std::shared_ptr<const Provenance> left;   // kTimes left factor, kPlus source
  std::shared_ptr<const Provenance> right;  // kTimes right factor
};

using ProvenancePtr = std::shared_ptr<const Provenance>;

namespace detail {

inline ProvenancePtr one_provenance() {
  static const ProvenancePtr one = std::make_shared<const Provenance>();
  return one;
}

struct SizeBoundCounters {
  std::atomic<std::uint64_t> operations{0};
  std::atomic<std::uint64_t> violations{0};
};

inline SizeBoundCounters& size_bound_counters() {
  static SizeBoundCounters counters;
  return counters;
}

}  // namespace detail

struct SizeBoundStats {
  std::uint64_t operations = 0;
  std::uint64_t violations = 0;
};

/// Number of plus/times calls made so far in this process and how many of
/// them exceeded |a| + |b| (each violation also throws).
inline SizeBoundStats size_bound_stats() {
  auto& c = detail::size_bound_counters();
  return {c.operations.load(), c.violations.load()};
}

class DualPointSet {
 public:
  DualPointSet() = default;

  static DualPointSet zero() { return {}; }
  static DualPointSet one() {
    DualPointSet s;
    s.points_.push_back(Point2{});
    s.provenance_.push_back(detail::one_provenance());
    return s;
  }
  static DualPointSet leaf(Point2 p, EdgeId edge) {
    DualPointSet s;
    s.points_.push_back(p);
    auto prov = std::make_shared<Provenance>();
    prov->kind = Provenance::Kind::kLeaf;
    prov->edge = edge;
    s.provenance_.push_back(std::move(prov));
    return s;
  }
  /// Canonicalizes an arbitrary point set (all points get trivial provenance).
  static DualPointSet hull_of(std::span<const Point2> points) {
    DualPointSet s;
    for (std::size_t i : full_hull_indices(points)) {
      s.points_.push_back(points[i]);
      s.provenance_.push_back(detail::one_provenance());
    }
    return s;
  }
  /// Wraps points as-is without canonicalization. Only meant for building
  /// negative controls in tests; semiring results on such values are not
  /// meaningful.
  static DualPointSet unchecked(std::vector<Point2> points) {
    DualPointSet s;
    s.provenance_.assign(points.size(), detail::one_provenance());
    s.points_ = std::move(points);
    return s;
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  std::span<const Point2> points() const noexcept { return points_; }
  const Point2& point(std::size_t i) const { return points_[i]; }
  const ProvenancePtr& provenance(std::size_t i) const { return provenance_[i]; }
  ConvexChain chain() const { return {points_}; }

  /// Equality is on the point sets; provenance is not compared.
  friend bool operator==(const DualPointSet& a, const DualPointSet& b) {
    return a.points_ == b.points_;
  }

 private:
  friend DualPointSet hull_plus(const DualPointSet&, const DualPointSet&);
  friend DualPointSet hull_times(const DualPointSet&, const DualPointSet&);

  std::vector<Point2> points_;
  std::vector<ProvenancePtr> provenance_;
};

namespace detail {

inline void check_size_bound(const char* op, std::size_t result, std::size_t a, std::size_t b) {
  auto& c = size_bound_counters();
  c.operations.fetch_add(1, std::memory_order_relaxed);
  if (result > a + b) {
    c.violations.fetch_add(1, std::memory_order_relaxed);
    std::ostringstream os;
    os << op << " produced " << result << " points from operands of size " << a << " and " << b;
    throw Error(ErrorCode::kInvariantViolation, os.str());
  }
}

}  // namespace detail

/// conv[A u B]. Coincident points keep the left operand's copy.
inline DualPointSet hull_plus(const DualPointSet& a, const DualPointSet& b) {
  std::vector<Point2> all;
  all.reserve(a.size() + b.size());
  all.insert(all.end(), a.points_.begin(), a.points_.end());
  all.insert(all.end(), b.points_.begin(), b.points_.end());

  DualPointSet out;
  const auto kept = full_hull_indices(all);
  out.points_.reserve(kept.size());
  out.provenance_.reserve(kept.size());
  for (std::size_t idx : kept) {
    const bool from_left = idx < a.size();
    const std::size_t local = from_left ? idx : idx - a.size();
    auto prov = std::make_shared<Provenance>();
    prov->kind = Provenance::Kind::kPlus;
    prov->side = from_left ? Provenance::Side::kLeft : Provenance::Side::kRight;
    prov->index = local;
    prov->left = from_left ? a.provenance_[local] : b.provenance_[local];
    out.points_.push_back(all[idx]);
    out.provenance_.push_back(std::move(prov));
  }
  detail::check_size_bound("plus", out.size(), a.size(), b.size());
  return out;
}

/// conv of the Minkowski sum, by the linear-time edge merge.
inline DualPointSet hull_times(const DualPointSet& a, const DualPointSet& b) {
  DualPointSet out;
  const auto verts = minkowski_vertices(a.points_, b.points_);
  out.points_.reserve(verts.size());
  out.provenance_.reserve(verts.size());
  for (const auto& v : verts) {
    auto prov = std::make_shared<Provenance>();
    prov->kind = Provenance::Kind::kTimes;
    prov->left = a.provenance_[v.left];
    prov->right = b.provenance_[v.right];
    out.points_.push_back(v.point);
    out.provenance_.push_back(std::move(prov));
  }
  detail::check_size_bound("times", out.size(), a.size(), b.size());
  return out;
}

struct HullSemiring {
  using value_type = DualPointSet;
  static value_type zero() { return DualPointSet::zero(); }
  static value_type one() { return DualPointSet::one(); }
  static value_type plus(const value_type& a, const value_type& b) { return hull_plus(a, b); }
  static value_type times(const value_type& a, const value_type& b) { return hull_times(a, b); }
};

static_assert(Semiring<HullSemiring>);
static_assert(Semiring<TropicalSemiring>);
static_assert(Semiring<CountingSemiring>);

/// Best primal score at eta over all points of the set: the tropical
/// counterpart of a hull. -inf for the empty set.
inline double max_score_at(const DualPointSet& s, double eta) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Point2& p : s.points()) best = std::max(best, p.score_at(eta));
  return best;
}

/// Whether conv[A + B] == conv[conv A + conv B] for raw point sets A and B.
/// The left side sums every pair before taking one hull; the right side takes
/// the hulls first and merges them with the linear-time Minkowski sum.
inline bool convexify_equivalence(std::span<const Point2> a, std::span<const Point2> b) {
  std::vector<Point2> sums;
  sums.reserve(a.size() * b.size());
  for (const Point2& p : a)
    for (const Point2& q : b) sums.push_back(p + q);
  const ConvexChain direct = full_hull(sums);
  const ConvexChain hulls_first = minkowski_sum(full_hull(a), full_hull(b));
  return direct == hulls_first;
}

}  // namespace hullmert
