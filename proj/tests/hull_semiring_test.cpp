#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "hullmert/hull_semiring.hpp"
#include "hullmert/semiring.hpp"
#include "support/random_instances.hpp"

namespace hullmert {
namespace {

using testing::Rng;

DualPointSet set(std::initializer_list<std::pair<double, double>> pts) {
  std::vector<Point2> p;
  for (auto [x, y] : pts) p.emplace_back(x, y);
  return DualPointSet::hull_of(p);
}

TEST(HullPlus, Examples) {
  const DualPointSet a = set({{0, 0}, {2, 0}, {1, -1}});
  EXPECT_EQ(hull_plus(a, DualPointSet::zero()), a);
  EXPECT_EQ(hull_plus(DualPointSet::zero(), a), a);
  EXPECT_EQ(hull_plus(a, a), a);
  EXPECT_EQ(hull_plus(set({{0, 0}, {2, 0}}), set({{1, 2}})), set({{0, 0}, {2, 0}, {1, 2}}));
}

TEST(HullPlus, CoincidentPointKeepsLeftOperand) {
  const DualPointSet left = DualPointSet::leaf(Point2(1, 1), 7);
  const DualPointSet right = DualPointSet::leaf(Point2(1, 1), 9);
  const DualPointSet sum = hull_plus(left, right);
  ASSERT_EQ(sum.size(), 1u);
  const auto& p = sum.provenance(0);
  EXPECT_EQ(p->kind, Provenance::Kind::kPlus);
  EXPECT_EQ(p->side, Provenance::Side::kLeft);
  EXPECT_EQ(p->left->edge, 7u);
  EXPECT_EQ(hull_plus(right, left).provenance(0)->left->edge, 9u);
}

TEST(HullTimes, Examples) {
  const DualPointSet b = set({{0, 0}, {3, 1}, {1, 2}});
  EXPECT_EQ(hull_times(DualPointSet::one(), b), b);
  EXPECT_EQ(hull_times(b, DualPointSet::one()), b);
  EXPECT_TRUE(hull_times(DualPointSet::zero(), b).empty());
  EXPECT_TRUE(hull_times(b, DualPointSet::zero()).empty());
  EXPECT_EQ(hull_times(set({{0, 0}, {1, 0}}), set({{0, 0}, {0, 1}})), set({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
}

TEST(HullTimes, ProvenanceNamesOperandPoints) {
  const DualPointSet a = hull_plus(DualPointSet::leaf(Point2(0, 0), 0), DualPointSet::leaf(Point2(2, 0), 1));
  const DualPointSet b = hull_plus(DualPointSet::leaf(Point2(0, 0), 2), DualPointSet::leaf(Point2(1, -1), 3));
  const DualPointSet ab = hull_times(a, b);
  ASSERT_EQ(ab.size(), 4u);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    const auto& p = ab.provenance(i);
    ASSERT_EQ(p->kind, Provenance::Kind::kTimes);
    const auto* l = p->left->left.get();   // through the plus record
    const auto* r = p->right->left.get();
    const Point2 expect = Point2(l->edge == 0 ? 0 : 2, 0) + (r->edge == 2 ? Point2(0, 0) : Point2(1, -1));
    EXPECT_EQ(ab.point(i), expect);
  }
}

// Leaf edge ids reached from a provenance record, with multiplicity.
void leaves(const Provenance* p, std::map<EdgeId, int>& out) {
  switch (p->kind) {
    case Provenance::Kind::kOne: return;
    case Provenance::Kind::kLeaf: ++out[p->edge]; return;
    case Provenance::Kind::kPlus: leaves(p->left.get(), out); return;
    case Provenance::Kind::kTimes:
      leaves(p->left.get(), out);
      leaves(p->right.get(), out);
      return;
  }
}

TEST(HullSemiring, ProvenanceSoundnessOnRandomExpressions) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2> leaf_points;
    std::vector<DualPointSet> pool;
    for (int i = 0; i < 6; ++i) {
      leaf_points.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5));
      pool.push_back(DualPointSet::leaf(leaf_points.back(), static_cast<EdgeId>(i)));
    }
    for (int step = 0; step < 10; ++step) {
      const auto& a = pool[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(pool.size()) - 1))];
      const auto& b = pool[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(pool.size()) - 1))];
      pool.push_back(rng.coin() ? hull_plus(a, b) : hull_times(a, b));
    }
    const DualPointSet& top = pool.back();
    for (std::size_t i = 0; i < top.size(); ++i) {
      std::map<EdgeId, int> used;
      leaves(top.provenance(i).get(), used);
      double x = 0, y = 0;
      for (auto [e, mult] : used) {
        x += mult * leaf_points[e].x();
        y += mult * leaf_points[e].y();
      }
      EXPECT_EQ(Point2(x, y), top.point(i));
    }
  }
}

TEST(CheckAxioms, IdentitiesOnly) {
  const std::vector<DualPointSet> sample{DualPointSet::zero(), DualPointSet::one()};
  const AxiomReport r = check_axioms<HullSemiring>(sample);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.triples, 8u);
}

TEST(CheckAxioms, RandomHulls) {
  Rng rng(22);
  std::vector<DualPointSet> sample{DualPointSet::zero(), DualPointSet::one()};
  for (int i = 0; i < 48; ++i) sample.push_back(testing::random_hull(rng, 5));
  const AxiomReport r = check_axioms<HullSemiring>(sample);
  EXPECT_TRUE(r.ok()) << to_string(r.first_failure());
  EXPECT_EQ(r.triples, 50u * 50u * 50u);
}

TEST(CheckAxioms, NonCanonicalValueBreaksDistributivity) {
  // The interior point (1, 1) is kept, which no hull would do.
  const DualPointSet bad = DualPointSet::unchecked({Point2(0, 0), Point2(4, 0), Point2(1, 1), Point2(0, 4)});
  const std::vector<DualPointSet> sample{bad, set({{0, 0}, {1, 0}}), set({{0, 0}, {0, 3}}), set({{2, 2}})};
  const AxiomReport r = check_axioms<HullSemiring>(sample);
  EXPECT_FALSE(r.ok());
  EXPECT_GT(r[Law::kLeftDistributive].failures + r[Law::kRightDistributive].failures, 0u);
}

TEST(CheckAxioms, TropicalAndCounting) {
  std::vector<TropicalValue> trop{TropicalSemiring::zero(), TropicalSemiring::one(), {1.0}, {-2.5}, {4.0}};
  EXPECT_TRUE(check_axioms<TropicalSemiring>(trop).ok());
  std::vector<std::uint64_t> counts{0, 1, 2, 7, 30};
  const AxiomReport r = check_axioms<CountingSemiring>(counts);
  // Counting is not idempotent; everything else holds.
  EXPECT_GT(r[Law::kPlusIdempotent].failures, 0u);
  EXPECT_EQ(r.first_failure(), Law::kPlusIdempotent);
}

TEST(ConvexifyEquivalence, Examples) {
  Rng rng(23);
  EXPECT_TRUE(convexify_equivalence(std::vector<Point2>{Point2(1, 2)}, std::vector<Point2>{Point2(-3, 4)}));
  for (int trial = 0; trial < 200; ++trial) {
    EXPECT_TRUE(convexify_equivalence(testing::random_points(rng, 6), testing::random_points(rng, 6)));
  }
  const std::vector<Point2> with_interior{Point2(0, 0), Point2(4, 0), Point2(0, 4), Point2(1, 1), Point2(2, 1)};
  const std::vector<Point2> convex{Point2(0, 0), Point2(1, 0), Point2(0, 1)};
  EXPECT_TRUE(convexify_equivalence(with_interior, convex));
}

TEST(HullSemiring, TropicalConsistencyOnExpressionTrees) {
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const double eta = rng.real(-10, 10);
    std::vector<DualPointSet> hulls;
    std::vector<TropicalValue> trops;
    for (int i = 0; i < 5; ++i) {
      const Point2 p(rng.uniform(-5, 5), rng.uniform(-5, 5));
      hulls.push_back(DualPointSet::leaf(p, static_cast<EdgeId>(i)));
      trops.push_back({eta * p.slope() + p.intercept()});
    }
    for (int step = 0; step < 12; ++step) {
      const auto i = static_cast<std::size_t>(rng.uniform(0, static_cast<int>(hulls.size()) - 1));
      const auto j = static_cast<std::size_t>(rng.uniform(0, static_cast<int>(hulls.size()) - 1));
      if (rng.coin()) {
        hulls.push_back(hull_plus(hulls[i], hulls[j]));
        trops.push_back(TropicalSemiring::plus(trops[i], trops[j]));
      } else {
        hulls.push_back(hull_times(hulls[i], hulls[j]));
        trops.push_back(TropicalSemiring::times(trops[i], trops[j]));
      }
    }
    const double from_hull = max_score_at(hulls.back(), eta);
    EXPECT_NEAR(from_hull, trops.back().score, 1e-9 * std::max(1.0, std::abs(from_hull)));
  }
}

TEST(HullSemiring, SizeBoundCounterAdvances) {
  const auto before = size_bound_stats();
  hull_plus(set({{0, 0}}), set({{1, 1}}));
  hull_times(set({{0, 0}}), set({{1, 1}}));
  const auto after = size_bound_stats();
  EXPECT_EQ(after.operations - before.operations, 2u);
  EXPECT_EQ(after.violations, before.violations);
}

}  // namespace
}  // namespace hullmert
