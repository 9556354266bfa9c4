#include <gtest/gtest.h>

#include <vector>

#include "hullmert/oracle.hpp"
#include "support/random_instances.hpp"

namespace hullmert {
namespace {

TEST(NaiveMinkowski, SquareFromSegments) {
  const std::vector<Point2> a{Point2(0, 0), Point2(1, 0)};
  const std::vector<Point2> b{Point2(0, 0), Point2(0, 1)};
  EXPECT_EQ(oracle::naive_minkowski(a, b).size(), 4u);
}

TEST(NaiveMinkowski, CapIsEnforced) {
  const std::vector<Point2> a(101, Point2(0, 0)), b(100, Point2(1, 1));
  try {
    oracle::naive_minkowski(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapExceeded);
  }
  EXPECT_NO_THROW(oracle::naive_minkowski(std::vector<Point2>(100, Point2(0, 0)), b));
}

TEST(Grid, Endpoints) {
  const auto g = oracle::grid(-10, 10, 2001);
  ASSERT_EQ(g.size(), 2001u);
  EXPECT_EQ(g.front(), -10);
  EXPECT_EQ(g.back(), 10);
  EXPECT_EQ(g[1000], 0);
  EXPECT_EQ(oracle::grid(3, 5, 1), std::vector<double>{3});
}

TEST(NaiveEnvelope, PicksMaxAndFirstOnTies) {
  const std::vector<oracle::Line> lines{{0, 0}, {1, 0}, {0, 0}};
  const auto s = oracle::naive_envelope(lines, 3, -1, 1);
  EXPECT_EQ(s[0].argmax, 0u);
  EXPECT_EQ(s[1].argmax, 0u);
  EXPECT_EQ(s[2].argmax, 1u);
  EXPECT_THROW(oracle::naive_envelope(std::vector<oracle::Line>{}, 3), Error);
}

TEST(GridLineSearch, TiesGoToSteeperLine) {
  // Both hypotheses score 0 at eta = 0; the grid must treat eta = 0 as the
  // right-hand hypothesis, matching the right-closed envelope intervals.
  std::vector<Edge> edges{Edge{0, {}, {}, {YieldItem::word("flat")}},
                          Edge{0, {}, {{0, 1}}, {YieldItem::word("up")}}};
  Corpus corpus;
  corpus.push_back({Hypergraph(1, 0, 1, std::move(edges)), tokenize("up")});
  const Metric m = exact_match_metric();
  const std::vector<double> etas{-1, 0, 1};
  const auto r = oracle::grid_line_search(corpus, {{0}, {1}}, m, m.loss, etas);
  EXPECT_EQ(r.losses, (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(r.best_eta(), 0);
}

TEST(GridLineSearch, OverflowIsReported) {
  testing::Rng rng(61);
  const Hypergraph big = testing::random_lattice(rng, 200);
  Corpus corpus;
  corpus.push_back({big, tokenize("a")});
  const Metric m = exact_match_metric();
  try {
    oracle::grid_line_search(corpus, {std::vector<double>(3, 1.0), std::vector<double>(3, 1.0)}, m, m.loss);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEnumerationOverflow);
  }
}

}  // namespace
}  // namespace hullmert
