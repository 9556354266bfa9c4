#pragma once

// Packed forests (hypergraphs) and semiring-generic inside computation.
// Lattices are the special case where every edge has at most one tail; they
// go through exactly the same code.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hullmert/error.hpp"
#include "hullmert/geometry.hpp"
#include "hullmert/hull_semiring.hpp"
#include "hullmert/semiring.hpp"

namespace hullmert {

using NodeId = std::uint32_t;
using FeatureId = std::uint32_t;
using SparseFeatures = std::vector<std::pair<FeatureId, double>>;

/// One element of an edge's yield template: a terminal token, or a slot that
/// is replaced by the yield of the edge's k-th tail.
struct YieldItem {
  std::string token;
  int slot = -1;

  static YieldItem word(std::string t) { return {std::move(t), -1}; }
  static YieldItem tail(int k) { return {{}, k}; }
  bool is_slot() const noexcept { return slot >= 0; }
  friend bool operator==(const YieldItem&, const YieldItem&) = default;
};

struct Edge {
  NodeId head = 0;
  std::vector<NodeId> tails;
  SparseFeatures features;
  std::vector<YieldItem> yield;
};

struct ValidationReport {
  std::vector<NodeId> topological_order;
  bool goal_derivable = true;
  /// Nodes with no derivation, or not on any path to the goal.
  std::vector<NodeId> unusable_nodes;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string node_name(std::span<const std::string> labels, NodeId n) {
  if (n < labels.size()) return labels[n];
  return "n" + std::to_string(n);
}

}  // namespace detail

/// Checks index bounds, acyclicity and goal reachability. Throws
/// kInvalidForest for malformed indices and kCyclicForest (naming a node on
/// the cycle) for cycles; an underivable goal is only a warning.
inline ValidationReport validate(std::size_t num_nodes, NodeId goal, std::size_t dim,
                                 std::span<const Edge> edges,
                                 std::span<const std::string> labels = {}) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidForest, msg); };
  if (num_nodes == 0) fail("forest has no nodes");
  if (goal >= num_nodes) fail("goal node out of range");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    const std::string where = "edge " + std::to_string(e) + ": ";
    if (edge.head >= num_nodes) fail(where + "head out of range");
    for (NodeId t : edge.tails)
      if (t >= num_nodes) fail(where + "tail out of range");
    for (const auto& [f, value] : edge.features) {
      if (f >= dim) fail(where + "feature id " + std::to_string(f) + " >= dimension");
      if (!std::isfinite(value)) fail(where + "non-finite feature value");
    }
    for (const YieldItem& y : edge.yield)
      if (y.is_slot() && static_cast<std::size_t>(y.slot) >= edge.tails.size())
        fail(where + "yield slot $" + std::to_string(y.slot) + " has no tail");
  }

  // Kahn's algorithm over tail -> head dependencies.
  std::vector<std::size_t> pending(num_nodes, 0);
  std::vector<std::vector<std::size_t>> out_edges(num_nodes);
  std::vector<std::size_t> unresolved(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    unresolved[e] = edges[e].tails.size();
    for (NodeId t : edges[e].tails) out_edges[t].push_back(e);
    pending[edges[e].head] += edges[e].tails.size();
  }
  ValidationReport report;
  std::deque<NodeId> ready;
  for (NodeId n = 0; n < num_nodes; ++n)
    if (pending[n] == 0) ready.push_back(n);
  while (!ready.empty()) {
    const NodeId n = ready.front();
    ready.pop_front();
    report.topological_order.push_back(n);
    for (std::size_t e : out_edges[n]) {
      const NodeId h = edges[e].head;
      if (--pending[h] == 0) ready.push_back(h);
    }
  }
  if (report.topological_order.size() != num_nodes) {
    NodeId culprit = 0;
    for (NodeId n = 0; n < num_nodes; ++n)
      if (pending[n] != 0) {
        culprit = n;
        break;
      }
    throw Error(ErrorCode::kCyclicForest, "cycle through node " + detail::node_name(labels, culprit));
  }

  // Derivable: some incoming edge has all tails derivable.
  std::vector<char> derivable(num_nodes, 0);
  std::vector<std::vector<std::size_t>> incoming(num_nodes);
  for (std::size_t e = 0; e < edges.size(); ++e) incoming[edges[e].head].push_back(e);
  auto edge_usable = [&](std::size_t e) {
    return std::all_of(edges[e].tails.begin(), edges[e].tails.end(),
                       [&](NodeId t) { return derivable[t] != 0; });
  };
  for (NodeId n : report.topological_order)
    for (std::size_t e : incoming[n])
      if (edge_usable(e)) {
        derivable[n] = 1;
        break;
      }
  // Useful: derivable and reachable top-down from the goal through usable edges.
  std::vector<char> useful(num_nodes, 0);
  if (derivable[goal]) useful[goal] = 1;
  for (auto it = report.topological_order.rbegin(); it != report.topological_order.rend(); ++it) {
    if (!useful[*it]) continue;
    for (std::size_t e : incoming[*it])
      if (edge_usable(e))
        for (NodeId t : edges[e].tails) useful[t] = 1;
  }
  for (NodeId n = 0; n < num_nodes; ++n)
    if (!useful[n]) report.unusable_nodes.push_back(n);

  report.goal_derivable = derivable[goal] != 0;
  if (!report.goal_derivable) {
    report.warnings.push_back("empty language: goal node " + detail::node_name(labels, goal) +
                              " has no derivation");
  }
  return report;
}

/// A validated, immutable packed forest. The topological order is computed
/// once at construction.
class Hypergraph {
 public:
  Hypergraph(std::size_t num_nodes, NodeId goal, std::size_t dim, std::vector<Edge> edges,
             std::vector<std::string> labels = {})
      : num_nodes_(num_nodes),
        goal_(goal),
        dim_(dim),
        edges_(std::move(edges)),
        labels_(std::move(labels)),
        report_(validate(num_nodes_, goal_, dim_, edges_, labels_)),
        incoming_(num_nodes_) {
    for (std::size_t e = 0; e < edges_.size(); ++e)
      incoming_[edges_[e].head].push_back(static_cast<EdgeId>(e));
  }

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  NodeId goal() const noexcept { return goal_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  std::span<const EdgeId> incoming(NodeId n) const { return incoming_.at(n); }
  std::span<const NodeId> topological_order() const noexcept { return report_.topological_order; }
  const ValidationReport& report() const noexcept { return report_; }
  std::string label(NodeId n) const { return detail::node_name(labels_, n); }
  bool is_lattice() const {
    return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.tails.size() <= 1; });
  }

 private:
  std::size_t num_nodes_;
  NodeId goal_;
  std::size_t dim_;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  ValidationReport report_;
  std::vector<std::vector<EdgeId>> incoming_;
};

inline const ValidationReport& validate(const Hypergraph& g) { return g.report(); }

/// Inside values of every node: the plus over incoming edges of the edge's
/// leaf value times the values of its tails, in tail order. Nodes without
/// incoming edges get zero.
template <Semiring S, class LeafFn>
std::vector<typename S::value_type> inside_values(const Hypergraph& g, LeafFn&& leaf_value) {
  using V = typename S::value_type;
  std::vector<V> values(g.num_nodes(), S::zero());
  for (NodeId n : g.topological_order()) {
    bool first = true;
    V acc = S::zero();
    for (EdgeId e : g.incoming(n)) {
      V term = leaf_value(e);
      for (NodeId t : g.edge(e).tails) term = S::times(term, values[t]);
      if (first) {
        acc = std::move(term);
        first = false;
      } else {
        acc = S::plus(acc, term);
      }
    }
    values[n] = std::move(acc);
  }
  return values;
}

template <Semiring S, class LeafFn>
typename S::value_type inside(const Hypergraph& g, LeafFn&& leaf_value) {
  auto values = inside_values<S>(g, std::forward<LeafFn>(leaf_value));
  return std::move(values[g.goal()]);
}

inline std::uint64_t count_derivations(const Hypergraph& g) {
  return inside<CountingSemiring>(g, [](EdgeId) { return CountingSemiring::one(); });
}

inline double dot(std::span<const double> w, const SparseFeatures& h) {
  double s = 0.0;
  for (const auto& [f, value] : h) s += w[f] * value;
  return s;
}

namespace detail {

inline void check_dims(const Hypergraph& g, std::span<const double> w0, std::span<const double> v) {
  if (w0.size() != g.dim() || v.size() != g.dim()) {
    std::ostringstream os;
    os << "weights have dimension " << w0.size() << "/" << v.size() << ", forest has " << g.dim();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

}  // namespace detail

/// The dual point (v.H_e, -w0.H_e) of one edge, as a semiring leaf.
inline DualPointSet project_edge(const Hypergraph& g, EdgeId e, std::span<const double> w0,
                                 std::span<const double> v) {
  detail::check_dims(g, w0, v);
  const auto& h = g.edge(e).features;
  return DualPointSet::leaf(Point2(dot(v, h), -dot(w0, h)), e);
}

/// Largest goal hull the per-operation size limits allow. This is |E| when
/// no node feeds more than one tail slot; reuse can push it higher.
inline std::uint64_t hull_size_bound(const Hypergraph& g) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  auto add = [](std::uint64_t a, std::uint64_t b) { return a > kMax - b ? kMax : a + b; };
  std::vector<std::uint64_t> bound(g.num_nodes(), 0);
  for (NodeId node : g.topological_order()) {
    for (EdgeId e : g.incoming(node)) {
      std::uint64_t tails = 0;
      for (NodeId t : g.edge(e).tails) tails = add(tails, bound[t]);
      bound[node] = add(bound[node], std::max<std::uint64_t>(1, tails));
    }
  }
  return bound[g.goal()];
}

/// Hull of the dual points of every derivation at the goal.
inline DualPointSet goal_hull(const Hypergraph& g, std::span<const double> w0, std::span<const double> v) {
  detail::check_dims(g, w0, v);
  return inside<HullSemiring>(g, [&](EdgeId e) {
    const auto& h = g.edge(e).features;
    return DualPointSet::leaf(Point2(dot(v, h), -dot(w0, h)), e);
  });
}

struct DerivationTree {
  EdgeId edge = kNoEdge;
  std::vector<DerivationTree> children;  // one per tail, in tail order
  friend bool operator==(const DerivationTree&, const DerivationTree&) = default;
};

struct Derivation {
  DerivationTree tree;
  std::vector<std::string> yield;
  std::vector<double> features;  // dense, length dim

  /// Dual point of this derivation under (w0, v).
  Point2 project(std::span<const double> w0, std::span<const double> v) const {
    double slope = 0.0, intercept = 0.0;
    for (std::size_t f = 0; f < features.size(); ++f) {
      slope += v[f] * features[f];
      intercept += w0[f] * features[f];
    }
    return Point2::from_line(slope, intercept);
  }
};

namespace detail {

inline void collect_features(const Hypergraph& g, const DerivationTree& t, std::vector<double>& out) {
  for (const auto& [f, value] : g.edge(t.edge).features) out[f] += value;
  for (const auto& c : t.children) collect_features(g, c, out);
}

inline void collect_yield(const Hypergraph& g, const DerivationTree& t, std::vector<std::string>& out) {
  for (const YieldItem& item : g.edge(t.edge).yield) {
    if (item.is_slot()) collect_yield(g, t.children[static_cast<std::size_t>(item.slot)], out);
    else out.push_back(item.token);
  }
}

inline DerivationTree trace_tree(const Hypergraph& g, NodeId node, const Provenance* p) {
  auto mismatch = [&](const std::string& why) -> Error {
    return Error(ErrorCode::kProvenanceMismatch, "at node " + g.label(node) + ": " + why);
  };
  while (p != nullptr && p->kind == Provenance::Kind::kPlus) p = p->left.get();
  // Left spine of the product leaf(e) x tail_0 x ... x tail_{k-1}.
  std::vector<const Provenance*> tail_traces;
  while (p != nullptr && p->kind == Provenance::Kind::kTimes) {
    tail_traces.push_back(p->right.get());
    p = p->left.get();
  }
  if (p == nullptr || p->kind != Provenance::Kind::kLeaf) throw mismatch("record is not an edge product");
  if (p->edge >= g.num_edges()) throw mismatch("unknown edge id " + std::to_string(p->edge));
  const Edge& edge = g.edge(p->edge);
  if (edge.head != node) throw mismatch("edge " + std::to_string(p->edge) + " has a different head");
  if (edge.tails.size() != tail_traces.size()) throw mismatch("tail count differs from the product arity");

  DerivationTree tree;
  tree.edge = p->edge;
  tree.children.reserve(tail_traces.size());
  for (std::size_t k = 0; k < edge.tails.size(); ++k)
    tree.children.push_back(trace_tree(g, edge.tails[k], tail_traces[tail_traces.size() - 1 - k]));
  return tree;
}

}  // namespace detail

/// Fills in yield and features for a derivation tree of g.
inline Derivation make_derivation(const Hypergraph& g, DerivationTree tree) {
  Derivation d;
  d.features.assign(g.dim(), 0.0);
  detail::collect_features(g, tree, d.features);
  detail::collect_yield(g, tree, d.yield);
  d.tree = std::move(tree);
  return d;
}

/// The derivation recorded by a goal-hull point's provenance. Throws
/// kProvenanceMismatch if the record does not describe a derivation of g.
inline Derivation reconstruct(const Hypergraph& g, const ProvenancePtr& provenance) {
  return make_derivation(g, detail::trace_tree(g, g.goal(), provenance.get()));
}

inline Derivation reconstruct(const Hypergraph& g, const DualPointSet& goal, std::size_t point) {
  return reconstruct(g, goal.provenance(point));
}

/// Every derivation of the goal, in a fixed order: incoming edges in edge-id
/// order, then tail choices lexicographically with the first tail most
/// significant. Throws kEnumerationOverflow when there are more than `cap`.
inline std::vector<Derivation> enumerate(const Hypergraph& g, std::size_t cap) {
  const auto counts = inside_values<CountingSemiring>(g, [](EdgeId) { return CountingSemiring::one(); });
  const std::uint64_t total = counts[g.goal()];
  if (total > cap) {
    throw Error(ErrorCode::kEnumerationOverflow,
                (total == CountingSemiring::kSaturated ? std::string("> 2^64") : std::to_string(total)) +
                    " derivations exceed the cap of " + std::to_string(cap));
  }
  std::vector<Derivation> out;
  if (total == 0) return out;

  auto edge_live = [&](EdgeId e) {
    const auto& tails = g.edge(e).tails;
    return std::all_of(tails.begin(), tails.end(), [&](NodeId t) { return counts[t] != 0; });
  };
  // Only nodes feeding the goal through live edges are materialized; each of
  // them has at most `total` derivations.
  std::vector<char> needed(g.num_nodes(), 0);
  needed[g.goal()] = 1;
  const auto order = g.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (!needed[*it]) continue;
    for (EdgeId e : g.incoming(*it))
      if (edge_live(e))
        for (NodeId t : g.edge(e).tails) needed[t] = 1;
  }

  std::vector<std::vector<DerivationTree>> trees(g.num_nodes());
  for (NodeId n : order) {
    if (!needed[n]) continue;
    auto& mine = trees[n];
    for (EdgeId e : g.incoming(n)) {
      if (!edge_live(e)) continue;
      const auto& tails = g.edge(e).tails;
      std::vector<std::size_t> choice(tails.size(), 0);
      bool done = false;
      while (!done) {
        DerivationTree t;
        t.edge = e;
        for (std::size_t k = 0; k < tails.size(); ++k) t.children.push_back(trees[tails[k]][choice[k]]);
        mine.push_back(std::move(t));
        // Odometer with the last tail varying fastest.
        std::size_t k = tails.size();
        while (true) {
          if (k == 0) {
            done = true;
            break;
          }
          --k;
          if (++choice[k] < trees[tails[k]].size()) break;
          choice[k] = 0;
        }
      }
    }
  }
  out.reserve(trees[g.goal()].size());
  for (auto& t : trees[g.goal()]) out.push_back(make_derivation(g, std::move(t)));
  return out;
}

}  // namespace hullmert
