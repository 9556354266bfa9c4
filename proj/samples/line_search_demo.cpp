// Builds a two-sentence corpus in code, prints each sentence's upper
// envelope along a search line and the corpus error surface, then runs a
// few sweeps of coordinate-wise optimization.

#include <cstdio>
#include <string>
#include <vector>

#include "hullmert/hullmert.hpp"

using namespace hullmert;

namespace {

// Features: 0 = language model, 1 = translation model, 2 = word penalty.
Hypergraph adjective_noun() {
  std::vector<Edge> edges{
      {0, {}, {{0, -1.0}, {1, -0.5}}, {YieldItem::word("red")}},
      {0, {}, {{0, -2.0}, {1, 0.5}}, {YieldItem::word("crimson")}},
      {1, {}, {{0, -0.5}}, {YieldItem::word("car")}},
      {1, {}, {{1, -1.0}, {2, 1.0}}, {YieldItem::word("automobile")}},
      {2, {0, 1}, {{0, -1.0}}, {YieldItem::word("the"), YieldItem::tail(0), YieldItem::tail(1)}},
      {2, {1, 0}, {{0, -3.0}, {1, 1.0}}, {YieldItem::word("the"), YieldItem::tail(0), YieldItem::tail(1)}},
  };
  return Hypergraph(3, 2, 3, std::move(edges), {"ADJ", "N", "NP"});
}

Hypergraph greeting() {
  std::vector<Edge> edges{
      {0, {}, {{0, -1.0}}, {YieldItem::word("world")}},
      {0, {}, {{0, 0.5}, {1, -2.0}}, {YieldItem::word("earth")}},
      {1, {0}, {{1, -1.0}}, {YieldItem::word("hello"), YieldItem::tail(0)}},
      {1, {0}, {{0, -1.5}, {2, 1.0}}, {YieldItem::word("hi"), YieldItem::tail(0)}},
  };
  return Hypergraph(2, 1, 3, std::move(edges), {"X", "S"});
}

std::string text(const Tokens& t) {
  std::string out;
  for (const auto& w : t) out += (out.empty() ? "" : " ") + w;
  return out;
}

}  // namespace

int main() {
  Corpus corpus;
  corpus.push_back({adjective_noun(), tokenize("the red car")});
  corpus.push_back({greeting(), tokenize("hello world")});

  const Metric metric = exact_match_metric();
  const SearchSpec spec{{1.0, 0.2, 0.0}, {0.0, 1.0, 0.5}};
  const LineSearchResult r = line_search(corpus, spec, metric, metric.loss);

  for (std::size_t i = 0; i < r.envelopes.size(); ++i) {
    std::printf("sentence %zu\n", i);
    for (const auto& s : r.envelopes[i].segments)
      std::printf("  (%8.3f, %8.3f]  %s\n", s.lo, s.hi, text(s.derivation.yield).c_str());
  }
  std::printf("corpus surface\n");
  for (std::size_t k = 0; k < r.corpus.counts.size(); ++k) {
    const double lo = k == 0 ? -kInf : r.corpus.boundaries[k - 1];
    const double hi = k == r.corpus.boundaries.size() ? kInf : r.corpus.boundaries[k];
    std::printf("  (%8.3f, %8.3f]  errors %g\n", lo, hi, r.corpus_losses[k]);
  }
  std::printf("eta %.4f  loss %g (was %g)\n", r.eta, r.loss, r.loss_at_zero);

  const OptimizeResult opt = optimize(corpus, spec.w0, {}, 5, metric, metric.loss);
  std::printf("optimize: loss %g -> %g in %zu sweeps, w = (%g, %g, %g)\n", opt.initial_loss, opt.final_loss,
              opt.sweeps, opt.weights[0], opt.weights[1], opt.weights[2]);
  return 0;
}
