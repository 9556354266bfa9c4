#pragma once

// Forest files, run configuration and machine-readable reports.
//
// A forest file is line-delimited JSON, one sentence per line (blank lines
// and lines starting with '#' are skipped):
//
//   {"nodes": ["A", "S"], "goal": "S", "ref": "the cat",
//    "edges": [{"head": "A", "features": {"lm": -1}, "yield": "cat"},
//              {"head": "S", "tails": ["A"], "features": {"tm": 2}, "yield": "the $0"}]}
//
// `$k` in a yield is replaced by the yield of the edge's k-th tail. Feature
// names are mapped to dense ids in sorted order over the whole run.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hullmert/error.hpp"
#include "hullmert/forest.hpp"
#include "hullmert/linesearch.hpp"
#include "hullmert/metrics.hpp"

namespace hullmert::io {

using json = nlohmann::json;
using FeatureMap = std::map<std::string, double>;

struct EdgeDocument {
  std::string head;
  std::vector<std::string> tails;
  FeatureMap features;
  std::string yield;
  friend bool operator==(const EdgeDocument&, const EdgeDocument&) = default;
};

struct ForestDocument {
  std::vector<std::string> nodes;
  std::string goal;
  std::vector<EdgeDocument> edges;
  std::string reference;
  friend bool operator==(const ForestDocument&, const ForestDocument&) = default;
};

namespace detail {

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::kParse, "unknown key '" + key + "' in " + what);
  }
}

template <class T>
T get_as(const json& obj, const char* key, const std::string& what) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, what + "." + key + ": " + e.what());
  }
}

inline FeatureMap parse_feature_map(const json& j, const std::string& what) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, what + " must be an object of feature: value");
  FeatureMap out;
  for (const auto& [name, value] : j.items()) {
    if (!value.is_number()) throw Error(ErrorCode::kParse, what + "." + name + " is not a number");
    out[name] = value.get<double>();
  }
  return out;
}

}  // namespace detail

inline ForestDocument parse_document(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "forest document must be an object");
  detail::reject_unknown_keys(j, {"nodes", "goal", "edges", "ref"}, "forest document");

  ForestDocument doc;
  doc.nodes = detail::get_as<std::vector<std::string>>(j, "nodes", "forest");
  doc.goal = detail::get_as<std::string>(j, "goal", "forest");
  doc.reference = detail::get_as<std::string>(j, "ref", "forest");
  const json& edges = j.at("edges");
  if (!edges.is_array()) throw Error(ErrorCode::kParse, "edges must be an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const json& ej = edges[e];
    const std::string what = "edges[" + std::to_string(e) + "]";
    if (!ej.is_object()) throw Error(ErrorCode::kParse, what + " must be an object");
    detail::reject_unknown_keys(ej, {"head", "tails", "features", "yield"}, what);
    EdgeDocument ed;
    ed.head = detail::get_as<std::string>(ej, "head", what);
    if (ej.contains("tails")) ed.tails = detail::get_as<std::vector<std::string>>(ej, "tails", what);
    if (ej.contains("features")) ed.features = detail::parse_feature_map(ej.at("features"), what + ".features");
    if (ej.contains("yield")) ed.yield = detail::get_as<std::string>(ej, "yield", what);
    doc.edges.push_back(std::move(ed));
  }
  return doc;
}

/// Canonical single-line form: sorted keys, empty optional fields omitted.
inline std::string serialize_document(const ForestDocument& doc) {
  json j;
  j["nodes"] = doc.nodes;
  j["goal"] = doc.goal;
  j["ref"] = doc.reference;
  j["edges"] = json::array();
  for (const auto& e : doc.edges) {
    json ej;
    ej["head"] = e.head;
    if (!e.tails.empty()) ej["tails"] = e.tails;
    if (!e.features.empty()) ej["features"] = e.features;
    if (!e.yield.empty()) ej["yield"] = e.yield;
    j["edges"].push_back(std::move(ej));
  }
  return j.dump();
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUsage, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Documents of one forest file, in order. Parse failures name the line.
inline std::vector<ForestDocument> parse_forest_text(const std::string& text, const std::string& source = "<input>") {
  std::vector<ForestDocument> docs;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      docs.push_back(parse_document(line));
    } catch (const Error& e) {
      throw Error(e.code(), source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

inline std::vector<ForestDocument> read_forest_file(const std::string& path) {
  return parse_forest_text(read_text(path), path);
}

class FeatureIndex {
 public:
  FeatureIndex() = default;
  explicit FeatureIndex(std::set<std::string> names) : names_(names.begin(), names.end()) {}

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  FeatureId id(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) throw Error(ErrorCode::kParse, "unknown feature '" + name + "'");
    return static_cast<FeatureId>(it - names_.begin());
  }

  /// Dense vector for a sparse map. Names missing from the map default to
  /// 0.0; they are reported once through `missing`.
  std::vector<double> dense(const FeatureMap& m, std::vector<std::string>* missing = nullptr) const {
    std::vector<double> out(names_.size(), 0.0);
    for (const auto& [name, value] : m) out[id(name)] = value;
    if (missing)
      for (const auto& n : names_)
        if (!m.contains(n)) missing->push_back(n);
    return out;
  }

  json to_json(std::span<const double> w) const {
    json j = json::object();
    for (std::size_t f = 0; f < names_.size(); ++f) j[names_[f]] = w[f];
    return j;
  }

 private:
  std::vector<std::string> names_;
};

inline FeatureIndex build_feature_index(std::span<const ForestDocument> docs,
                                        std::initializer_list<const FeatureMap*> extra = {}) {
  std::set<std::string> names;
  for (const auto& d : docs)
    for (const auto& e : d.edges)
      for (const auto& [n, _] : e.features) names.insert(n);
  for (const FeatureMap* m : extra)
    if (m)
      for (const auto& [n, _] : *m) names.insert(n);
  return FeatureIndex(std::move(names));
}

inline std::vector<YieldItem> parse_yield(const std::string& text) {
  std::vector<YieldItem> out;
  for (auto& tok : tokenize(text)) {
    const bool slot = tok.size() > 1 && tok[0] == '$' &&
                      std::all_of(tok.begin() + 1, tok.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (slot) out.push_back(YieldItem::tail(std::stoi(tok.substr(1))));
    else out.push_back(YieldItem::word(std::move(tok)));
  }
  return out;
}

inline Hypergraph to_hypergraph(const ForestDocument& doc, const FeatureIndex& index) {
  std::map<std::string, NodeId> ids;
  for (std::size_t n = 0; n < doc.nodes.size(); ++n) {
    if (!ids.emplace(doc.nodes[n], static_cast<NodeId>(n)).second)
      throw Error(ErrorCode::kParse, "duplicate node '" + doc.nodes[n] + "'");
  }
  auto node = [&](const std::string& name) {
    auto it = ids.find(name);
    if (it == ids.end()) throw Error(ErrorCode::kParse, "undeclared node '" + name + "'");
    return it->second;
  };
  std::vector<Edge> edges;
  edges.reserve(doc.edges.size());
  for (const auto& ed : doc.edges) {
    Edge e;
    e.head = node(ed.head);
    for (const auto& t : ed.tails) e.tails.push_back(node(t));
    for (const auto& [name, value] : ed.features) e.features.emplace_back(index.id(name), value);
    std::sort(e.features.begin(), e.features.end());
    e.yield = parse_yield(ed.yield);
    edges.push_back(std::move(e));
  }
  return Hypergraph(doc.nodes.size(), node(doc.goal), index.size(), std::move(edges), doc.nodes);
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  FeatureMap weights;
  FeatureMap direction;
  std::string metric = "bleu";
  std::string scalarizer = "default";
  double merge_eps = kDefaultMergeEps;
  double offset = kDefaultUnboundedOffset;
  std::string selection = "midpoint";
  std::size_t iterations = 10;
  std::vector<FeatureMap> directions;  // empty: coordinate axes
  std::size_t threads = 1;
};

inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "config must be an object");
  detail::reject_unknown_keys(j, {"weights", "direction", "metric", "scalarizer", "merge_eps", "offset",
                                  "selection", "iterations", "directions", "threads"},
                              "config");
  RunConfig c;
  try {
    if (j.contains("weights")) c.weights = detail::parse_feature_map(j["weights"], "weights");
    if (j.contains("direction")) c.direction = detail::parse_feature_map(j["direction"], "direction");
    if (j.contains("metric")) c.metric = j["metric"].get<std::string>();
    if (j.contains("scalarizer")) c.scalarizer = j["scalarizer"].get<std::string>();
    if (j.contains("merge_eps")) c.merge_eps = j["merge_eps"].get<double>();
    if (j.contains("offset")) c.offset = j["offset"].get<double>();
    if (j.contains("selection")) c.selection = j["selection"].get<std::string>();
    if (j.contains("iterations")) c.iterations = j["iterations"].get<std::size_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
    if (j.contains("directions")) {
      const json& d = j["directions"];
      if (d.is_string()) {
        if (d.get<std::string>() != "coordinate")
          throw Error(ErrorCode::kParse, "directions must be \"coordinate\" or a list of feature maps");
      } else {
        for (const auto& m : d) c.directions.push_back(detail::parse_feature_map(m, "directions[]"));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  if (c.scalarizer != "default") throw Error(ErrorCode::kUsage, "unknown scalarizer '" + c.scalarizer + "'");
  if (c.selection != "midpoint") throw Error(ErrorCode::kUsage, "unsupported selection '" + c.selection + "'");
  if (!(c.merge_eps >= 0.0)) throw Error(ErrorCode::kUsage, "merge_eps must be non-negative");
  if (!(c.offset > 0.0)) throw Error(ErrorCode::kUsage, "offset must be positive");
  return c;
}

/// A feature map given either inline as JSON or as a path to a JSON file.
inline FeatureMap load_feature_map(const std::string& arg, const std::string& what) {
  const std::string text = (!arg.empty() && arg.front() == '{') ? arg : read_text(arg);
  try {
    return detail::parse_feature_map(json::parse(text), what);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

inline std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

inline json bound_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json envelope_json(const Envelope& env) {
  json segs = json::array();
  for (const auto& s : env.segments) {
    segs.push_back({{"lo", bound_json(s.lo)},
                    {"hi", bound_json(s.hi)},
                    {"slope", s.slope},
                    {"intercept", s.intercept},
                    {"yield", join(s.derivation.yield)}});
  }
  return segs;
}

inline json counts_json(std::span<const ErrorCount> counts) {
  json out = json::array();
  for (const auto& c : counts) out.push_back(std::vector<double>(c.stats().begin(), c.stats().end()));
  return out;
}

inline json linesearch_report(const LineSearchResult& r, const FeatureIndex& index, const std::string& metric) {
  json sentences = json::array();
  for (std::size_t i = 0; i < r.envelopes.size(); ++i) {
    sentences.push_back({{"index", i},
                         {"envelope", envelope_json(r.envelopes[i])},
                         {"counts", counts_json(r.sentence_surfaces[i].counts)}});
  }
  return {{"features", index.names()},
          {"metric", metric},
          {"sentences", std::move(sentences)},
          {"corpus_surface",
           {{"boundaries", r.corpus.boundaries}, {"counts", counts_json(r.corpus.counts)}, {"losses", r.corpus_losses}}},
          {"eta", r.eta},
          {"loss", r.loss},
          {"loss_at_zero", r.loss_at_zero},
          {"weights", index.to_json(r.weights)}};
}

inline json optimize_report(const OptimizeResult& r, const FeatureIndex& index, const std::string& metric) {
  json trace = json::array();
  for (const auto& s : r.trace) {
    trace.push_back({{"sweep", s.sweep},
                     {"direction", s.direction},
                     {"eta", s.eta},
                     {"loss", s.loss},
                     {"accepted", s.accepted}});
  }
  return {{"features", index.names()},
          {"metric", metric},
          {"initial_loss", r.initial_loss},
          {"final_loss", r.final_loss},
          {"sweeps", r.sweeps},
          {"trace", std::move(trace)},
          {"weights", index.to_json(r.weights)}};
}

/// Round-trip exact decimal form.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// (eta, corpus loss) rows read off an exact surface at `steps` evenly spaced
/// points of [lo, hi].
inline std::string sweep_table(const ErrorSurface& surface, const Scalarizer& loss, double lo, double hi,
                               std::size_t steps) {
  if (steps == 0 || !(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::kUsage, "invalid sweep range");
  std::string out = "eta\tloss\n";
  for (std::size_t i = 0; i < steps; ++i) {
    const double eta = steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
    out += format_double(eta) + '\t' + format_double(loss(surface.count_at(eta))) + '\n';
  }
  return out;
}

}  // namespace hullmert::io
