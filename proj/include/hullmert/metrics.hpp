#pragma once

// Vector error counts and scalarizers. A metric maps one (hypothesis,
// reference) pair to sufficient statistics that add across sentences; the
// scalarizer turns corpus totals into a loss (lower is better).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hullmert/error.hpp"

namespace hullmert {

using Tokens = std::vector<std::string>;

inline Tokens tokenize(const std::string& text) {
  Tokens out;
  std::istringstream is(text);
  for (std::string tok; is >> tok;) out.push_back(std::move(tok));
  return out;
}

class ErrorCount {
 public:
  ErrorCount() = default;
  explicit ErrorCount(std::size_t dim) : stats_(dim, 0.0) {}
  explicit ErrorCount(std::vector<double> stats) : stats_(std::move(stats)) {}

  std::size_t dim() const noexcept { return stats_.size(); }
  double operator[](std::size_t i) const { return stats_[i]; }
  double& operator[](std::size_t i) { return stats_[i]; }
  std::span<const double> stats() const noexcept { return stats_; }

  ErrorCount& operator+=(const ErrorCount& other) {
    if (other.dim() != dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "adding error counts of dimension " +
                                                     std::to_string(dim()) + " and " +
                                                     std::to_string(other.dim()));
    }
    for (std::size_t i = 0; i < stats_.size(); ++i) stats_[i] += other.stats_[i];
    return *this;
  }
  friend ErrorCount operator+(ErrorCount a, const ErrorCount& b) { return a += b; }
  friend bool operator==(const ErrorCount&, const ErrorCount&) = default;

 private:
  std::vector<double> stats_;
};

using Scalarizer = std::function<double(const ErrorCount&)>;

struct Metric {
  std::string name;
  std::size_t dim = 0;
  std::function<ErrorCount(std::span<const std::string> hyp, std::span<const std::string> ref)> delta;
  Scalarizer loss;  // default scalarizer for this metric
};

inline ErrorCount exact_match_delta(std::span<const std::string> hyp, std::span<const std::string> ref) {
  const bool same = std::equal(hyp.begin(), hyp.end(), ref.begin(), ref.end());
  return ErrorCount(std::vector<double>{same ? 0.0 : 1.0});
}

inline Metric exact_match_metric() {
  return {"exact", 1, exact_match_delta, [](const ErrorCount& c) { return c[0]; }};
}

namespace detail {

struct NgramLess {
  bool operator()(std::span<const std::string> a, std::span<const std::string> b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

}  // namespace detail

/// BLEU sufficient statistics against a single reference. Layout, for
/// n = 1..max_n: clipped matches at [n-1], hypothesis n-gram totals at
/// [max_n + n - 1]; then hypothesis length and reference length.
inline ErrorCount bleu_stats(std::span<const std::string> hyp, std::span<const std::string> ref,
                             std::size_t max_n = 4) {
  if (max_n == 0) throw Error(ErrorCode::kUsage, "BLEU order must be at least 1");
  ErrorCount out(2 * max_n + 2);
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::map<std::span<const std::string>, int, detail::NgramLess> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[ref.subspan(i, n)];
    double matches = 0.0, total = 0.0;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
      total += 1.0;
      auto it = ref_counts.find(hyp.subspan(i, n));
      if (it != ref_counts.end() && it->second > 0) {
        --it->second;
        matches += 1.0;
      }
    }
    out[n - 1] = matches;
    out[max_n + n - 1] = total;
  }
  out[2 * max_n] = static_cast<double>(hyp.size());
  out[2 * max_n + 1] = static_cast<double>(ref.size());
  return out;
}

inline constexpr double kBleuFloor = 1e-9;

/// 1 - BLEU of aggregated statistics. Precisions and the hypothesis length
/// are floored at kBleuFloor so the loss is defined everywhere.
inline double bleu_loss(const ErrorCount& stats) {
  if (stats.dim() < 4 || stats.dim() % 2 != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "not a BLEU statistics vector");
  }
  const std::size_t max_n = (stats.dim() - 2) / 2;
  double log_precision = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    log_precision += std::log(std::max(stats[n], kBleuFloor)) - std::log(std::max(stats[max_n + n], kBleuFloor));
  }
  log_precision /= static_cast<double>(max_n);
  const double hyp_len = stats[2 * max_n];
  const double ref_len = stats[2 * max_n + 1];
  const double log_bp = std::min(0.0, 1.0 - ref_len / std::max(hyp_len, kBleuFloor));
  const double bleu = std::exp(log_bp + log_precision);
  return std::clamp(1.0 - bleu, 0.0, 1.0);
}

inline Metric bleu_metric(std::size_t max_n = 4) {
  return {"bleu", 2 * max_n + 2,
          [max_n](std::span<const std::string> hyp, std::span<const std::string> ref) {
            return bleu_stats(hyp, ref, max_n);
          },
          bleu_loss};
}

inline Metric metric_by_name(const std::string& name) {
  if (name == "exact") return exact_match_metric();
  if (name == "bleu") return bleu_metric();
  throw Error(ErrorCode::kUsage, "unknown metric '" + name + "' (expected exact or bleu)");
}

}  // namespace hullmert
