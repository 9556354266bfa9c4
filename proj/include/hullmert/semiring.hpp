#pragma once

// Generic semiring contract, two small reference instances, and a law checker
// shared by every instance.

#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace hullmert {

template <class S>
concept Semiring = requires(const typename S::value_type& a, const typename S::value_type& b) {
  typename S::value_type;
  { S::zero() } -> std::convertible_to<typename S::value_type>;
  { S::one() } -> std::convertible_to<typename S::value_type>;
  { S::plus(a, b) } -> std::convertible_to<typename S::value_type>;
  { S::times(a, b) } -> std::convertible_to<typename S::value_type>;
};

/// Max-plus score. Zero is -inf, one is 0.
struct TropicalValue {
  double score = -std::numeric_limits<double>::infinity();
  friend bool operator==(const TropicalValue&, const TropicalValue&) = default;
};

struct TropicalSemiring {
  using value_type = TropicalValue;
  static value_type zero() { return {}; }
  static value_type one() { return {0.0}; }
  static value_type plus(const value_type& a, const value_type& b) {
    return {a.score < b.score ? b.score : a.score};
  }
  static value_type times(const value_type& a, const value_type& b) {
    if (a == zero() || b == zero()) return zero();
    return {a.score + b.score};
  }
};

/// Natural numbers with saturation at the maximum, used to count derivations.
struct CountingSemiring {
  using value_type = std::uint64_t;
  static constexpr value_type kSaturated = std::numeric_limits<value_type>::max();
  static value_type zero() { return 0; }
  static value_type one() { return 1; }
  static value_type plus(value_type a, value_type b) {
    return a > kSaturated - b ? kSaturated : a + b;
  }
  static value_type times(value_type a, value_type b) {
    if (a == 0 || b == 0) return 0;
    return a > kSaturated / b ? kSaturated : a * b;
  }
};

enum class Law : std::size_t {
  kPlusAssociative,
  kPlusCommutative,
  kTimesAssociative,
  kTimesCommutative,
  kLeftDistributive,
  kRightDistributive,
  kPlusIdentity,
  kTimesIdentity,
  kAnnihilator,
  kPlusIdempotent,
  kCount,
};

constexpr std::string_view to_string(Law law) {
  switch (law) {
    case Law::kPlusAssociative: return "plus-associative";
    case Law::kPlusCommutative: return "plus-commutative";
    case Law::kTimesAssociative: return "times-associative";
    case Law::kTimesCommutative: return "times-commutative";
    case Law::kLeftDistributive: return "left-distributive";
    case Law::kRightDistributive: return "right-distributive";
    case Law::kPlusIdentity: return "plus-identity";
    case Law::kTimesIdentity: return "times-identity";
    case Law::kAnnihilator: return "annihilator";
    case Law::kPlusIdempotent: return "plus-idempotent";
    case Law::kCount: break;
  }
  return "?";
}

struct LawResult {
  std::size_t checks = 0;
  std::size_t failures = 0;
  // Sample indices of the first counterexample; unused slots stay at 0.
  std::array<std::size_t, 3> first_counterexample{};
};

struct AxiomReport {
  std::array<LawResult, static_cast<std::size_t>(Law::kCount)> laws{};
  std::size_t triples = 0;

  const LawResult& operator[](Law law) const { return laws[static_cast<std::size_t>(law)]; }
  bool ok() const {
    for (const auto& l : laws)
      if (l.failures != 0) return false;
    return true;
  }
  /// First failing law in declaration order, or kCount when all hold.
  Law first_failure() const {
    for (std::size_t i = 0; i < laws.size(); ++i)
      if (laws[i].failures != 0) return static_cast<Law>(i);
    return Law::kCount;
  }
};

/// Checks every semiring law on all ordered triples (a, b, c) drawn from
/// `sample`, plus the unary laws on every element. Evaluation order is fixed,
/// so the recorded counterexample is the first by input index.
template <Semiring S, class Eq = std::equal_to<typename S::value_type>>
AxiomReport check_axioms(std::span<const typename S::value_type> sample, Eq eq = {}) {
  AxiomReport report;
  auto record = [&](Law law, bool holds, std::size_t i, std::size_t j = 0, std::size_t k = 0) {
    LawResult& r = report.laws[static_cast<std::size_t>(law)];
    ++r.checks;
    if (!holds && r.failures++ == 0) r.first_counterexample = {i, j, k};
  };
  const auto zero = S::zero();
  const auto one = S::one();
  const std::size_t n = sample.size();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = sample[i];
    record(Law::kPlusIdentity, eq(S::plus(a, zero), a) && eq(S::plus(zero, a), a), i);
    record(Law::kTimesIdentity, eq(S::times(a, one), a) && eq(S::times(one, a), a), i);
    record(Law::kAnnihilator, eq(S::times(zero, a), zero) && eq(S::times(a, zero), zero), i);
    record(Law::kPlusIdempotent, eq(S::plus(a, a), a), i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& b = sample[j];
      record(Law::kPlusCommutative, eq(S::plus(a, b), S::plus(b, a)), i, j);
      record(Law::kTimesCommutative, eq(S::times(a, b), S::times(b, a)), i, j);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& c = sample[k];
        ++report.triples;
        record(Law::kPlusAssociative, eq(S::plus(S::plus(a, b), c), S::plus(a, S::plus(b, c))), i, j, k);
        record(Law::kTimesAssociative, eq(S::times(S::times(a, b), c), S::times(a, S::times(b, c))), i, j, k);
        record(Law::kLeftDistributive,
               eq(S::times(a, S::plus(b, c)), S::plus(S::times(a, b), S::times(a, c))), i, j, k);
        record(Law::kRightDistributive,
               eq(S::times(S::plus(b, c), a), S::plus(S::times(b, a), S::times(c, a))), i, j, k);
      }
    }
  }
  return report;
}

}  // namespace hullmert
