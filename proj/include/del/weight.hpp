#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "del/interval.hpp"
#include "del/scalar.hpp"
#include "del/step_function.hpp"

namespace del {

/// Parameters of the extremal construction. Exact rationals throughout:
/// eps = 4^-k, tau_w = 9 eps / (1 + 5 eps), p from the averaging identities.
struct WeightParams {
  int k = 2;
  Rational eps;
  Rational tau_w;
  Rational p;
  Rational omega{1};
  Rational sigma;  // p / omega
  int levels = 0;  // implemented recursion depth L

  /// Full recursion depth of the idealized construction, 4^k.
  [[nodiscard]] std::uint64_t full_depth() const { return std::uint64_t{1} << (2 * k); }
};

/// Exact solution of the two averaging identities for generation width k.
WeightParams solve_parameters(int k);

/// Same parameters with omega (sigma = p / omega) and depth L filled in.
WeightParams make_params(int k, int levels, const Rational& omega = Rational(1));

/// Residuals of the two averaging identities (both exactly zero for solved params).
std::pair<Rational, Rational> parameter_residuals(const WeightParams& params);

/// Sum over levels 0..levels of (k-1)^l.
std::uint64_t forming_interval_count(int k, int levels);

/// Deepest leaf of w^(L) built on [0,1).
int construction_depth(int k, int levels);

/// Closed form of |A_l|: (1/3 (1 - 4^-(k-1)))^l * 2 * 4^-k.
Rational special_measure_closed_form(int k, int level);

/// Runtime guards for construction.
struct BuildLimits {
  int max_depth = DyadicInterval::kMaxDepth;
  std::uint64_t max_forming = 1'000'000;
};

struct FormingInterval {
  DyadicInterval interval;
  int level = 0;  // local omega is 3^level * omega
};

struct SpecialInterval {
  DyadicInterval interval;
  int level = 0;
  DyadicInterval forming;             // K with interval = K_{k-1}^+
  std::vector<DyadicInterval> row;    // K^+, K_1^+, ..., K_{k-2}^+
};

enum class RegionKind : std::uint8_t { kConstant, kSpecial, kBase };

/// Construction tag of one leaf.
struct LeafTag {
  int level = 0;
  RegionKind kind = RegionKind::kConstant;
};

template <Scalar S>
struct AnnotatedWeight {
  StepFunction<S> weight;
  WeightParams params;
  std::vector<FormingInterval> forming;  // levels 0..L; level-L entries carry the base w0
  std::vector<SpecialInterval> specials; // levels 0..L-1
  std::vector<LeafTag> tags;             // parallel to weight.leaves()

  [[nodiscard]] std::vector<DyadicInterval> forming_at(int level) const {
    std::vector<DyadicInterval> out;
    for (const auto& f : forming) {
      if (f.level == level) out.push_back(f.interval);
    }
    return out;
  }

  [[nodiscard]] std::vector<const SpecialInterval*> specials_at(int level) const {
    std::vector<const SpecialInterval*> out;
    for (const auto& s : specials) {
      if (s.level == level) out.push_back(&s);
    }
    return out;
  }

  [[nodiscard]] const SpecialInterval* find_special(const DyadicInterval& j) const {
    for (const auto& s : specials) {
      if (s.interval == j) return &s;
    }
    return nullptr;
  }
};

/// Two-leaf base weight on I: omega (1 -+ sqrt((p-1)/p)) on I-, I+.
/// The rest of [0,1) is zero-filled so the result is a StepFunction on [0,1).
template <Scalar S>
std::vector<Leaf<S>> base_weight_leaves(const Rational& omega, const Rational& p, const DyadicInterval& interval) {
  if (p <= 1) throw std::domain_error("degenerate base weight");
  const S root = ScalarOps<S>::sqrt_rational(Rational((p - 1) / p));
  const S w = ScalarOps<S>::from_rational(omega);
  return {{interval.left(), w * (S(1) - root)}, {interval.right(), w * (S(1) + root)}};
}

/// w0(omega, sigma, [0,1)) as a step function; requires omega * sigma = p.
template <Scalar S>
StepFunction<S> build_w0(const Rational& omega, const Rational& sigma, const Rational& p) {
  if (omega * sigma != p) throw std::invalid_argument("base weight needs omega * sigma = p");
  return StepFunction<S>(base_weight_leaves<S>(omega, p, DyadicInterval::root()));
}

namespace detail {

template <Scalar S>
class WeightBuilder {
 public:
  WeightBuilder(const WeightParams& params, AnnotatedWeight<S>& out) : params_(params), out_(out) {
    base_low_ = ScalarOps<S>::from_rational(Rational(1)) - ScalarOps<S>::sqrt_rational(Rational((params.p - 1) / params.p));
    base_high_ = S(2) - base_low_;
  }

  void build(const DyadicInterval& interval, int level, const Rational& omega) {
    out_.forming.push_back({interval, level});
    if (level == params_.levels) {
      const S w = ScalarOps<S>::from_rational(omega);
      emit(interval.left(), w * base_low_, level, RegionKind::kBase);
      emit(interval.right(), w * base_high_, level, RegionKind::kBase);
      return;
    }
    const S low = ScalarOps<S>::from_rational(Rational(omega / params_.p));
    const S special = ScalarOps<S>::from_rational(Rational(omega * params_.tau_w / params_.p));
    const Rational child_omega = omega * 3;
    SpecialInterval sp;
    sp.level = level;
    sp.forming = interval;
    DyadicInterval cur = interval;  // I_m
    for (int m = 0; m <= params_.k - 2; ++m) {
      emit(cur.left(), low, level, RegionKind::kConstant);
      sp.row.push_back(cur.right());
      build(cur.right().left(), level + 1, child_omega);
      cur = cur.right().right();
    }
    emit(cur.left(), low, level, RegionKind::kConstant);
    emit(cur.right(), special, level, RegionKind::kSpecial);
    sp.interval = cur.right();
    out_.specials.push_back(std::move(sp));
  }

 private:
  void emit(const DyadicInterval& cell, S value, int level, RegionKind kind) {
    leaves_.push_back({cell, std::move(value)});
    out_.tags.push_back({level, kind});
  }

 public:
  std::vector<Leaf<S>> leaves_;

 private:
  const WeightParams& params_;
  AnnotatedWeight<S>& out_;
  S base_low_;
  S base_high_;
};

}  // namespace detail

/// Recursive extremal weight w^(L)(omega, sigma, [0,1)).
///
/// Level-l forming intervals carry a copy with local parameters
/// (3^l omega, sigma / 3^l); level-L forming intervals carry the base w0.
template <Scalar S>
AnnotatedWeight<S> build_weight(const WeightParams& params, const BuildLimits& limits = {}) {
  if (params.k < 2) throw std::invalid_argument("k must be at least 2");
  if (params.levels < 0) throw std::invalid_argument("levels must be nonnegative");
  if (params.omega * params.sigma != params.p) throw std::invalid_argument("omega * sigma must equal p");
  const int depth = construction_depth(params.k, params.levels);
  if (depth > limits.max_depth || depth > DyadicInterval::kMaxDepth) {
    throw std::length_error("construction depth " + std::to_string(depth) + " exceeds the depth cap " +
                            std::to_string(std::min(limits.max_depth, DyadicInterval::kMaxDepth)));
  }
  if (forming_interval_count(params.k, params.levels) > limits.max_forming) {
    throw std::length_error("forming interval count exceeds the budget");
  }
  AnnotatedWeight<S> out;
  out.params = params;
  detail::WeightBuilder<S> builder(params, out);
  builder.build(DyadicInterval::root(), 0, params.omega);
  // leaves are emitted left to right, so the tags stay parallel after the sort
  out.weight = StepFunction<S>(std::move(builder.leaves_));
  return out;
}

/// Level-graded majorant: omega 3^l on level-l constant regions, omega 3^L on
/// base blocks. Same partition as the weight.
template <Scalar S>
StepFunction<S> build_majorant(const AnnotatedWeight<S>& aw) {
  std::vector<Leaf<S>> out;
  out.reserve(aw.weight.size());
  const auto& leaves = aw.weight.leaves();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    Rational v = aw.params.omega;
    for (int j = 0; j < aw.tags[i].level; ++j) v *= 3;
    out.push_back({leaves[i].interval, ScalarOps<S>::from_rational(v)});
  }
  return StepFunction<S>(std::move(out));
}

/// Total length of the level-l special intervals, by enumeration.
template <Scalar S>
Rational special_measure(const AnnotatedWeight<S>& aw, int level) {
  if (level < 0 || level >= aw.params.levels) throw std::out_of_range("level not constructed");
  Rational total(0);
  for (const auto& s : aw.specials) {
    if (s.level == level) total += dyadic_length(s.interval.depth());
  }
  return total;
}

/// Rational power helper shared by the construction-level formulas.
Rational rational_pow(const Rational& base, int exponent);

}  // namespace del
