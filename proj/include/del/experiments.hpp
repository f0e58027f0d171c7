#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "del/operators.hpp"
#include "del/weight.hpp"

namespace del {

// ---------------------------------------------------------------------------
// Self-similar moment ledger

/// Exact per-level integrals of (Tw)^2 w^-1 and S^2w w^-1, obtained from the
/// moments of the inherited transform value over the forming intervals of
/// each level rather than from the tree. Index L holds the base blocks.
struct LevelLedger {
  int levels = 0;
  std::vector<Rational> martingale;
  std::vector<Rational> martingale_on_specials;
  std::vector<Rational> square;

  [[nodiscard]] Rational martingale_total() const;
  [[nodiscard]] Rational square_total() const;
};

LevelLedger moment_ledger(const WeightParams& params);

/// Local averages of a level-l forming interval K: entry m is <w>_{K_m}, in units of omega_l.
std::vector<Rational> chain_averages(const WeightParams& params);

// ---------------------------------------------------------------------------
// Row contributions

template <Scalar S>
struct RowContribution {
  std::vector<S> terms;  // 1/2 (<w>_{K_m^{+-}} - <w>_{K_m^{++}}), m = 0..k-2
  S total{0};
};

namespace detail {

template <Scalar S>
const SpecialInterval& require_special(const AnnotatedWeight<S>& aw, const DyadicInterval& j) {
  const SpecialInterval* sp = aw.find_special(j);
  if (sp == nullptr) throw std::invalid_argument("interval " + j.path() + " is not a special interval");
  return *sp;
}

inline Rational pow3(int l) { return rational_pow(Rational(3), l); }

}  // namespace detail

/// Value on J of sum over R in row(J) of (-1)(w,h_R)h_R.
template <Scalar S>
RowContribution<S> row_contribution(const AnnotatedWeight<S>& aw, const DyadicInterval& j) {
  const SpecialInterval& sp = detail::require_special(aw, j);
  if (sp.level % 2 != 0) throw std::invalid_argument("row contribution needs an even-level special interval");
  RowContribution<S> out;
  Accumulator<S> acc;
  for (const auto& r : sp.row) {
    // J lies in r+, where -(w,h_r)h_r equals -haar_amplitude
    const S term = S(0) - haar_amplitude(aw.weight, r);
    acc.add(term);
    out.terms.push_back(term);
  }
  out.total = acc.value();
  return out;
}

/// |Tw - T_J w| on J, with T the full paper transform.
template <Scalar S>
S cross_row_interference(const AnnotatedWeight<S>& aw, const StepFunction<S>& transform, const DyadicInterval& j) {
  const RowContribution<S> own = row_contribution(aw, j);
  return scalar_abs(S(average(transform, j) - own.total));
}

template <Scalar S>
S cross_row_interference(const AnnotatedWeight<S>& aw, const DyadicInterval& j) {
  return cross_row_interference(aw, martingale_transform(aw.weight, paper_sign_pattern(aw)), j);
}

struct RowCheckEntry {
  std::string path;
  int level = 0;
  double row_ratio = 0;           // row / (k 3^{l+1} omega)
  double interference_ratio = 0;  // interference / (1/2 k 3^l omega)
  bool terms_positive = true;
  std::string row_exact;
};

struct RowCheck {
  std::vector<RowCheckEntry> entries;
  double min_row_ratio = std::numeric_limits<double>::infinity();
  double max_interference_ratio = 0;
  bool all_terms_positive = true;
};

template <Scalar S>
RowCheck row_check(const AnnotatedWeight<S>& aw) {
  const StepFunction<S> t = martingale_transform(aw.weight, paper_sign_pattern(aw));
  const int k = aw.params.k;
  RowCheck out;
  for (const auto& sp : aw.specials) {
    if (sp.level % 2 != 0) continue;
    const RowContribution<S> rc = row_contribution(aw, sp.interval);
    const Rational scale_row = k * detail::pow3(sp.level + 1) * aw.params.omega;
    const Rational scale_int = Rational(k) / 2 * detail::pow3(sp.level) * aw.params.omega;
    RowCheckEntry e;
    e.path = sp.interval.path();
    e.level = sp.level;
    e.row_ratio = to_double(S(rc.total / ScalarOps<S>::from_rational(scale_row)));
    e.interference_ratio =
        to_double(S(cross_row_interference(aw, t, sp.interval) / ScalarOps<S>::from_rational(scale_int)));
    for (const auto& term : rc.terms) e.terms_positive = e.terms_positive && ScalarOps<S>::sign(term) > 0;
    e.row_exact = ScalarOps<S>::to_string(rc.total);
    out.min_row_ratio = std::min(out.min_row_ratio, e.row_ratio);
    out.max_interference_ratio = std::max(out.max_interference_ratio, e.interference_ratio);
    out.all_terms_positive = out.all_terms_positive && e.terms_positive;
    out.entries.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lower bounds: brute force against the ledger

/// Sums of the integral of h over the leaves of each construction level.
template <Scalar S>
struct LevelIntegrals {
  std::vector<S> by_level;
  std::vector<S> on_specials;
  S total{0};
};

template <Scalar S>
LevelIntegrals<S> integrals_by_level(const AnnotatedWeight<S>& aw, const StepFunction<S>& h) {
  const int levels = aw.params.levels;
  std::vector<Accumulator<S>> acc(static_cast<std::size_t>(levels) + 1);
  std::vector<Accumulator<S>> acc_sp(static_cast<std::size_t>(levels) + 1);
  Accumulator<S> total;
  for (const auto& cell : h.leaves()) {
    const std::size_t leaf = aw.weight.locate(cell.interval);
    const LeafTag& tag = aw.tags[leaf];
    const S v = cell.value * ScalarOps<S>::dyadic_length(cell.interval.depth());
    acc[static_cast<std::size_t>(tag.level)].add(v);
    if (tag.kind == RegionKind::kSpecial) acc_sp[static_cast<std::size_t>(tag.level)].add(v);
    total.add(v);
  }
  LevelIntegrals<S> out;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out.by_level.push_back(acc[i].value());
    out.on_specials.push_back(acc_sp[i].value());
  }
  out.total = total.value();
  return out;
}

struct LowerBoundResult {
  std::string quantity;  // "martingale" or "square"
  int k = 0;
  int levels = 0;
  std::string brute_exact;
  std::string ledger_exact;
  double brute = 0;
  double ledger = 0;
  bool exact_match = false;
  double max_level_divergence = 0;  // relative
  std::vector<double> level_brute;
  std::vector<double> level_ledger;
  int full_levels = 0;
  double ledger_full = 0;
  double truncation_gap = 0;  // full-depth ledger minus depth-L ledger
  double normalizer = 0;      // p^2 (ln p)^2 omega or p^2 ln p omega
  double ratio_brute = 0;
  double ratio_ledger = 0;
  double ratio_full = 0;
  double min_level_ratio = std::numeric_limits<double>::infinity();
};

/// Relative divergence beyond which the two routes are considered to disagree.
inline constexpr double kLedgerTolerance = 1e-9;

namespace detail {

inline double relative_gap(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
  return std::abs(a - b) / scale;
}

template <Scalar S>
void compare_routes(LowerBoundResult& r, const LevelIntegrals<S>& brute, const std::vector<Rational>& ledger,
                    const Rational& ledger_total) {
  const S diff = brute.total - ScalarOps<S>::from_rational(ledger_total);
  r.exact_match = ScalarOps<S>::kExact && ScalarOps<S>::sign(diff) == 0;
  r.brute = to_double(brute.total);
  r.ledger = ledger_total.get_d();
  r.brute_exact = ScalarOps<S>::to_string(brute.total);
  r.ledger_exact = rational_to_string(ledger_total);
  double worst = relative_gap(r.brute, r.ledger);
  for (std::size_t l = 0; l < ledger.size(); ++l) {
    const double b = to_double(brute.by_level[l]);
    const double g = ledger[l].get_d();
    r.level_brute.push_back(b);
    r.level_ledger.push_back(g);
    if (ScalarOps<S>::kExact) {
      if (ScalarOps<S>::sign(S(brute.by_level[l] - ScalarOps<S>::from_rational(ledger[l]))) != 0) {
        r.exact_match = false;
        worst = std::max(worst, relative_gap(b, g));
      }
    } else {
      worst = std::max(worst, relative_gap(b, g));
    }
  }
  r.max_level_divergence = worst;
  if (worst > kLedgerTolerance) {
    throw std::runtime_error("ledger/brute-force divergence: relative gap " + std::to_string(worst));
  }
}

}  // namespace detail

/// int (Tw)^2 w^-1 / (p^2 (ln p)^2 int w) with the paper sign pattern.
template <Scalar S>
LowerBoundResult martingale_lower_bound(const AnnotatedWeight<S>& aw) {
  const WeightParams& prm = aw.params;
  const StepFunction<S> t = martingale_transform(aw.weight, paper_sign_pattern(aw));
  const StepFunction<S> h = combine(square(t), invert(aw.weight), [](const S& a, const S& b) { return a * b; });
  const LevelIntegrals<S> brute = integrals_by_level(aw, h);
  const LevelLedger ledger = moment_ledger(prm);

  LowerBoundResult r;
  r.quantity = "martingale";
  r.k = prm.k;
  r.levels = prm.levels;
  detail::compare_routes(r, brute, ledger.martingale, ledger.martingale_total());

  WeightParams full = prm;
  full.levels = static_cast<int>(prm.full_depth());
  const LevelLedger full_ledger = moment_ledger(full);
  r.full_levels = full.levels;
  r.ledger_full = full_ledger.martingale_total().get_d();
  r.truncation_gap = Rational(full_ledger.martingale_total() - ledger.martingale_total()).get_d();

  const double p = prm.p.get_d();
  const double lp = std::log(p);
  r.normalizer = p * p * lp * lp * prm.omega.get_d();
  r.ratio_brute = r.brute / r.normalizer;
  r.ratio_ledger = r.ledger / r.normalizer;
  r.ratio_full = r.ledger_full / r.normalizer;
  // per-level integral on A_l against omega k^2 p (1 - 4^{-(k-2)})^l, even levels
  const double base = 1.0 - std::ldexp(1.0, -2 * (prm.k - 2));
  for (int l = 0; l < prm.levels; l += 2) {
    const double scale = prm.omega.get_d() * prm.k * prm.k * p * std::pow(base, l);
    if (scale <= 0) continue;
    r.min_level_ratio = std::min(r.min_level_ratio, to_double(brute.on_specials[static_cast<std::size_t>(l)]) / scale);
  }
  return r;
}

/// int S^2w w^-1 / (p^2 ln p int w).
template <Scalar S>
LowerBoundResult square_lower_bound(const AnnotatedWeight<S>& aw) {
  const WeightParams& prm = aw.params;
  const StepFunction<S> s2 = square_function(aw.weight);
  const StepFunction<S> h = combine(s2, invert(aw.weight), [](const S& a, const S& b) { return a * b; });
  const LevelIntegrals<S> brute = integrals_by_level(aw, h);
  const LevelLedger ledger = moment_ledger(prm);

  LowerBoundResult r;
  r.quantity = "square";
  r.k = prm.k;
  r.levels = prm.levels;
  detail::compare_routes(r, brute, ledger.square, ledger.square_total());

  WeightParams full = prm;
  full.levels = static_cast<int>(prm.full_depth());
  const LevelLedger full_ledger = moment_ledger(full);
  r.full_levels = full.levels;
  r.ledger_full = full_ledger.square_total().get_d();
  r.truncation_gap = Rational(full_ledger.square_total() - ledger.square_total()).get_d();

  const double p = prm.p.get_d();
  r.normalizer = p * p * std::log(p) * prm.omega.get_d();
  r.ratio_brute = r.brute / r.normalizer;
  r.ratio_ledger = r.ledger / r.normalizer;
  r.ratio_full = r.ledger_full / r.normalizer;
  const double base = 1.0 - std::ldexp(1.0, -2 * (prm.k - 2));
  for (int l = 0; l < prm.levels; ++l) {
    const double scale = prm.omega.get_d() * prm.k * p * std::pow(base, l);
    if (scale <= 0) continue;
    r.min_level_ratio = std::min(r.min_level_ratio, to_double(brute.on_specials[static_cast<std::size_t>(l)]) / scale);
  }
  return r;
}

/// min over specials J in A_l of S^2w(J) / (k 3^{2l} omega^2).
template <Scalar S>
double square_on_specials_min(const AnnotatedWeight<S>& aw) {
  const StepFunction<S> s2 = square_function(aw.weight);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sp : aw.specials) {
    const Rational scale = aw.params.k * detail::pow3(2 * sp.level) * aw.params.omega * aw.params.omega;
    best = std::min(best, to_double(S(average(s2, sp.interval) / ScalarOps<S>::from_rational(scale))));
  }
  return best;
}

// ---------------------------------------------------------------------------
// A2 bracket

struct A2Check {
  double a2 = 0;
  double a2_over_p2 = 0;
  double chain_product = 0;  // <w><w^-1> on I_{k-2}
  double chain_bound = 0;    // (p / tau_w)(4/32)
  bool chain_exceeds = false;
  std::string a2_exact;
};

/// I_m: I_0 = root, I_{m+1} = I_m^{++}.
inline DyadicInterval chain_interval(int m) {
  DyadicInterval cur = DyadicInterval::root();
  for (int i = 0; i < m; ++i) cur = cur.right().right();
  return cur;
}

template <Scalar S>
A2Check a2_check(const AnnotatedWeight<S>& aw) {
  A2Check out;
  const S a2 = a2_characteristic(aw.weight);
  out.a2 = to_double(a2);
  out.a2_exact = ScalarOps<S>::to_string(a2);
  const double p = aw.params.p.get_d();
  out.a2_over_p2 = out.a2 / (p * p);
  const DyadicInterval ik2 = chain_interval(aw.params.k - 2);
  const S prod = average(aw.weight, ik2) * average(invert(aw.weight), ik2);
  const Rational bound = aw.params.p / aw.params.tau_w * Rational(4, 32);
  out.chain_product = to_double(prod);
  out.chain_bound = bound.get_d();
  out.chain_exceeds = ScalarOps<S>::from_rational(bound) < prod;
  return out;
}

// ---------------------------------------------------------------------------
// Maximal-function testing

namespace detail {

/// int_J M^d(w chi_J)^2 w^-1 for the subtree rooted at node `jn`.
template <Scalar S>
S testing_integral(const DyadicTree<S>& tree, int jn) {
  Accumulator<S> acc;
  struct Frame {
    int node;
    S best;
  };
  std::vector<Frame> stack{{jn, tree.average(tree.node(jn))}};
  const auto& leaves = tree.function().leaves();
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    const auto& n = tree.node(fr.node);
    const S best = scalar_max(fr.best, tree.average(n));
    if (n.is_leaf()) {
      const S& wv = leaves[static_cast<std::size_t>(n.leaf)].value;
      acc.add(best * best / wv * ScalarOps<S>::dyadic_length(n.interval.depth()));
      continue;
    }
    stack.push_back({n.right, best});
    stack.push_back({n.left, best});
  }
  return acc.value();
}

}  // namespace detail

struct TestingResult {
  double max_ratio = 0;
  std::string argmax;
  std::size_t intervals = 0;
};

/// max over dyadic J (tree nodes; finer intervals sit inside a constant leaf)
/// of int_J M^d(w chi_J)^2 w^-1 / (p^2 w(J)).
template <Scalar S>
TestingResult testing_ratio_max(const StepFunction<S>& w, const Rational& p) {
  const DyadicTree<S> tree(w);
  const S p2 = ScalarOps<S>::from_rational(Rational(p * p));
  TestingResult out;
  out.max_ratio = -1;
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const auto& n = tree.nodes()[i];
    const S ratio = detail::testing_integral(tree, static_cast<int>(i)) / (p2 * n.integral);
    const double r = to_double(ratio);
    if (r > out.max_ratio) {
      out.max_ratio = r;
      out.argmax = n.interval.path();
    }
  }
  out.intervals = tree.nodes().size();
  return out;
}

struct MaximalTestingResult {
  TestingResult testing;
  double maj = 0;        // max M^d w / w~
  double wn_i0 = 0;      // int_{I_0} w~^2 w^-1 / (p^2 w(I_0))
  double wn_im = 0;      // max over m of the same on I_m
  double wn_ik1 = 0;     // testing ratio on I_{k-1}
  double wn_ik1hat = 0;  // testing ratio on the parent of I_{k-1}
  double weight_over_majorant_off_base = 0;
  double weight_over_majorant = 0;
};

template <Scalar S>
double majorant_integral_ratio(const AnnotatedWeight<S>& aw, const StepFunction<S>& wt, const DyadicInterval& i) {
  const StepFunction<S> h =
      combine(square(wt), invert(aw.weight), [](const S& a, const S& b) { return a * b; });
  const S p2 = ScalarOps<S>::from_rational(Rational(aw.params.p * aw.params.p));
  return to_double(S(integral(h, i) / (p2 * integral(aw.weight, i))));
}

template <Scalar S>
double testing_ratio_at(const AnnotatedWeight<S>& aw, const DyadicInterval& j) {
  const StepFunction<S> m = maximal_function(aw.weight, j);
  const StepFunction<S> h = combine(square(m), invert(aw.weight), [](const S& a, const S& b) { return a * b; });
  const S p2 = ScalarOps<S>::from_rational(Rational(aw.params.p * aw.params.p));
  return to_double(S(integral(h, j) / (p2 * integral(aw.weight, j))));
}

template <Scalar S>
MaximalTestingResult maximal_testing(const AnnotatedWeight<S>& aw) {
  MaximalTestingResult out;
  out.testing = testing_ratio_max(aw.weight, aw.params.p);
  const StepFunction<S> wt = build_majorant(aw);
  const StepFunction<S> mw = maximal_function(aw.weight);
  for_each_common_cell(mw, wt, [&](const DyadicInterval&, const S& a, const S& b) {
    out.maj = std::max(out.maj, to_double(S(a / b)));
  });
  const auto& leaves = aw.weight.leaves();
  const auto& wl = wt.leaves();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const double r = to_double(S(leaves[i].value / wl[i].value));
    out.weight_over_majorant = std::max(out.weight_over_majorant, r);
    if (aw.tags[i].kind != RegionKind::kBase) {
      out.weight_over_majorant_off_base = std::max(out.weight_over_majorant_off_base, r);
    }
  }
  const int k = aw.params.k;
  if (aw.params.levels >= 1) {
    out.wn_i0 = majorant_integral_ratio(aw, wt, DyadicInterval::root());
    for (int m = 0; m <= k - 1; ++m) {
      out.wn_im = std::max(out.wn_im, majorant_integral_ratio(aw, wt, chain_interval(m)));
    }
    const DyadicInterval ik1 = chain_interval(k - 1);
    out.wn_ik1 = testing_ratio_at(aw, ik1);
    out.wn_ik1hat = testing_ratio_at(aw, ik1.parent());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weak-type distribution

struct WeakCheck {
  double max_ratio = 0;
  std::string argmax_interval;
  double argmax_relative_lambda = 0;
  double q = 0;  // a2 characteristic used as Q
  bool monotone = true;
  std::size_t evaluations = 0;
};

/// Relative lambda grid: lambda = r <w^-1>_J^2 for r in `relative`.
template <Scalar S>
WeakCheck weak_type_check(const AnnotatedWeight<S>& aw, const std::vector<Rational>& relative,
                          DeltaConvention conv = DeltaConvention::kDifference) {
  WeakCheck out;
  const StepFunction<S> inv = invert(aw.weight);
  const S q = a2_characteristic(aw.weight);
  out.q = to_double(q);
  std::vector<DyadicInterval> intervals{DyadicInterval::root()};
  for (const auto& f : aw.forming) {
    if (!f.interval.is_root()) intervals.push_back(f.interval);
  }
  for (const auto& j : intervals) {
    const StepFunction<S> f = haar_square_sum(inv, j, conv);
    const S v = average(inv, j);
    const S len = ScalarOps<S>::dyadic_length(j.depth());
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : relative) {
      const S lambda = ScalarOps<S>::from_rational(r) * v * v;
      const S dist = weak_distribution(f, aw.weight, lambda) / len;
      const double ratio = to_double(S(dist * lambda / (q * v)));
      const double d = to_double(dist);
      if (d > prev) out.monotone = false;
      prev = d;
      ++out.evaluations;
      if (ratio > out.max_ratio) {
        out.max_ratio = ratio;
        out.argmax_interval = j.path();
        out.argmax_relative_lambda = r.get_d();
      }
    }
  }
  return out;
}

/// Default relative grid 2^-8 .. 2^8 in powers of two (increasing).
std::vector<Rational> default_lambda_grid();

// ---------------------------------------------------------------------------
// Rubio de Francia properties

struct RdfCheck {
  int functions = 0;
  int terms = 0;
  double m_norm = 0;          // upper estimate used
  double m_lower = 0;         // structured-family lower estimate
  double max_norm_ratio = 0;  // ||Rg|| / ||g||
  double min_pointwise_gap = 0;      // min (Rg - g)
  double max_a1_violation = 0;       // max (M Rg - 2 M_norm Rg - tail), should be <= 0
  double max_iterate_ratio = 0;
  bool pointwise_ok = true;
  bool norm_ok = true;
  bool a1_ok = true;
};

/// Lower estimate of ||M^d|| on L^2(w^-1) from the functions w chi_J and chi_J.
template <Scalar S>
double maximal_norm_lower_estimate(const StepFunction<S>& w) {
  const StepFunction<S> v = invert(w);
  const DyadicTree<S> tree(w);
  double best = 1.0;
  for (const auto& n : tree.nodes()) {
    const StepFunction<S> chi = StepFunction<S>::indicator(n.interval);
    for (const StepFunction<S>& f : {combine(chi, w, [](const S& a, const S& b) { return a * b; }), chi}) {
      const double num = to_double(weighted_norm_sq(maximal_function(f), v));
      const double den = to_double(weighted_norm_sq(f, v));
      if (den > 0) best = std::max(best, std::sqrt(num / den));
    }
  }
  return best;
}

/// Safety factor between the structured lower estimate and the M_norm used in the series.
inline constexpr double kMaximalNormSafety = 2.0;

/// Properties of the normalized series for `count` random nonnegative g.
template <Scalar S>
RdfCheck rdf_check(const StepFunction<S>& w, int count, int terms, std::uint64_t seed) {
  RdfCheck out;
  out.functions = count;
  out.terms = terms;
  out.m_lower = maximal_norm_lower_estimate(w);
  out.m_norm = kMaximalNormSafety * out.m_lower;
  const S m_norm = ScalarOps<S>::from_rational(Rational(out.m_norm));
  const StepFunction<S> v = invert(w);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> value(0, 1000);
  std::uniform_int_distribution<int> depth(0, 3);
  out.min_pointwise_gap = std::numeric_limits<double>::infinity();
  out.max_a1_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    // random values on w's leaves, some of them split a few levels further
    std::vector<Leaf<S>> leaves;
    for (const auto& l : w.leaves()) {
      const int extra = std::min(depth(rng), DyadicInterval::kMaxDepth - l.interval.depth());
      const std::uint64_t pieces = std::uint64_t{1} << extra;
      for (std::uint64_t j = 0; j < pieces; ++j) {
        const DyadicInterval cell(l.interval.depth() + extra, (l.interval.index() << extra) | j);
        leaves.push_back({cell, ScalarOps<S>::from_rational(Rational(value(rng), 1000))});
      }
    }
    const StepFunction<S> g(std::move(leaves));
    const RubioDeFrancia<S> rg = rubio_de_francia(g, w, m_norm, terms);
    const double scale = std::max(1.0, to_double(max_value(rg.value)));
    const double tol = ScalarOps<S>::kExact ? 0.0 : 1e-12 * scale;

    const StepFunction<S> gap = combine(rg.value, g, [](const S& a, const S& b) { return a - b; });
    const double min_gap = to_double(min_value(gap));
    out.min_pointwise_gap = std::min(out.min_pointwise_gap, min_gap);
    out.pointwise_ok = out.pointwise_ok && min_gap >= -tol;

    const double gn = to_double(weighted_norm_sq(g, v));
    const double rn = to_double(weighted_norm_sq(rg.value, v));
    if (gn > 0) {
      const double ratio = std::sqrt(rn / gn);
      out.max_norm_ratio = std::max(out.max_norm_ratio, ratio);
      out.norm_ok = out.norm_ok && ratio <= 2.0;
    }

    const StepFunction<S> mr = maximal_function(rg.value);
    const S two_m = S(2) * m_norm;
    const StepFunction<S> excess = combine(combine(mr, rg.value, [&](const S& a, const S& b) { return a - two_m * b; }),
                                           rg.tail, [](const S& a, const S& b) { return a - b; });
    const double worst = to_double(max_value(excess));
    out.max_a1_violation = std::max(out.max_a1_violation, worst);
    out.a1_ok = out.a1_ok && worst <= tol;
    for (double r : rg.iterate_ratios) out.max_iterate_ratio = std::max(out.max_iterate_ratio, r);
  }
  return out;
}

}  // namespace del
