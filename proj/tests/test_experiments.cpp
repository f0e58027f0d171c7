#include <gtest/gtest.h>

#include <cmath>

#include "del/experiments.hpp"
#include "del/report.hpp"

using namespace del;

namespace {

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

}  // namespace

TEST(LowerBounds, BruteAndLedgerAgreeExactly) {
  for (auto [k, levels] : std::vector<std::pair<int, int>>{{2, 1}, {2, 6}, {3, 3}, {4, 2}}) {
    const auto aw = build_weight<QuadraticSurd>(make_params(k, levels));
    const LowerBoundResult m = martingale_lower_bound(aw);
    EXPECT_TRUE(m.exact_match) << "k=" << k;
    EXPECT_EQ(m.brute_exact, m.ledger_exact);
    EXPECT_LE(m.max_level_divergence, 1e-12);
    const LowerBoundResult s = square_lower_bound(aw);
    EXPECT_TRUE(s.exact_match) << "k=" << k;
    EXPECT_EQ(s.brute_exact, s.ledger_exact);
  }
}

TEST(LowerBounds, RegressionValues) {
  const auto a = build_weight<QuadraticSurd>(make_params(2, 8));
  EXPECT_EQ(martingale_lower_bound(a).brute_exact, "187083/38912");
  EXPECT_EQ(square_lower_bound(a).brute_exact, "338651/25536");
  const auto b = build_weight<QuadraticSurd>(make_params(3, 4));
  EXPECT_EQ(martingale_lower_bound(b).brute_exact, "37226591/953856");
  EXPECT_EQ(square_lower_bound(b).brute_exact, "541065305/5723136");
}

TEST(LowerBounds, FloatAgreesWithExact) {
  const auto e = martingale_lower_bound(build_weight<QuadraticSurd>(make_params(3, 3)));
  const auto f = martingale_lower_bound(build_weight<double>(make_params(3, 3)));
  EXPECT_NEAR(f.brute / e.brute, 1.0, 1e-9);
  EXPECT_NEAR(f.ledger / e.ledger, 1.0, 1e-9);
}

TEST(LowerBounds, IntegralsGrowWithDepth) {
  // signs sit on even levels only, so the transform grows every second level
  double prev_m = -1;
  double prev_s = 0;
  for (int levels = 0; levels <= 6; ++levels) {
    const auto aw = build_weight<QuadraticSurd>(make_params(2, levels));
    const double m = martingale_lower_bound(aw).brute;
    const double s = square_lower_bound(aw).brute;
    if (levels % 2 == 1) {
      EXPECT_GT(m, prev_m);
    } else {
      EXPECT_GE(m, prev_m);
    }
    EXPECT_GT(s, prev_s);
    prev_m = m;
    prev_s = s;
  }
}

TEST(LowerBounds, FullDepthLedgerDominatesTruncation) {
  const auto aw = build_weight<QuadraticSurd>(make_params(3, 4));
  const LowerBoundResult m = martingale_lower_bound(aw);
  EXPECT_EQ(m.full_levels, 64);
  EXPECT_GE(m.ledger_full, m.ledger);
  EXPECT_NEAR(m.ratio_ledger * m.normalizer, m.ledger, 1e-9 * m.ledger);
}

TEST(Rows, SmallestInstanceRatio) {
  const auto aw = build_weight<QuadraticSurd>(make_params(2, 6));
  const RowCheck r = row_check(aw);
  EXPECT_TRUE(r.all_terms_positive);
  EXPECT_NEAR(r.min_row_ratio, (13.0 / 57), 1e-15);
  EXPECT_LE(r.max_interference_ratio, 1.0);
}

TEST(Rows, TermsMatchHaarAmplitudes) {
  const auto aw = build_weight<QuadraticSurd>(make_params(3, 2));
  for (const auto& sp : aw.specials) {
    if (sp.level % 2 != 0) {
      EXPECT_THROW(row_contribution(aw, sp.interval), std::invalid_argument);
      continue;
    }
    const auto rc = row_contribution(aw, sp.interval);
    ASSERT_EQ(rc.terms.size(), sp.row.size());
    QuadraticSurd sum(0);
    for (std::size_t m = 0; m < sp.row.size(); ++m) {
      EXPECT_EQ(rc.terms[m], QuadraticSurd(0) - haar_amplitude(aw.weight, sp.row[m]));
      sum += rc.terms[m];
    }
    EXPECT_EQ(rc.total, sum);
  }
  EXPECT_THROW(row_contribution(aw, DyadicInterval::from_path("0")), std::invalid_argument);
}

TEST(A2, ValuesAndBounds) {
  const std::vector<std::pair<int, Rational>> expected{{2, q(31, 7)}, {3, q(2597, 69)}, {4, q(14237, 29)}};
  for (const auto& [k, a2] : expected) {
    const auto aw = build_weight<QuadraticSurd>(make_params(k, 2));
    const A2Check c = a2_check(aw);
    EXPECT_EQ(c.a2_exact, rational_to_string(a2));
    EXPECT_GE(c.a2_over_p2, 1.0 / 50);
    EXPECT_LE(c.a2_over_p2, 50.0);
    // the chain product never exceeds A2
    EXPECT_LE(c.chain_product, c.a2 * (1 + 1e-15));
  }
}

TEST(A2, ChainIntervals) {
  EXPECT_EQ(chain_interval(0), DyadicInterval::root());
  EXPECT_EQ(chain_interval(2).path(), "1111");
}

TEST(Maximal, TestingAndMajorant) {
  const auto aw = build_weight<QuadraticSurd>(make_params(2, 4));
  const MaximalTestingResult r = maximal_testing(aw);
  EXPECT_NEAR(r.testing.max_ratio, calibration::kTestingRatio, 1e-12);
  EXPECT_LE(r.maj, calibration::kMajorantFactor);
  EXPECT_GE(r.maj, 1.0);
}

TEST(Maximal, TestingIntegralMatchesDirectRoute) {
  // the tree walk equals building M^d(w chi_J) and integrating against w^-1
  const auto aw = build_weight<QuadraticSurd>(make_params(2, 2));
  const DyadicTree<QuadraticSurd> tree(aw.weight);
  const Rational p2 = aw.params.p * aw.params.p;
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const auto& n = tree.nodes()[i];
    const double direct = testing_ratio_at(aw, n.interval);
    const QuadraticSurd walk = detail::testing_integral(tree, static_cast<int>(i)) / (QuadraticSurd(p2) * n.integral);
    EXPECT_NEAR(walk.to_double(), direct, 1e-12 * direct);
  }
}

TEST(Weak, RatioBoundedAndMonotone) {
  for (int k = 2; k <= 3; ++k) {
    const auto aw = build_weight<QuadraticSurd>(make_params(k, 2));
    const WeakCheck w = weak_type_check(aw, default_lambda_grid());
    EXPECT_TRUE(w.monotone);
    EXPECT_GT(w.max_ratio, 0);
    EXPECT_LE(w.max_ratio, 11.04);
  }
}

TEST(Weak, LambdaGrid) {
  const auto grid = default_lambda_grid();
  ASSERT_EQ(grid.size(), 17U);
  EXPECT_EQ(grid.front(), q(1, 256));
  EXPECT_EQ(grid.back(), q(256));
}

TEST(Levels, Policies) {
  EXPECT_EQ(auto_levels(2, 1'000'000), 16);
  EXPECT_EQ(auto_levels(3, 1'000'000), 15);
  EXPECT_EQ(auto_levels(4, 1'000'000), 10);
  EXPECT_EQ(small_levels(2, 1'000'000), 4);
  EXPECT_EQ(small_levels(4, 1'000'000), 4);
  EXPECT_LE(construction_depth(4, auto_levels(4, 1'000'000)), 64);
  EXPECT_THROW(precheck_budget(5, 20, 1'000'000), std::length_error);
  EXPECT_THROW(precheck_budget(3, 10, 100), std::length_error);
  EXPECT_NO_THROW(precheck_budget(3, 4, 100));
}

TEST(Suites, Parse) {
  const SuiteSet all = SuiteSet::parse("all");
  EXPECT_TRUE(all.mart && all.square && all.maximal && all.weak);
  const SuiteSet two = SuiteSet::parse("mart,weak");
  EXPECT_TRUE(two.mart && two.weak);
  EXPECT_FALSE(two.square || two.maximal);
  EXPECT_EQ(two.to_string(), "mart,weak");
  EXPECT_THROW(SuiteSet::parse("bogus"), std::invalid_argument);
}

TEST(Report, EmptyCsvIsHeaderOnly) {
  EXPECT_EQ(to_csv({}), std::string(kCsvHeader) + "\n");
}

TEST(Report, ExperimentJsonCarriesExactStrings) {
  ExperimentConfig c;
  c.k = 3;
  c.levels = 2;
  c.suites = SuiteSet::parse("mart");
  const ExperimentReport r = run_experiment(c);
  const Json j = to_json(r);
  EXPECT_EQ(j["params"]["p"], "243/23");
  EXPECT_EQ(j["params"]["tau_w"], "3/23");
  EXPECT_FALSE(j.contains("seconds"));
  ASSERT_TRUE(r.ratio_mart_brute.has_value());
  EXPECT_EQ(*r.ratio_mart_brute, *r.ratio_mart_ledger);
  // every measurement names the operation that produced it
  for (const auto& m : r.measurements) EXPECT_FALSE(m.op.empty()) << m.name;
  const std::string csv = to_csv({r});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_NE(csv.find("3,2,1/64,3/23,243/23,"), std::string::npos);
}

TEST(Report, SweepIsDeterministic) {
  SweepConfig c;
  c.k_min = 2;
  c.k_max = 3;
  c.levels = 2;
  c.seed = 7;
  c.suites = SuiteSet::parse("all");
  const Json a = strip_timestamp(sweep_json(c, scaling_sweep(c)));
  const Json b = strip_timestamp(sweep_json(c, scaling_sweep(c)));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_FALSE(a.contains("timestamp"));
}

TEST(Report, UnwritablePathThrows) {
  EXPECT_THROW(write_file("/nonexistent-dir/x.json", "{}"), std::ios_base::failure);
}
