#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "del/step_function.hpp"

using namespace del;

namespace {

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

// Average over J summed directly from the leaves, in double.
double naive_average(const StepFunction<double>& f, const DyadicInterval& j) {
  double total = 0;
  for (const auto& l : f.leaves()) {
    if (j.contains(l.interval)) {
      total += l.value * l.interval.length_double();
    } else if (l.interval.contains(j)) {
      return l.value;
    }
  }
  return total / j.length_double();
}

StepFunction<double> random_function(std::mt19937_64& rng, int max_depth) {
  std::vector<Leaf<double>> leaves;
  std::uniform_real_distribution<double> value(-3, 3);
  std::bernoulli_distribution split(0.6);
  std::vector<DyadicInterval> stack{DyadicInterval::root()};
  while (!stack.empty()) {
    const DyadicInterval cur = stack.back();
    stack.pop_back();
    if (cur.depth() < max_depth && split(rng)) {
      stack.push_back(cur.right());
      stack.push_back(cur.left());
    } else {
      leaves.push_back({cur, value(rng)});
    }
  }
  return StepFunction<double>(std::move(leaves));
}

}  // namespace

TEST(DyadicInterval, PathRoundTrip) {
  const auto j = DyadicInterval::from_path("1011");
  EXPECT_EQ(j.depth(), 4);
  EXPECT_EQ(j.index(), 11U);
  EXPECT_EQ(j.path(), "1011");
  EXPECT_EQ(j.parent().path(), "101");
  EXPECT_EQ(j.left().path(), "10110");
  EXPECT_EQ(j.right().path(), "10111");
  EXPECT_TRUE(j.is_right_child());
  EXPECT_TRUE(DyadicInterval::root().is_root());
  EXPECT_EQ(DyadicInterval::root().path(), "");
}

TEST(DyadicInterval, ContainmentAndAncestors) {
  const auto a = DyadicInterval::from_path("10");
  const auto b = DyadicInterval::from_path("1001");
  EXPECT_TRUE(a.contains(b));
  EXPECT_FALSE(b.contains(a));
  EXPECT_TRUE(a.contains(a));
  EXPECT_EQ(b.ancestor(2), a);
  EXPECT_EQ(common_ancestor(b, DyadicInterval::from_path("1011")), a);
  EXPECT_EQ(common_ancestor(b, DyadicInterval::from_path("0")), DyadicInterval::root());
  EXPECT_DOUBLE_EQ(b.length_double(), 1.0 / 16);
}

TEST(DyadicInterval, DepthCapAndBadBits) {
  EXPECT_NO_THROW(DyadicInterval::from_path(std::string(64, '1')));
  EXPECT_THROW(DyadicInterval::from_path(std::string(65, '0')), std::out_of_range);
  EXPECT_THROW(DyadicInterval::from_path("012"), std::invalid_argument);
  EXPECT_THROW((void)DyadicInterval::from_path(std::string(64, '0')).left(), std::out_of_range);
  EXPECT_THROW((void)DyadicInterval::root().parent(), std::logic_error);
}

TEST(Rational, StringFormat) {
  EXPECT_EQ(rational_to_string(q(243, 23)), "243/23");
  EXPECT_EQ(rational_to_string(q(-6, 4)), "-3/2");
  EXPECT_EQ(parse_rational("243/23"), q(243, 23));
  EXPECT_EQ(parse_rational("5"), q(5));
  EXPECT_EQ(dyadic_length(5), q(1, 32));
}

TEST(QuadraticSurd, FieldArithmetic) {
  const QuadraticSurd r2 = QuadraticSurd::sqrt(q(2));
  EXPECT_EQ(r2 * r2, QuadraticSurd(2));
  const QuadraticSurd a = QuadraticSurd(1) + r2;
  const QuadraticSurd b = QuadraticSurd(1) - r2;
  EXPECT_EQ(a * b, QuadraticSurd(-1));
  EXPECT_EQ(a / a, QuadraticSurd(1));
  EXPECT_EQ(a.inverse(), -b);
  EXPECT_TRUE(QuadraticSurd::sqrt(q(9, 4)).is_rational());
  EXPECT_EQ(QuadraticSurd::sqrt(q(9, 4)), QuadraticSurd(q(3, 2)));
  EXPECT_EQ(QuadraticSurd::sqrt(q(8)), QuadraticSurd(0, 2, 2));
}

TEST(QuadraticSurd, SignAgreesWithDouble) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> num(-400, 400);
  std::uniform_int_distribution<long> den(1, 50);
  const Rational d = q(19, 7);
  for (int i = 0; i < 2000; ++i) {
    const Rational a = q(num(rng), den(rng));
    const Rational b = q(num(rng), den(rng));
    const QuadraticSurd x(a, b, d);
    const double oracle = a.get_d() + b.get_d() * std::sqrt(d.get_d());
    if (std::abs(oracle) > 1e-9) {
      EXPECT_EQ(x.sign(), oracle > 0 ? 1 : -1) << x.to_string();
    }
    EXPECT_NEAR(x.to_double(), oracle, 1e-12 * (1 + std::abs(oracle)));
  }
}

TEST(QuadraticSurd, ExactZeroDetected) {
  // 3 - sqrt(9) must be exactly zero; 1 + sqrt(2) - sqrt(2) too
  EXPECT_EQ((QuadraticSurd(3) - QuadraticSurd::sqrt(q(9))).sign(), 0);
  const QuadraticSurd r2 = QuadraticSurd::sqrt(q(2));
  EXPECT_EQ((QuadraticSurd(1) + r2 - r2 - QuadraticSurd(1)).sign(), 0);
}

TEST(QuadraticSurd, ParseRoundTrip) {
  for (const QuadraticSurd& x : {QuadraticSurd(q(7, 19)), QuadraticSurd(q(9), q(-9), q(12, 19)),
                                 QuadraticSurd(q(-1, 3), q(5, 2), q(3))}) {
    EXPECT_EQ(QuadraticSurd::parse(x.to_string()), x) << x.to_string();
  }
  EXPECT_THROW(QuadraticSurd::parse("1+2*sqrt(3"), std::invalid_argument);
}

TEST(QuadraticSurd, MixedFieldsRejected) {
  const QuadraticSurd a = QuadraticSurd::sqrt(q(2));
  const QuadraticSurd b = QuadraticSurd::sqrt(q(3));
  EXPECT_THROW(a + b, std::domain_error);
}

TEST(Accumulator, CompensatedSum) {
  Accumulator<double> acc;
  acc.add(1e16);
  acc.add(1.0);
  acc.add(-1e16);
  EXPECT_EQ(acc.value(), 1.0);
}

TEST(StepFunction, HandComputedAverages) {
  // f = 1 on [0,1/2), 3 on [1/2,3/4), 5 on [3/4,1)
  const StepFunction<QuadraticSurd> f({{DyadicInterval::from_path("0"), QuadraticSurd(1)},
                                       {DyadicInterval::from_path("10"), QuadraticSurd(3)},
                                       {DyadicInterval::from_path("11"), QuadraticSurd(5)}});
  EXPECT_EQ(average(f, DyadicInterval::root()), QuadraticSurd(q(5, 2)));
  EXPECT_EQ(average(f, DyadicInterval::from_path("1")), QuadraticSurd(4));
  EXPECT_EQ(average(f, DyadicInterval::from_path("01")), QuadraticSurd(1));
  EXPECT_EQ(integral(f, DyadicInterval::from_path("1")), QuadraticSurd(2));
  // amplitude is half the difference of the child averages
  EXPECT_EQ(haar_amplitude(f, DyadicInterval::root()), QuadraticSurd(q(3, 2)));
  EXPECT_EQ(haar_amplitude(f, DyadicInterval::from_path("1")), QuadraticSurd(1));
  EXPECT_EQ(haar_amplitude(f, DyadicInterval::from_path("0")), QuadraticSurd(0));
  // (f, h_J) = amplitude * sqrt|J|; odd depths leave the field
  EXPECT_EQ(haar_coefficient(f, DyadicInterval::from_path("10")), QuadraticSurd(0));
  EXPECT_EQ(haar_coefficient(f, DyadicInterval::root()), QuadraticSurd(q(3, 2)));
  EXPECT_THROW(haar_coefficient(f, DyadicInterval::from_path("1")), std::domain_error);
  const auto fd = from_text<double>(to_text(f));
  EXPECT_NEAR(haar_coefficient(fd, DyadicInterval::from_path("1")), std::sqrt(0.5), 1e-15);
}

TEST(StepFunction, TilingValidated) {
  using L = Leaf<double>;
  EXPECT_THROW(StepFunction<double>(std::vector<L>{{DyadicInterval::from_path("0"), 1.0}}), std::invalid_argument);
  EXPECT_THROW(StepFunction<double>(std::vector<L>{{DyadicInterval::from_path("0"), 1.0},
                                                   {DyadicInterval::from_path("00"), 1.0},
                                                   {DyadicInterval::from_path("1"), 1.0}}),
               std::invalid_argument);
}

TEST(StepFunction, TextRoundTrip) {
  const StepFunction<QuadraticSurd> f({{DyadicInterval::from_path("0"), QuadraticSurd(q(7, 19))},
                                       {DyadicInterval::from_path("1"), QuadraticSurd(q(9), q(-9), q(12, 19))}});
  const auto g = from_text<QuadraticSurd>(to_text(f));
  ASSERT_EQ(g.size(), 2U);
  EXPECT_EQ(g.leaves()[1].value, f.leaves()[1].value);
  const auto h = from_text<double>(to_text(f));
  EXPECT_NEAR(h.leaves()[1].value, 9 - 9 * std::sqrt(12.0 / 19), 1e-14);
  EXPECT_THROW(from_text<double>("0\t1\n"), std::invalid_argument);
}

TEST(StepFunctionProperty, AveragesMatchNaiveSum) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = random_function(rng, 7);
    const DyadicTree<double> tree(f);
    for (const auto& n : tree.nodes()) {
      EXPECT_NEAR(tree.average(n), naive_average(f, n.interval), 1e-12);
      EXPECT_NEAR(average(f, n.interval), naive_average(f, n.interval), 1e-12);
    }
  }
}

TEST(StepFunctionProperty, HaarExpansionReconstructs) {
  // f = <f> + sum_I amp_I (chi_{I+} - chi_{I-}) at every leaf
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = random_function(rng, 6);
    for (const auto& l : f.leaves()) {
      double value = average(f, DyadicInterval::root());
      DyadicInterval cur = l.interval;
      while (!cur.is_root()) {
        const DyadicInterval parent = cur.parent();
        value += (cur.is_right_child() ? 1 : -1) * haar_amplitude(f, parent);
        cur = parent;
      }
      EXPECT_NEAR(value, l.value, 1e-12);
    }
  }
}

TEST(StepFunctionProperty, IntegrateProductMatchesRefinement) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = random_function(rng, 6);
    const auto g = random_function(rng, 6);
    double oracle = 0;
    for (const auto& cell : common_refinement(f, g)) {
      oracle += f.value_at(cell) * g.value_at(cell) * cell.length_double();
    }
    EXPECT_NEAR(integrate_product(f, g), oracle, 1e-12);
  }
}
