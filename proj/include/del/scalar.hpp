#pragma once

#include <charconv>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "del/surd.hpp"

namespace del {

enum class Mode { kExact, kFloat };

inline std::string to_string(Mode m) { return m == Mode::kExact ? "exact" : "float"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "exact") return Mode::kExact;
  if (s == "float") return Mode::kFloat;
  throw std::invalid_argument("mode must be exact or float");
}

/// Per-scalar-type glue used by the generic step-function code.
template <class S>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static constexpr bool kExact = false;
  static constexpr Mode kMode = Mode::kFloat;
  static double from_rational(const Rational& q) { return q.get_d(); }
  static double dyadic_length(int depth) { return std::ldexp(1.0, -depth); }
  static double sqrt_rational(const Rational& q) { return std::sqrt(q.get_d()); }
  static double to_double(double x) { return x; }
  static int sign(double x) { return (x > 0) - (x < 0); }
  static std::string to_string(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  }
  static double parse(std::string_view s) {
    double x = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return x;
    return QuadraticSurd::parse(s).to_double();  // exact literals such as 7/19
  }
};

template <>
struct ScalarOps<QuadraticSurd> {
  static constexpr bool kExact = true;
  static constexpr Mode kMode = Mode::kExact;
  static QuadraticSurd from_rational(const Rational& q) { return QuadraticSurd(q); }
  static QuadraticSurd dyadic_length(int depth) { return QuadraticSurd(del::dyadic_length(depth)); }
  static QuadraticSurd sqrt_rational(const Rational& q) { return QuadraticSurd::sqrt(q); }
  static double to_double(const QuadraticSurd& x) { return x.to_double(); }
  static int sign(const QuadraticSurd& x) { return x.sign(); }
  static std::string to_string(const QuadraticSurd& x) { return x.to_string(); }
  static QuadraticSurd parse(std::string_view s) { return QuadraticSurd::parse(s); }
};

template <class S>
concept Scalar = requires(S a, S b) {
  { a + b } -> std::convertible_to<S>;
  { a * b } -> std::convertible_to<S>;
  { a / b } -> std::convertible_to<S>;
  { a < b } -> std::convertible_to<bool>;
  ScalarOps<S>::kExact;
};

template <Scalar S>
S scalar_from(const Rational& q) {
  return ScalarOps<S>::from_rational(q);
}

template <Scalar S>
double to_double(const S& x) {
  return ScalarOps<S>::to_double(x);
}

/// Running sum: exact in exact mode, Neumaier-compensated in float mode.
template <Scalar S>
class Accumulator {
 public:
  void add(const S& x) { sum_ += x; }
  [[nodiscard]] S value() const { return sum_; }

 private:
  S sum_{0};
};

template <>
class Accumulator<double> {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <Scalar S>
S scalar_max(const S& a, const S& b) {
  return a < b ? b : a;
}

template <Scalar S>
S scalar_min(const S& a, const S& b) {
  return b < a ? b : a;
}

template <Scalar S>
S scalar_abs(const S& a) {
  return a < S(0) ? S(0) - a : a;
}

}  // namespace del
