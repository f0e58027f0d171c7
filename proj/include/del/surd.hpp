#pragma once

#include <gmpxx.h>

#include <compare>
#include <string>
#include <string_view>

namespace del {

using Rational = mpq_class;

/// Parses "a", "a/b", or a decimal-free signed rational.
Rational parse_rational(std::string_view text);

/// Always prints "a/b", including integers ("3/1").
std::string rational_to_string(const Rational& q);

/// 2^-depth as an exact rational.
Rational dyadic_length(int depth);

/// Exact element a + b*sqrt(d) of a real quadratic field, a, b, d rational.
///
/// Values with b == 0 are plain rationals and combine with any field; two
/// values with nonzero b must share the field (their radicands differ by a
/// rational square), otherwise arithmetic throws std::domain_error.
class QuadraticSurd {
 public:
  QuadraticSurd() = default;
  QuadraticSurd(long value) : a_(value) {}  // NOLINT(google-explicit-constructor)
  QuadraticSurd(Rational a) : a_(std::move(a)) {}  // NOLINT(google-explicit-constructor)
  QuadraticSurd(Rational a, Rational b, Rational radicand);

  /// sqrt(r) for a nonnegative rational r; folds perfect squares into the rational part.
  static QuadraticSurd sqrt(const Rational& r);

  [[nodiscard]] const Rational& rational_part() const { return a_; }
  [[nodiscard]] const Rational& irrational_part() const { return b_; }
  [[nodiscard]] const Rational& radicand() const { return d_; }
  [[nodiscard]] bool is_rational() const { return sgn(b_) == 0; }

  /// Exact sign via rationalization.
  [[nodiscard]] int sign() const;
  [[nodiscard]] double to_double() const;
  [[nodiscard]] QuadraticSurd inverse() const;

  /// "a/b" or "a/b+c/d*sqrt(n/m)" (the sign of c replaces the '+').
  [[nodiscard]] std::string to_string() const;
  static QuadraticSurd parse(std::string_view text);

  QuadraticSurd& operator+=(const QuadraticSurd& o);
  QuadraticSurd& operator-=(const QuadraticSurd& o);
  QuadraticSurd& operator*=(const QuadraticSurd& o);
  QuadraticSurd& operator/=(const QuadraticSurd& o) { return *this *= o.inverse(); }

  friend QuadraticSurd operator+(QuadraticSurd x, const QuadraticSurd& y) { return x += y; }
  friend QuadraticSurd operator-(QuadraticSurd x, const QuadraticSurd& y) { return x -= y; }
  friend QuadraticSurd operator*(QuadraticSurd x, const QuadraticSurd& y) { return x *= y; }
  friend QuadraticSurd operator/(QuadraticSurd x, const QuadraticSurd& y) { return x /= y; }
  QuadraticSurd operator-() const;

  friend bool operator==(const QuadraticSurd& x, const QuadraticSurd& y) {
    return (x - y).sign() == 0;
  }
  friend std::strong_ordering operator<=>(const QuadraticSurd& x, const QuadraticSurd& y) {
    const int s = (x - y).sign();
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  void normalize();
  // Rescales o's irrational part into this value's field; throws on mismatch.
  [[nodiscard]] Rational aligned_irrational(const QuadraticSurd& o) const;

  Rational a_{0};
  Rational b_{0};
  Rational d_{0};  // 0 whenever b_ == 0
};

inline QuadraticSurd abs(const QuadraticSurd& x) { return x.sign() < 0 ? -x : x; }

}  // namespace del
