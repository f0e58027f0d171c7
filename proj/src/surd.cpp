#include "del/surd.hpp"

#include <cctype>
#include <stdexcept>

namespace del {

namespace {

bool is_rational_square(const Rational& r) {
  return sgn(r) >= 0 && mpz_perfect_square_p(r.get_num_mpz_t()) != 0 &&
         mpz_perfect_square_p(r.get_den_mpz_t()) != 0;
}

Rational rational_sqrt_exact(const Rational& r) {
  mpz_class n, d;
  mpz_sqrt(n.get_mpz_t(), r.get_num_mpz_t());
  mpz_sqrt(d.get_mpz_t(), r.get_den_mpz_t());
  Rational out(n, d);
  out.canonicalize();
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  if (text.front() == '+') text.remove_prefix(1);
  for (char c : text) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-')) {
      throw std::invalid_argument("malformed rational literal: " + std::string(text));
    }
  }
  Rational q;
  if (q.set_str(std::string(text), 10) != 0) {
    throw std::invalid_argument("malformed rational literal: " + std::string(text));
  }
  if (sgn(q.get_den()) == 0) throw std::invalid_argument("zero denominator");
  q.canonicalize();
  return q;
}

std::string rational_to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational dyadic_length(int depth) {
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(depth));
  return Rational(mpz_class(1), den);
}

QuadraticSurd::QuadraticSurd(Rational a, Rational b, Rational radicand)
    : a_(std::move(a)), b_(std::move(b)), d_(std::move(radicand)) {
  if (sgn(d_) < 0) throw std::domain_error("negative radicand");
  normalize();
}

QuadraticSurd QuadraticSurd::sqrt(const Rational& r) {
  if (sgn(r) < 0) throw std::domain_error("square root of a negative rational");
  return QuadraticSurd(Rational(0), Rational(1), r);
}

void QuadraticSurd::normalize() {
  if (sgn(b_) == 0 || sgn(d_) == 0) {
    b_ = 0;
    d_ = 0;
    return;
  }
  if (is_rational_square(d_)) {
    a_ += b_ * rational_sqrt_exact(d_);
    b_ = 0;
    d_ = 0;
  }
}

Rational QuadraticSurd::aligned_irrational(const QuadraticSurd& o) const {
  if (o.is_rational()) return Rational(0);
  if (is_rational() || d_ == o.d_) return o.b_;
  // b_o sqrt(d_o) = b_o sqrt(d_o / d) sqrt(d)
  const Rational ratio = o.d_ / d_;
  if (!is_rational_square(ratio)) {
    throw std::domain_error("quadratic surds from different fields: sqrt(" + o.d_.get_str() +
                            ") vs sqrt(" + d_.get_str() + ")");
  }
  return o.b_ * rational_sqrt_exact(ratio);
}

QuadraticSurd& QuadraticSurd::operator+=(const QuadraticSurd& o) {
  a_ += o.a_;
  if (o.is_rational()) return *this;
  if (is_rational()) {
    b_ = o.b_;
    d_ = o.d_;
    return *this;
  }
  b_ += aligned_irrational(o);
  normalize();
  return *this;
}

QuadraticSurd& QuadraticSurd::operator-=(const QuadraticSurd& o) { return *this += -o; }

QuadraticSurd& QuadraticSurd::operator*=(const QuadraticSurd& o) {
  if (o.is_rational()) {
    a_ *= o.a_;
    b_ *= o.a_;
    normalize();
    return *this;
  }
  if (is_rational()) {
    b_ = a_ * o.b_;
    a_ *= o.a_;
    d_ = o.d_;
    normalize();
    return *this;
  }
  const Rational ob = aligned_irrational(o);
  const Rational na = a_ * o.a_ + b_ * ob * d_;
  const Rational nb = a_ * ob + b_ * o.a_;
  a_ = na;
  b_ = nb;
  normalize();
  return *this;
}

QuadraticSurd QuadraticSurd::operator-() const {
  QuadraticSurd r = *this;
  r.a_ = -r.a_;
  r.b_ = -r.b_;
  return r;
}

int QuadraticSurd::sign() const {
  const int sa = sgn(a_);
  const int sb = sgn(b_);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // opposite signs: compare a^2 with b^2 d
  const int cmp = ::cmp(Rational(a_ * a_), Rational(b_ * b_ * d_));
  if (cmp == 0) return 0;
  return cmp > 0 ? sa : sb;
}

double QuadraticSurd::to_double() const {
  if (is_rational()) return a_.get_d();
  mpf_class root(0, 256);
  mpf_class rad(d_, 256);
  mpf_sqrt(root.get_mpf_t(), rad.get_mpf_t());
  mpf_class value(a_, 256);
  value += mpf_class(b_, 256) * root;
  return value.get_d();
}

QuadraticSurd QuadraticSurd::inverse() const {
  if (sign() == 0) throw std::domain_error("division by zero in quadratic field");
  if (is_rational()) return QuadraticSurd(Rational(1 / a_));
  const Rational norm = a_ * a_ - b_ * b_ * d_;
  return QuadraticSurd(Rational(a_ / norm), Rational(-b_ / norm), d_);
}

std::string QuadraticSurd::to_string() const {
  std::string out = rational_to_string(a_);
  if (is_rational()) return out;
  if (sgn(b_) > 0) out += '+';
  out += rational_to_string(b_) + "*sqrt(" + rational_to_string(d_) + ")";
  return out;
}

QuadraticSurd QuadraticSurd::parse(std::string_view text) {
  text = trim(text);
  const auto star = text.find("*sqrt(");
  if (star == std::string_view::npos) return QuadraticSurd(parse_rational(text));
  if (text.back() != ')') throw std::invalid_argument("malformed surd literal: " + std::string(text));
  const std::string_view radicand = text.substr(star + 6, text.size() - star - 7);
  // the irrational coefficient starts at the last sign before '*sqrt('
  const auto split = text.substr(0, star).find_last_of("+-");
  if (split == std::string_view::npos || split == 0) {
    return QuadraticSurd(Rational(0), parse_rational(text.substr(0, star)), parse_rational(radicand));
  }
  const Rational a = parse_rational(text.substr(0, split));
  const Rational b = parse_rational(text.substr(split, star - split));
  return QuadraticSurd(a, b, parse_rational(radicand));
}

}  // namespace del
