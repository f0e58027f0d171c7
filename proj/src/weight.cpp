#include "del/weight.hpp"

#include <limits>

namespace del {

Rational rational_pow(const Rational& base, int exponent) {
  if (exponent < 0) return rational_pow(Rational(1 / base), -exponent);
  mpz_class num;
  mpz_class den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(exponent));
  Rational out(num, den);
  out.canonicalize();
  return out;
}

WeightParams solve_parameters(int k) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  if (k > 30) throw std::out_of_range("k too large");
  WeightParams params;
  params.k = k;
  params.eps = rational_pow(Rational(1, 4), k);
  const Rational& eps = params.eps;
  params.tau_w = 9 * eps / (1 + 5 * eps);
  // first identity solved for p
  params.p = (Rational(2, 3) * (1 - eps) + 2 * eps * params.tau_w) / (4 * eps);
  params.sigma = params.p / params.omega;
  return params;
}

WeightParams make_params(int k, int levels, const Rational& omega) {
  WeightParams params = solve_parameters(k);
  if (omega <= 0) throw std::invalid_argument("omega must be positive");
  params.omega = omega;
  params.sigma = params.p / omega;
  params.levels = levels;
  return params;
}

std::pair<Rational, Rational> parameter_residuals(const WeightParams& params) {
  const Rational& eps = params.eps;
  const Rational& tau = params.tau_w;
  const Rational& p = params.p;
  const Rational& sigma = params.sigma;
  Rational first = (Rational(2, 3) * (1 - eps) + 2 * eps * tau) / p - 4 * eps;
  Rational second = sigma / 3 * (Rational(1, 3) - Rational(4, 3) * eps) + sigma * Rational(2, 3) * (1 - eps) +
                    sigma / tau * 2 * eps - sigma;
  return {first, second};
}

std::uint64_t forming_interval_count(int k, int levels) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0;
  std::uint64_t layer = 1;
  const auto width = static_cast<std::uint64_t>(k - 1);
  for (int l = 0; l <= levels; ++l) {
    if (total > kMax - layer) return kMax;
    total += layer;
    if (width != 0 && layer > kMax / width) layer = kMax;
    else layer *= width;
  }
  return total;
}

int construction_depth(int k, int levels) {
  // each level descends to I_{k-2}^{+-}, 2k-2 below its forming interval; the base adds one
  const long long d = static_cast<long long>(2 * k - 2) * levels + 1;
  return d > std::numeric_limits<int>::max() ? std::numeric_limits<int>::max() : static_cast<int>(d);
}

Rational special_measure_closed_form(int k, int level) {
  const Rational ratio = Rational(1, 3) * (1 - rational_pow(Rational(1, 4), k - 1));
  return rational_pow(ratio, level) * 2 * rational_pow(Rational(1, 4), k);
}

}  // namespace del
