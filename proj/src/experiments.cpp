#include "del/experiments.hpp"

namespace del {

Rational LevelLedger::martingale_total() const {
  Rational t(0);
  for (const auto& v : martingale) t += v;
  return t;
}

Rational LevelLedger::square_total() const {
  Rational t(0);
  for (const auto& v : square) t += v;
  return t;
}

std::vector<Rational> chain_averages(const WeightParams& params) {
  const int k = params.k;
  std::vector<Rational> a(static_cast<std::size_t>(k));
  a[static_cast<std::size_t>(k - 1)] = (1 + params.tau_w) / (2 * params.p);
  for (int m = k - 2; m >= 0; --m) {
    const auto i = static_cast<std::size_t>(m);
    a[i] = 1 / (2 * params.p) + Rational(3, 4) + a[i + 1] / 4;
  }
  return a;
}

namespace {

// Moments over the forming intervals of one level: sum |K|, sum |K| c, sum |K| c^2
// for the inherited transform value c, and sum |K| s for the inherited square sum s.
struct Moments {
  Rational m0{1};
  Rational m1{0};
  Rational m2{0};
  Rational s1{0};

  [[nodiscard]] Rational quad(const Rational& shift) const { return m2 + 2 * shift * m1 + shift * shift * m0; }
  [[nodiscard]] Rational lin(const Rational& local) const { return s1 + local * m0; }
};

}  // namespace

LevelLedger moment_ledger(const WeightParams& params) {
  const int k = params.k;
  const int levels = params.levels;
  const Rational& p = params.p;
  const Rational& tau = params.tau_w;
  const auto km = static_cast<std::size_t>(k);
  const std::vector<Rational> unit_avg = chain_averages(params);

  LevelLedger out;
  out.levels = levels;
  Moments mom;
  Rational omega_l = params.omega;
  for (int l = 0; l <= levels; ++l) {
    if (l == levels) {
      const Rational sigma_l = p / omega_l;
      out.martingale.push_back(sigma_l * mom.m2);
      out.martingale_on_specials.emplace_back(0);
      out.square.push_back(sigma_l * mom.lin(omega_l * omega_l * (p - 1) / p));
      break;
    }
    std::vector<Rational> avg(km);
    for (std::size_t m = 0; m < km; ++m) avg[m] = unit_avg[m] * omega_l;
    const bool signed_level = l % 2 == 0;

    // own-row terms b_m and their prefix sums
    std::vector<Rational> b(km - 1, Rational(0));
    if (signed_level) {
      for (std::size_t m = 0; m + 1 < km; ++m) b[m] = (3 * omega_l - avg[m + 1]) / 2;
    }
    std::vector<Rational> prefix(km, Rational(0));
    for (std::size_t m = 1; m < km; ++m) prefix[m] = prefix[m - 1] + b[m - 1];

    // Haar amplitudes of K_m (alpha) and K_m^+ (beta) and their running square sums
    const Rational low = omega_l / p;
    std::vector<Rational> alpha(km);
    std::vector<Rational> beta(km - 1);
    for (std::size_t m = 0; m + 1 < km; ++m) {
      alpha[m] = ((3 * omega_l + avg[m + 1]) / 2 - low) / 2;
      beta[m] = (avg[m + 1] - 3 * omega_l) / 2;
    }
    alpha[km - 1] = (omega_l * tau / p - low) / 2;
    std::vector<Rational> sq_prefix(km, Rational(0));
    for (std::size_t m = 1; m < km; ++m) {
      sq_prefix[m] = sq_prefix[m - 1] + alpha[m - 1] * alpha[m - 1] + beta[m - 1] * beta[m - 1];
    }

    const Rational inv_low = p / omega_l;
    const Rational inv_special = p / (omega_l * tau);
    Rational mart(0);
    Rational sq(0);
    Moments next;
    next.m0 = 0;
    Rational quarter(1, 4);
    for (std::size_t m = 0; m + 1 < km; ++m) {
      // K_m^- has relative length 2 * 4^-(m+1), the forming child 4^-(m+1)
      const Rational rel = 2 * quarter;
      mart += rel * inv_low * mom.quad(prefix[m]);
      sq += rel * inv_low * mom.lin(sq_prefix[m] + alpha[m] * alpha[m]);
      const Rational shift = prefix[m] - b[m];
      next.m0 += quarter * mom.m0;
      next.m1 += quarter * (mom.m1 + shift * mom.m0);
      next.m2 += quarter * mom.quad(shift);
      next.s1 += quarter * mom.lin(sq_prefix[m] + alpha[m] * alpha[m] + beta[m] * beta[m]);
      quarter /= 4;
    }
    // K_{k-1}^- and K_{k-1}^+ each have relative length 4^-(k-1) / 2
    const Rational half = 2 * quarter;
    const Rational last_local = sq_prefix[km - 1] + alpha[km - 1] * alpha[km - 1];
    const Rational q_last = mom.quad(prefix[km - 1]);
    const Rational on_special = half * inv_special * q_last;
    mart += half * inv_low * q_last + on_special;
    sq += half * (inv_low + inv_special) * mom.lin(last_local);

    out.martingale.push_back(mart);
    out.martingale_on_specials.push_back(on_special);
    out.square.push_back(sq);
    mom = next;
    omega_l *= 3;
  }
  return out;
}

std::vector<Rational> default_lambda_grid() {
  std::vector<Rational> grid;
  for (int e = -8; e <= 8; ++e) grid.push_back(rational_pow(Rational(2), e));
  return grid;
}

}  // namespace del
