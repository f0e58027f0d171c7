#include "del/bellman.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "del/operators.hpp"

namespace del::bellman {

namespace {

constexpr long double kSeriesCutoff = 2.0L;

long double phi_series(long double t) {
  // sum_n (-1)^n t^{2n+1} / (2n+1)!!
  const long double t2 = t * t;
  long double term = t;
  long double sum = t;
  for (int n = 1; n < 200; ++n) {
    term *= -t2 / static_cast<long double>(2 * n + 1);
    sum += term;
    if (std::abs(term) <= std::numeric_limits<long double>::epsilon() * std::abs(sum) * 1e-2L) break;
  }
  return sum;
}

long double phi_quadrature(long double t) {
  // substitute u = t - s: int_0^t exp(-u (2t - u) / 2) du; the integrand is below
  // exp(-u t / 2), so the range beyond 90/t is negligible
  const long double upper = std::min(t, 90.0L / t);
  auto f = [t](long double u) { return std::exp(-u * (2 * t - u) / 2); };
  return boost::math::quadrature::gauss_kronrod<long double, 31>::integrate(f, 0.0L, upper, 10, 1e-15L);
}

long double eig_max(long double a, long double b, long double d) {
  const long double mean = (a + d) / 2;
  const long double rad = std::sqrt((a - d) * (a - d) / 4 + b * b);
  return mean + rad;
}

// Step in tau for the smooth checks. phi is smooth at 0, so an absolute step
// balances truncation (h^4) against rounding (eps / h^2); tau / 4 keeps the
// stencil inside tau > 0.
long double fd_tau_step(long double t) { return std::min(3e-3L, t / 4); }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-sample generator, so results do not depend on the worker split.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix(seed ^ splitmix(index)));
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <class Report, class Fn, class Merge>
Report parallel_samples(std::size_t count, Fn&& fn, Merge&& merge) {
  const unsigned workers = std::max(1U, std::min<unsigned>(worker_count(), static_cast<unsigned>(count / 1000 + 1)));
  std::vector<Report> parts(workers);
  std::vector<std::thread> threads;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (workers == 1) {
      fn(lo, hi, parts[w]);
    } else {
      threads.emplace_back([&, lo, hi, w] { fn(lo, hi, parts[w]); });
    }
  }
  for (auto& t : threads) t.join();
  Report out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) merge(out, parts[i]);
  return out;
}

void record_violation(MainInequalityReport& r, double margin, std::vector<double> point) {
  r.worst_margin = std::min(r.worst_margin, margin);
  if (margin < -kMainTolerance) {
    ++r.violations;
    if (r.examples.size() < 5) r.examples.push_back({margin, std::move(point)});
  }
}

}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("DEL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

long double phi(long double t) {
  if (t < 0) throw std::domain_error("phi expects a nonnegative argument");
  if (t <= kSeriesCutoff) return phi_series(t);
  return phi_quadrature(t);
}

double phi(double t) { return static_cast<double>(phi(static_cast<long double>(t))); }

long double phi_prime(long double t) { return 1 - t * phi(t); }

long double phi_second(long double t) { return -phi(t) - t * phi_prime(t); }

double default_k(double Q, double a0) {
  // t phi(t) rises above 1 and then decreases back to 1, so the infimum over
  // [a0, inf) is min(a0 phi(a0), 1)
  return Q / std::min(a0 * phi(a0), 1.0);
}

double BellmanParams::k_value() const { return K > 0 ? K : default_k(Q, a0); }

bool in_hyperbolic_domain(double gamma, double tau_coord, double Q) {
  if (!(gamma > 0) || !(tau_coord > 0)) return false;
  const double prod = gamma * tau_coord;
  constexpr double slack = 1e-12;
  return prod >= 1 - slack && prod <= Q * (1 + slack);
}

long double theta_unchecked(long double gamma, long double tau_coord, long double K) {
  return std::min(gamma, K * phi(tau_coord));
}

double theta(double gamma, double tau_coord, const BellmanParams& params) {
  if (!in_hyperbolic_domain(gamma, tau_coord, params.Q)) throw std::domain_error("outside hyperbolic domain");
  return static_cast<double>(theta_unchecked(gamma, tau_coord, params.k_value()));
}

double bfun(double u, double v, double lambda, const BellmanParams& params) {
  if (lambda < 0) throw std::domain_error("lambda must be nonnegative");
  if (lambda == 0) return u;
  const double s = std::sqrt(lambda);
  return theta(u * s, v / s, params) / s;
}

double weak_type_constant(const BellmanParams& params) {
  return 1.0 / (params.c_drift * std::min(params.a0 * phi(params.a0), 1.0));
}

// ---------------------------------------------------------------------------
// Hessian with drift

std::array<double, 4> drift_matrix_analytic(double gamma, double tau_coord, const BellmanParams& params) {
  const long double K = params.k_value();
  const long double t = tau_coord;
  const long double ph = phi(t);
  long double th, th_g, th_t, th_tt;
  if (gamma <= K * ph) {
    th = gamma;
    th_g = 1;
    th_t = 0;
    th_tt = 0;
  } else {
    const long double p1 = 1 - t * ph;
    th = K * ph;
    th_g = 0;
    th_t = K * p1;
    th_tt = K * (-ph - t * p1);
  }
  const long double br = th_tt + th + t * th_t - static_cast<long double>(gamma) * th_g;
  return {0.0, 0.0, 0.0, static_cast<double>(br)};
}

std::array<double, 4> drift_matrix_fd(double gamma, double tau_coord, const BellmanParams& params) {
  const long double K = params.k_value();
  const long double g = gamma;
  const long double t = tau_coord;
  const long double hg = 1e-3L * g;
  const long double ht = fd_tau_step(t);
  // phi at t, t +- ht, t +- ht/2
  const long double p0 = phi(t);
  const long double pp = phi(t + ht);
  const long double pm = phi(t - ht);
  const long double pp2 = phi(t + ht / 2);
  const long double pm2 = phi(t - ht / 2);
  auto th = [K](long double gg, long double ph) { return std::min(gg, K * ph); };
  auto rich = [](long double coarse, long double fine) { return (4 * fine - coarse) / 3; };

  const long double f0 = th(g, p0);
  const long double gg1 = (th(g + hg, p0) - 2 * f0 + th(g - hg, p0)) / (hg * hg);
  const long double gg2 = (th(g + hg / 2, p0) - 2 * f0 + th(g - hg / 2, p0)) / (hg * hg / 4);
  const long double tt1 = (th(g, pp) - 2 * f0 + th(g, pm)) / (ht * ht);
  const long double tt2 = (th(g, pp2) - 2 * f0 + th(g, pm2)) / (ht * ht / 4);
  const long double g1 = (th(g + hg, p0) - th(g - hg, p0)) / (2 * hg);
  const long double g2 = (th(g + hg / 2, p0) - th(g - hg / 2, p0)) / hg;
  const long double t1 = (th(g, pp) - th(g, pm)) / (2 * ht);
  const long double t2 = (th(g, pp2) - th(g, pm2)) / ht;
  const long double gt1 =
      (th(g + hg, pp) - th(g + hg, pm) - th(g - hg, pp) + th(g - hg, pm)) / (4 * hg * ht);
  const long double gt2 = (th(g + hg / 2, pp2) - th(g + hg / 2, pm2) - th(g - hg / 2, pp2) + th(g - hg / 2, pm2)) /
                          (hg * ht);
  const long double t_gg = rich(gg1, gg2);
  const long double t_tt = rich(tt1, tt2);
  const long double t_g = rich(g1, g2);
  const long double t_t = rich(t1, t2);
  const long double t_gt = rich(gt1, gt2);
  const long double br = t_tt + f0 + t * t_t - g * t_g;
  return {static_cast<double>(t_gg), static_cast<double>(t_gt), static_cast<double>(t_gt), static_cast<double>(br)};
}

HessianReport check_hessian_drift(const BellmanParams& params, const GridSpec& grid) {
  HessianReport r;
  const long double K = params.k_value();
  r.max_eig_analytic = -1e300;
  r.max_eig_fd = -1e300;
  for (int i = 0; i < grid.n; ++i) {
    const double t = grid.tau_min * std::pow(grid.tau_max / grid.tau_min, static_cast<double>(i) / (grid.n - 1));
    const long double kp = K * phi(static_cast<long double>(t));
    const long double slope = std::abs(K * phi_prime(t));
    for (int j = 0; j < grid.n; ++j) {
      const double prod = 1 + (params.Q - 1) * static_cast<double>(j) / (grid.n - 1);
      const double g = prod / t;
      const long double margin = 10 * std::max<long double>(1e-3L * g, slope * fd_tau_step(t));
      if (std::abs(g - kp) < margin) {
        ++r.excluded_corner;
        continue;
      }
      ++r.points;
      const auto a = drift_matrix_analytic(g, t, params);
      const auto f = drift_matrix_fd(g, t, params);
      const double ea = static_cast<double>(eig_max(a[0], a[1], a[3]));
      const double ef = static_cast<double>(eig_max(f[0], f[1], f[3]));
      r.max_eig_analytic = std::max(r.max_eig_analytic, ea);
      if (ef > r.max_eig_fd) {
        r.max_eig_fd = ef;
        r.worst_tau = t;
        r.worst_gamma = g;
      }
    }
    // one-sided slopes across the corner gamma = K phi(t)
    const long double gc = kp;
    if (gc * t >= 1 && gc * t <= params.Q) {
      ++r.corner_points;
      const long double h = 1e-6L * t;
      const long double hg = 1e-6L * gc;
      const long double f0 = theta_unchecked(gc, t, K);
      const long double left_t = (f0 - theta_unchecked(gc, t - h, K)) / h;
      const long double right_t = (theta_unchecked(gc, t + h, K) - f0) / h;
      const long double left_g = (f0 - theta_unchecked(gc - hg, t, K)) / hg;
      const long double right_g = (theta_unchecked(gc + hg, t, K) - f0) / hg;
      r.max_corner_jump = std::max({r.max_corner_jump, static_cast<double>(right_t - left_t),
                                    static_cast<double>(right_g - left_g)});
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Main inequality

MainInequalityReport check_main_inequality(const BellmanParams& params, std::size_t samples, std::uint64_t seed) {
  const double Q = params.Q;
  const double K = params.k_value();
  const double c = params.c_drift;
  auto theta_raw = [K](double g, double t) { return static_cast<double>(theta_unchecked(g, t, K)); };

  auto work = [&](std::size_t lo, std::size_t hi, MainInequalityReport& rep) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto rng = sample_rng(seed, i);
      // Theta form on H; the tau spread is sampled directly so the midpoint usually stays in H
      const int kind = static_cast<int>(i % 10);
      double gm = 0, tm = 0, gp = 0, tp = 0;
      bool found = false;
      for (int attempt = 0; attempt < 200 && !found; ++attempt) {
        if (kind == 0) {
          // equality case
          tm = tp = log_uniform(rng, 1e-3, 1e3);
          gm = gp = uniform(rng, 1, Q) / tm;
        } else if (kind == 1) {
          // both points within 1e-3 of the corner curve
          tm = log_uniform(rng, std::max(1e-3, 1 / std::sqrt(K)), params.a0);
          tp = tm * log_uniform(rng, 1, 4);
          gm = static_cast<double>(K * phi(static_cast<long double>(tm))) * (1 + uniform(rng, -1e-3, 1e-3));
          gp = static_cast<double>(K * phi(static_cast<long double>(tp))) * (1 + uniform(rng, -1e-3, 1e-3));
        } else {
          // kind 2 keeps both points on the strip tau >= a0
          tm = kind == 2 ? log_uniform(rng, params.a0, 1e2) : log_uniform(rng, 1e-3, 1e3);
          tp = tm * log_uniform(rng, 1, kind == 2 ? 4 : 100);
          gm = uniform(rng, 1, Q) / tm;
          gp = uniform(rng, 1, Q) / tp;
        }
        if (uniform(rng, 0, 1) < 0.5) {
          std::swap(tm, tp);
          std::swap(gm, gp);
        }
        found = in_hyperbolic_domain(gm, tm, Q) && in_hyperbolic_domain(gp, tp, Q) &&
                in_hyperbolic_domain((gm + gp) / 2, (tm + tp) / 2, Q);
      }
      if (!found) continue;
      {
        const double gb = (gm + gp) / 2;
        const double tb = (tm + tp) / 2;
        const double s = std::sqrt(1 + c * (tp - tm) * (tp - tm));
        const double lhs = theta_raw(s * gb, tb / s) / s;
        const double rhs = (theta_raw(gm, tm) + theta_raw(gp, tp)) / 2;
        ++rep.theta_samples;
        record_violation(rep, (lhs - rhs) / std::max(1.0, std::abs(rhs)), {gm, tm, gp, tp});
      }
      // B form on Omega: the same pair mapped by u = gamma / sqrt(lambda), v = tau sqrt(lambda)
      {
        const double lambda = log_uniform(rng, 1e-4, 1e4);
        const double root = std::sqrt(lambda);
        const double um = gm / root, up = gp / root;
        const double vm = tm * root, vp = tp * root;
        const double lam_top = lambda + c * (vp - vm) * (vp - vm);
        auto b = [&](double u, double v, double l) {
          const double r = std::sqrt(l);
          return theta_raw(u * r, v / r) / r;
        };
        const double lhs = b((um + up) / 2, (vm + vp) / 2, lam_top);
        const double rhs = (b(um, vm, lambda) + b(up, vp, lambda)) / 2;
        ++rep.b_samples;
        record_violation(rep, (lhs - rhs) / std::max(1.0, std::abs(rhs)), {um, vm, up, vp, lambda});
      }
    }
  };
  auto merge = [](MainInequalityReport& a, const MainInequalityReport& b) {
    a.theta_samples += b.theta_samples;
    a.b_samples += b.b_samples;
    a.violations += b.violations;
    a.worst_margin = std::min(a.worst_margin, b.worst_margin);
    for (const auto& e : b.examples) {
      if (a.examples.size() < 5) a.examples.push_back(e);
    }
  };
  MainInequalityReport r = parallel_samples<MainInequalityReport>(samples, work, merge);
  r.samples = samples;
  return r;
}

// ---------------------------------------------------------------------------
// Obstacle

ObstacleReport check_obstacle(const BellmanParams& params, const GridSpec& grid) {
  ObstacleReport r;
  const long double K = params.k_value();
  std::size_t total = 0;
  std::size_t linear = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.n; ++i) {
    const double t = grid.tau_min * std::pow(grid.tau_max / grid.tau_min, static_cast<double>(i) / (grid.n - 1));
    const long double kp = K * phi(static_cast<long double>(t));
    for (int j = 0; j < grid.n; ++j) {
      const double prod = 1 + (params.Q - 1) * static_cast<double>(j) / (grid.n - 1);
      const double g = prod / t;
      ++total;
      const bool pinned = g <= kp;
      if (pinned) ++linear;
      if (t >= params.a0) {
        ++r.strip_points;
        if (!pinned) {
          ++r.strip_failures;
          const double gap = static_cast<double>(kp - g);
          if (gap < worst) {
            worst = gap;
            r.counterexample = {g, t};
          }
        }
      }
    }
    // worst case on the strip: gamma = Q / t exactly
    if (t >= params.a0) {
      ++r.strip_points;
      const double g = params.Q / t;
      if (g > kp) {
        ++r.strip_failures;
        const double gap = static_cast<double>(kp - g);
        if (gap < worst) {
          worst = gap;
          r.counterexample = {g, t};
        }
      }
    }
  }
  // Omega form: lambda <= delta v^2 gives B = u
  const double delta = params.delta();
  for (int i = 0; i < grid.n; ++i) {
    const double v = std::pow(10.0, -2 + 4.0 * i / (grid.n - 1));
    for (int j = 0; j < grid.n; ++j) {
      const double prod = 1 + (params.Q - 1) * static_cast<double>(j) / (grid.n - 1);
      const double u = prod / v;
      const double lambda = delta * v * v * (static_cast<double>(j % 7) + 1) / 7;
      ++r.omega_points;
      const double s = std::sqrt(lambda);
      const double b = static_cast<double>(theta_unchecked(u * s, v / s, K)) / s;
      if (std::abs(b - u) > 1e-12 * u) ++r.omega_failures;
    }
  }
  r.region_fraction = total == 0 ? 0.0 : static_cast<double>(linear) / static_cast<double>(total);
  r.holds = r.strip_failures == 0 && r.omega_failures == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Change of variables

namespace {

long double t_coord_of(long double t) { return std::exp(t * t / 2) * phi(t); }

long double tau_of_t_coord(long double target) {
  if (target <= 0) return 0;
  long double lo = 0;
  long double hi = 1;
  while (t_coord_of(hi) < target) {
    lo = hi;
    hi *= 2;
    if (hi > 100) throw std::domain_error("T coordinate out of range");
  }
  long double x = (lo + hi) / 2;
  for (int it = 0; it < 200; ++it) {
    const long double f = t_coord_of(x) - target;
    if (f > 0) hi = x;
    else lo = x;
    long double next = x - f / std::exp(x * x / 2);
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    if (std::abs(next - x) <= 4 * std::numeric_limits<long double>::epsilon() * std::max(1.0L, x)) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace

std::pair<double, double> change_of_variables(double gamma, double tau_coord) {
  const long double t = tau_coord;
  return {static_cast<double>(gamma * std::exp(t * t / 2)), static_cast<double>(t_coord_of(t))};
}

std::pair<double, double> inverse_change_of_variables(double Gamma, double T_coord) {
  const long double t = tau_of_t_coord(T_coord);
  return {static_cast<double>(Gamma * std::exp(-t * t / 2)), static_cast<double>(t)};
}

ChangeOfVariablesReport check_change_of_variables(std::size_t points, std::uint64_t seed) {
  ChangeOfVariablesReport r;
  for (std::size_t i = 0; i < points; ++i) {
    auto rng = sample_rng(seed, i);
    const double g = log_uniform(rng, 1e-3, 1e3);
    const double t = uniform(rng, 0, 5);
    const auto [G, T] = change_of_variables(g, t);
    const auto [g2, t2] = inverse_change_of_variables(G, T);
    r.max_round_trip = std::max({r.max_round_trip, std::abs(g2 - g) / g, std::abs(t2 - t) / std::max(t, 1e-300)});
    ++r.points;

    // curves C1 phi + C2 exp(-t^2/2) become lines Gamma = C1 T + C2
    const long double c1 = uniform(rng, 0.1, 10);
    const long double c2 = uniform(rng, -1, 1);
    const long double tc = uniform(rng, 0.2, 3);
    const long double tm = t_coord_of(tc);
    const long double step = 1e-2L * tm;
    long double gvals[3];
    for (int s = -1; s <= 1; ++s) {
      const long double tt = tau_of_t_coord(tm + s * step);
      gvals[s + 1] = std::exp(tt * tt / 2) * (c1 * phi(tt) + c2 * std::exp(-tt * tt / 2));
    }
    const long double second = std::abs(gvals[0] - 2 * gvals[1] + gvals[2]) / std::abs(gvals[1]);
    if (c2 == 0) {
      r.max_curve_second = std::max(r.max_curve_second, static_cast<double>(second));
    }
    r.max_general_second = std::max(r.max_general_second, static_cast<double>(second));
    // pure phi curve
    long double pvals[3];
    for (int s = -1; s <= 1; ++s) {
      const long double tt = tau_of_t_coord(tm + s * step);
      pvals[s + 1] = std::exp(tt * tt / 2) * phi(tt);
    }
    r.max_curve_second = std::max(
        r.max_curve_second, static_cast<double>(std::abs(pvals[0] - 2 * pvals[1] + pvals[2]) / std::abs(pvals[1])));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lines in (Gamma, T)

LineReport check_line_concavity(const BellmanParams& params, std::size_t lines, std::uint64_t seed) {
  LineReport r;
  const long double K = params.k_value();
  for (std::size_t i = 0; i < lines; ++i) {
    auto rng = sample_rng(seed, i);
    const long double C = uniform(rng, -K, 3 * K);
    const long double D = uniform(rng, -K, K);
    const long double t_lo = 0.05L;
    const long double t_hi = t_coord_of(3.0L);
    const int n = 64;
    const long double step = (t_hi - t_lo) / n;
    for (int j = 1; j < n; ++j) {
      const long double T = t_lo + step * j;
      auto F = [&](long double x) { return std::min(C * x + D, K * x); };
      const long double second = F(T + step) - 2 * F(T) + F(T - step);
      const long double scale = std::max(1.0L, std::abs(F(T)));
      r.max_second_difference = std::max(r.max_second_difference, static_cast<double>(second / scale));
    }
    ++r.lines;

    // pull back: along Gamma fixed, e^{t^2/2} U_TT = h'' + t h' + h = v^T M v, v = (-t gamma, 1)
    const double t0 = uniform(rng, 0.05, 3);
    const double g0 = uniform(rng, 1, params.Q) / t0;
    const long double kp = K * phi(static_cast<long double>(t0));
    if (std::abs(g0 - kp) < 1e-2L * g0) continue;
    const long double Gam = g0 * std::exp(static_cast<long double>(t0) * t0 / 2);
    auto h = [&](long double s) { return theta_unchecked(Gam * std::exp(-s * s / 2), s, K); };
    const long double ht = 1e-3L * t0;
    auto d2 = [&](long double hh) { return (h(t0 + hh) - 2 * h(t0) + h(t0 - hh)) / (hh * hh); };
    auto d1 = [&](long double hh) { return (h(t0 + hh) - h(t0 - hh)) / (2 * hh); };
    const long double hpp = (4 * d2(ht / 2) - d2(ht)) / 3;
    const long double hp = (4 * d1(ht / 2) - d1(ht)) / 3;
    const long double lhs = hpp + t0 * hp + h(t0);
    const auto m = drift_matrix_analytic(g0, t0, params);
    const long double vg = -static_cast<long double>(t0) * g0;
    const long double quad = vg * vg * m[0] + 2 * vg * m[1] + m[3];
    r.max_pullback_gap = std::max(r.max_pullback_gap, static_cast<double>(std::abs(lhs - quad)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// The scalar inequality for phi

namespace {

// (1/s) phi(mean / s) - (phi(t1) + phi(t2)) / 2 with s = sqrt(1 + c (t2 - t1)^2), relative.
long double phi_margin(long double t1, long double t2, long double c) {
  const long double s = std::sqrt(1 + c * (t2 - t1) * (t2 - t1));
  const long double lhs = phi((t1 + t2) / (2 * s)) / s;
  const long double rhs = (phi(t1) + phi(t2)) / 2;
  return (lhs - rhs) / std::max(std::abs(rhs), std::numeric_limits<long double>::min());
}

bool phi_grid_passes(long double tau0, long double c, int n) {
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      if (phi_margin(tau0 * i / n, tau0 * j / n, c) < -kMainTolerance) return false;
    }
  }
  return true;
}

}  // namespace

PhiReport check_phi_inequality(const BellmanParams& params, double constant, int grid, std::size_t samples,
                               std::uint64_t seed) {
  PhiReport r;
  const long double tau0 = params.tau0;
  auto note = [&](long double t1, long double t2) {
    const long double m = phi_margin(t1, t2, constant);
    ++r.points;
    r.worst_margin = std::min(r.worst_margin, static_cast<double>(m));
    if (m < -kMainTolerance) ++r.violations;
  };
  for (int i = 1; i <= grid; ++i) {
    for (int j = i; j <= grid; ++j) note(tau0 * i / grid, tau0 * j / grid);
  }
  for (std::size_t i = 0; i < samples; ++i) {
    auto rng = sample_rng(seed, i);
    long double a = uniform(rng, 0, params.tau0);
    long double b = uniform(rng, 0, params.tau0);
    if (a > b) std::swap(a, b);
    if (a <= 0) continue;
    note(a, b);
  }
  for (int i = 1; i <= grid; ++i) {
    r.max_phi_second = std::max(r.max_phi_second, static_cast<double>(phi_second(tau0 * i / grid)));
  }
  // largest passing tau0 on a coarser grid: doubling, then bisection
  constexpr int kSearchGrid = 60;
  constexpr long double kSearchCap = 64.0L;
  long double good = 0;
  long double bad = 0;
  for (long double t = 1e-3L; t <= kSearchCap; t *= 2) {
    if (phi_grid_passes(t, constant, kSearchGrid)) {
      good = t;
    } else {
      bad = t;
      break;
    }
  }
  if (bad > 0) {
    for (int it = 0; it < 30; ++it) {
      const long double mid = (good + bad) / 2;
      if (phi_grid_passes(mid, constant, kSearchGrid)) good = mid;
      else bad = mid;
    }
  }
  r.tau0_star = static_cast<double>(good);
  // ODE residual phi' + t phi - 1 with a five-point derivative
  for (int i = 0; i <= 1000; ++i) {
    const long double t = 10.0L * i / 1000;
    const long double h = 1e-3L;
    long double d;
    if (t < 2 * h) {
      d = (-25 * phi(t) + 48 * phi(t + h) - 36 * phi(t + 2 * h) + 16 * phi(t + 3 * h) - 3 * phi(t + 4 * h)) / (12 * h);
    } else {
      d = (phi(t - 2 * h) - 8 * phi(t - h) + 8 * phi(t + h) - phi(t + 2 * h)) / (12 * h);
    }
    r.max_ode_residual = std::max(r.max_ode_residual, static_cast<double>(std::abs(d + t * phi(t) - 1)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// The inequality for U(p, q) = phi(p / q) / q

long double u_function(long double p, long double q) { return phi(p / q) / q; }

UReport check_u_inequality(std::size_t samples, std::uint64_t seed) {
  UReport r;
  auto second_t = [](long double p, long double t) {
    auto g = [p](long double s) { return u_function(p, std::sqrt(s)); };
    auto d2 = [&](long double h) { return (g(t + h) - 2 * g(t) + g(t - h)) / (h * h); };
    const long double h = 1e-3L * t;
    return (4 * d2(h / 2) - d2(h)) / 3;
  };
  for (std::size_t i = 0; i < samples; ++i) {
    auto rng = sample_rng(seed, i);
    const long double q = log_uniform(rng, 0.5, 2);
    const long double p = q / 1000 * uniform(rng, 0, 1);
    const long double a = i % 10 == 0 ? 0.0L : p * uniform(rng, 0, 1);
    const long double q2 = std::sqrt(q * q - a * a / 100);
    const long double lhs = u_function(p, q);
    const long double rhs = (u_function(p + a, q2) + u_function(p - a, q2)) / 2;
    const long double margin = (lhs - rhs) / std::max(std::abs(rhs), std::numeric_limits<long double>::min());
    ++r.points;
    r.worst_margin = std::min(r.worst_margin, static_cast<double>(margin));
    if (margin < -kMainTolerance) ++r.violations;

    const double ratio = static_cast<double>(std::sqrt(q * q - a * a / 50) / q2);
    r.ratio09_max = std::max(r.ratio09_max, ratio);
    r.ratio09_min = std::min(r.ratio09_min, ratio);

    // convexity of t -> U(p, sqrt t) on [q^2/4, q^2]
    if (i % 20 == 0 && p > 0) {
      const int n = 50;
      const long double lo = q * q / 4;
      const long double step = (q * q - lo) / n;
      for (int j = 1; j < n; ++j) {
        const long double t = lo + step * j;
        const long double sd = u_function(p, std::sqrt(t + step)) - 2 * u_function(p, std::sqrt(t)) +
                                u_function(p, std::sqrt(t - step));
        r.min_t_second_difference = std::min(r.min_t_second_difference, static_cast<double>(sd));
      }
      // closed forms of d^2/dt^2 U(p, sqrt t) against finite differences
      const long double t = lo + (q * q - lo) * uniform(rng, 0.1, 0.9);
      const long double x = p / std::sqrt(t);
      const long double ph = phi(x);
      const long double fd = second_t(p, t);
      const long double stated =
          0.75L * std::pow(t, -2.5L) * ((1 - 2 * x * x - x * x * (1 - x * x)) * ph + 2 * x - x * x * x);
      const long double corrected = 0.25L * std::pow(t, -2.5L) * ((3 - 6 * x * x + x * x * x * x) * ph + 5 * x - x * x * x);
      r.closed_form_stated_error = std::max(r.closed_form_stated_error, static_cast<double>(std::abs(stated - fd) / std::abs(fd)));
      r.closed_form_corrected_error =
          std::max(r.closed_form_corrected_error, static_cast<double>(std::abs(corrected - fd) / std::abs(fd)));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Homogeneity, growth and monotonicity

GrowthReport check_growth(const BellmanParams& params, std::size_t samples, std::uint64_t seed) {
  GrowthReport r;
  const double K = params.k_value();
  for (std::size_t i = 0; i < samples; ++i) {
    auto rng = sample_rng(seed, i);
    const double u = log_uniform(rng, 1e-3, 1e3);
    const double v = uniform(rng, 1, params.Q) / u;
    const double lambda = log_uniform(rng, 1e-4, 1e4) * v * v;
    const double t = log_uniform(rng, 0.1, 10);
    const double b = bfun(u, v, lambda, params);
    const double bt = bfun(u * t, v / t, lambda / (t * t), params);
    r.max_homogeneity_error = std::max(r.max_homogeneity_error, std::abs(bt - t * b) / (t * b));
    r.max_growth_ratio = std::max(r.max_growth_ratio, b * lambda / (K * v));
    const double b_up = bfun(u, v, lambda * 1.1, params);
    if (b_up > b * (1 + 1e-15)) r.nonincreasing_in_lambda = false;
    const double g = u * std::sqrt(lambda);
    const double tc = v / std::sqrt(lambda);
    if (theta_unchecked(g * 1.01, tc, K) < theta_unchecked(g, tc, K)) r.nondecreasing_in_gamma = false;
    ++r.points;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Certificate

Certificate bellman_induction_certificate(const StepFunction<double>& w, double lambda, const BellmanParams& params) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  const StepFunction<double> inv = invert(w);
  const DyadicTree<double> tw(w);
  const DyadicTree<double> ti(inv);
  const double c = params.c_drift;
  Certificate cert;
  cert.lambda = lambda;
  const auto& root = tw.root();
  const double u0 = tw.average(root);
  const double v0 = ti.average(ti.root());
  cert.certified_bound = bfun(u0, v0, lambda, params);
  cert.growth_bound = params.k_value() * v0 / lambda;

  struct Frame {
    int node;
    double lam;
  };
  Accumulator<double> stopped;
  std::vector<Frame> stack{{0, lambda}};
  while (!stack.empty()) {
    const Frame fr = stack.back();
    stack.pop_back();
    const auto& n = tw.node(fr.node);
    if (n.is_leaf()) continue;
    const auto& ni = ti.node(fr.node);
    const double u = tw.average(n);
    const double v = ti.average(ni);
    const double vm = ti.average(ti.node(ni.left));
    const double vp = ti.average(ti.node(ni.right));
    const double need = c * (vp - vm) * (vp - vm);
    const double len = n.interval.length_double();
    if (fr.lam < need) {
      // every point of I exceeds the threshold: B must sit on the obstacle
      const double b = bfun(u, v, fr.lam, params);
      if (std::abs(b - u) > 1e-10 * std::max(1.0, u)) {
        throw std::runtime_error("obstacle condition fails at node " + n.interval.path());
      }
      ++cert.stopped_nodes;
      stopped.add(len * u);
      continue;
    }
    ++cert.internal_nodes;
    const double child_lam = fr.lam - need;
    const double um = tw.average(tw.node(n.left));
    const double up = tw.average(tw.node(n.right));
    const double lhs = bfun(u, v, fr.lam, params);
    const double rhs = (bfun(um, vm, child_lam, params) + bfun(up, vp, child_lam, params)) / 2;
    const double margin = (lhs - rhs) / std::max(1.0, std::abs(rhs));
    cert.worst_margin = std::min(cert.worst_margin, margin);
    if (margin < -1e-10) {
      throw std::runtime_error("main inequality fails at node " + (n.interval.is_root() ? std::string("(root)") : n.interval.path()) +
                               ": margin " + std::to_string(margin));
    }
    stack.push_back({n.right, child_lam});
    stack.push_back({n.left, child_lam});
  }
  cert.stopped_sum = stopped.value();
  const StepFunction<double> s = haar_square_sum(inv, DyadicInterval::root(), DeltaConvention::kDifference);
  cert.actual = weak_distribution(s, w, lambda / c);
  const double tol = 1e-12 * std::max(1.0, cert.certified_bound);
  cert.dominates = cert.actual <= cert.certified_bound + tol && cert.stopped_sum <= cert.certified_bound + tol;
  cert.within_growth = cert.certified_bound <= cert.growth_bound * (1 + 1e-12);
  return cert;
}

}  // namespace del::bellman
