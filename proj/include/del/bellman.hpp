#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "del/step_function.hpp"

namespace del::bellman {

/// phi(t) = exp(-t^2/2) int_0^t exp(s^2/2) ds: Maclaurin series up to 2,
/// adaptive Gauss-Kronrod quadrature beyond.
double phi(double tau_coord);
long double phi(long double tau_coord);

/// phi' = 1 - t phi and phi'' = -phi - t phi'.
long double phi_prime(long double tau_coord);
long double phi_second(long double tau_coord);

struct BellmanParams {
  double Q = 10;
  double K = 0;  // 0 selects the default Q / min(a0 phi(a0), 1)
  double c_drift = 0.125;
  double a0 = 1;
  double tau0 = 1e-3;

  [[nodiscard]] double k_value() const;
  /// Obstacle margin in (u, v, lambda) coordinates: lambda <= delta v^2 iff tau_coord >= a0.
  [[nodiscard]] double delta() const { return 1.0 / (a0 * a0); }
};

/// Q / min(a0 phi(a0), 1): the least K with K phi(t) >= Q / t for all t >= a0.
double default_k(double Q, double a0);

/// H = {gamma > 0, tau > 0, 1 <= gamma tau <= Q}, with a relative slack for rounding.
bool in_hyperbolic_domain(double gamma, double tau_coord, double Q);

/// min(gamma, K phi(tau)) on H.
double theta(double gamma, double tau_coord, const BellmanParams& params);
long double theta_unchecked(long double gamma, long double tau_coord, long double K);

/// lambda^{-1/2} Theta(u sqrt(lambda), v / sqrt(lambda)); lambda = 0 gives u.
double bfun(double u, double v, double lambda, const BellmanParams& params);

// ---------------------------------------------------------------------------
// Checks

struct GridSpec {
  int n = 200;
  double tau_min = 1e-2;
  double tau_max = 1e2;
};

struct HessianReport {
  std::size_t points = 0;
  std::size_t excluded_corner = 0;
  double max_eig_analytic = 0;
  double max_eig_fd = 0;
  double worst_tau = 0;
  double worst_gamma = 0;
  std::size_t corner_points = 0;
  double max_corner_jump = -1e300;  // one-sided slope jumps across gamma = K phi(tau); must be <= 0
};

HessianReport check_hessian_drift(const BellmanParams& params, const GridSpec& grid = {});

/// Drift matrix [[T_gg, T_gt], [T_gt, T_tt + T + t T_t - g T_g]] from the branch formulas.
std::array<double, 4> drift_matrix_analytic(double gamma, double tau_coord, const BellmanParams& params);
/// Same matrix from Richardson-extrapolated central differences in long double.
std::array<double, 4> drift_matrix_fd(double gamma, double tau_coord, const BellmanParams& params);

struct Violation {
  double margin = 0;
  std::vector<double> point;
};

struct MainInequalityReport {
  std::size_t samples = 0;
  std::size_t theta_samples = 0;
  std::size_t b_samples = 0;
  std::size_t violations = 0;
  double worst_margin = 1e300;  // relative: (lhs - rhs) / max(1, |rhs|)
  std::vector<Violation> examples;
};

/// Relative tolerance below which a margin counts as a violation.
inline constexpr double kMainTolerance = 1e-12;

MainInequalityReport check_main_inequality(const BellmanParams& params, std::size_t samples, std::uint64_t seed);

struct ObstacleReport {
  std::size_t strip_points = 0;
  std::size_t strip_failures = 0;
  std::size_t omega_points = 0;
  std::size_t omega_failures = 0;
  double region_fraction = 0;  // share of grid points of H with Theta = gamma
  bool holds = false;
  std::vector<double> counterexample;  // (gamma, tau) when the strip fails
};

ObstacleReport check_obstacle(const BellmanParams& params, const GridSpec& grid = {});

/// (Gamma, T) = (gamma e^{tau^2/2}, int_0^tau e^{s^2/2} ds) and its inverse.
std::pair<double, double> change_of_variables(double gamma, double tau_coord);
std::pair<double, double> inverse_change_of_variables(double Gamma, double T_coord);

struct ChangeOfVariablesReport {
  std::size_t points = 0;
  double max_round_trip = 0;      // relative
  double max_curve_second = 0;    // |(e^{t^2/2} phi)_TT| along phi-family curves
  double max_general_second = 0;  // C1 phi + C2 e^{-t^2/2} maps to a line
};

ChangeOfVariablesReport check_change_of_variables(std::size_t points, std::uint64_t seed);

struct LineReport {
  std::size_t lines = 0;
  double max_second_difference = -1e300;
  double max_pullback_gap = 0;  // |h'' + t h' + h - v^T M v| on sampled points
};

LineReport check_line_concavity(const BellmanParams& params, std::size_t lines, std::uint64_t seed);

struct PhiReport {
  std::size_t points = 0;
  std::size_t violations = 0;
  double worst_margin = 1e300;
  double tau0_star = 0;         // largest tau0 for which the grid passes (search capped)
  double max_phi_second = -1e300;  // phi'' on (0, tau0], must stay negative
  double max_ode_residual = 0;  // |phi' + t phi - 1| on [0, 10], phi' by 5-point differences
};

PhiReport check_phi_inequality(const BellmanParams& params, double constant, int grid, std::size_t samples,
                               std::uint64_t seed);

struct UReport {
  std::size_t points = 0;
  std::size_t violations = 0;
  double worst_margin = 1e300;
  double min_t_second_difference = 1e300;
  double closed_form_stated_error = 0;     // relative error of the displayed second derivative
  double closed_form_corrected_error = 0;  // relative error of 1/4 t^{-5/2}[(3-6x^2+x^4)phi + 5x - x^3]
  double ratio09_max = 0;                  // sqrt(q^2 - a^2/50) / sqrt(q^2 - a^2/100)
  double ratio09_min = 1e300;
};

UReport check_u_inequality(std::size_t samples, std::uint64_t seed);

/// U(p, q) = phi(p/q) / q.
long double u_function(long double p, long double q);

struct GrowthReport {
  std::size_t points = 0;
  double max_homogeneity_error = 0;  // |B(ut, v/t, lambda/t^2) - t B(u, v, lambda)| / (t B)
  double max_growth_ratio = 0;       // B lambda / (K v), at most 1
  bool nonincreasing_in_lambda = true;
  bool nondecreasing_in_gamma = true;
};

GrowthReport check_growth(const BellmanParams& params, std::size_t samples, std::uint64_t seed);

struct Certificate {
  double lambda = 0;
  double certified_bound = 0;  // B(root) |J|
  double stopped_sum = 0;      // sum over stopped nodes of |I| <w>_I
  double actual = 0;           // w{c sum Delta^2 > lambda}, computed directly
  double growth_bound = 0;     // K <w^-1> / lambda |J|
  std::size_t internal_nodes = 0;
  std::size_t stopped_nodes = 0;
  double worst_margin = 1e300;
  bool dominates = false;
  bool within_growth = false;
};

/// Tree induction along the proof of the weak-type estimate; throws with the
/// node address when the main inequality fails at a node.
Certificate bellman_induction_certificate(const StepFunction<double>& w, double lambda, const BellmanParams& params);

/// Weak-type constant recorded by the certificate chain: 1 / (c_drift a0 phi(a0)).
double weak_type_constant(const BellmanParams& params);

/// Worker count: DEL_THREADS when set, else hardware concurrency.
unsigned worker_count();

}  // namespace del::bellman
