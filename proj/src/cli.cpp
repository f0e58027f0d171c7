#include "del/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "del/bellman.hpp"
#include "del/experiments.hpp"
#include "del/report.hpp"

namespace del::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string mode = "exact";
  std::uint64_t seed = 0;
  std::uint64_t budget_intervals = 1'000'000;
  double budget_seconds = 0;
  std::string csv;
  std::string json;
  std::string config;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DyadicInterval parse_interval(const std::string& text) {
  if (text == "root") return DyadicInterval::root();
  return DyadicInterval::from_path(text);
}

Mode parse_mode_flag(const std::string& s) {
  try {
    return parse_mode(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

Json envelope(const std::string& command, Json inputs, Json body, bool passed, double seconds) {
  Json doc{{"command", command}, {"inputs", std::move(inputs)}};
  for (auto& [key, value] : body.items()) doc[key] = value;
  doc["passed"] = passed;
  doc["versions"] = versions_json();
  doc["timestamp"] = Json{{"utc", utc_now()}, {"seconds_total", seconds}};
  return doc;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// params

int cmd_params(const Global& g, int k_min, int k_max, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (k_min < 2 || k_max < k_min) throw UsageError("invalid k range");
  Json rows = Json::array();
  bool ok = true;
  if (!g.quiet) out << "k\teps\ttau_w\tp\tresidual_1\tresidual_2\t6*eps*p\n";
  for (int k = k_min; k <= k_max; ++k) {
    const WeightParams p = solve_parameters(k);
    const auto [r1, r2] = parameter_residuals(p);
    const Rational six = 6 * p.eps * p.p;
    ok = ok && r1 == 0 && r2 == 0;
    if (!g.quiet) {
      out << k << '\t' << rational_to_string(p.eps) << '\t' << rational_to_string(p.tau_w) << '\t'
          << rational_to_string(p.p) << '\t' << rational_to_string(r1) << '\t' << rational_to_string(r2) << '\t'
          << fmt(six.get_d()) << '\n';
    }
    Json row = params_json(p);
    row.erase("levels");
    row["residual_1"] = rational_to_string(r1);
    row["residual_2"] = rational_to_string(r2);
    row["six_eps_p"] = rational_to_string(six);
    row["full_depth"] = p.full_depth();
    rows.push_back(row);
  }
  if (!g.json.empty()) {
    const Json doc = envelope("params", Json{{"k_min", k_min}, {"k_max", k_max}}, Json{{"rows", rows}}, ok,
                              elapsed(start));
    write_file(g.json, doc.dump(2) + "\n");
  }
  return ok ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// build-weight

template <Scalar S>
int build_weight_impl(const Global& g, int k, int levels, const Rational& omega, const std::string& out_path,
                      const std::string& signs_path, const std::string& sidecar, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  BuildLimits limits;
  limits.max_forming = g.budget_intervals;
  const AnnotatedWeight<S> aw = build_weight<S>(make_params(k, levels, omega), limits);
  write_file(out_path, to_text(aw.weight));
  if (!signs_path.empty()) write_file(signs_path, paper_sign_pattern(aw).to_text());

  const S avg = average(aw.weight, DyadicInterval::root());
  const S avg_inv = average(invert(aw.weight), DyadicInterval::root());
  const bool av_ok = ScalarOps<S>::kExact
                         ? ScalarOps<S>::sign(S(avg - ScalarOps<S>::from_rational(omega))) == 0 &&
                               ScalarOps<S>::sign(S(avg_inv - ScalarOps<S>::from_rational(aw.params.sigma))) == 0
                         : std::abs(to_double(avg) / omega.get_d() - 1) <= 1e-12 &&
                               std::abs(to_double(avg_inv) / aw.params.sigma.get_d() - 1) <= 1e-12;
  Json forming = Json::array();
  for (const auto& f : aw.forming) forming.push_back(Json{{"path", f.interval.path()}, {"level", f.level}});
  Json specials = Json::array();
  for (const auto& sp : aw.specials) {
    Json row = Json::array();
    for (const auto& r : sp.row) row.push_back(r.path());
    specials.push_back(Json{{"path", sp.interval.path()}, {"level", sp.level}, {"row", row}});
  }
  Json body{{"params", params_json(aw.params)},
            {"mode", to_string(ScalarOps<S>::kMode)},
            {"weight_file", out_path},
            {"leaves", aw.weight.size()},
            {"depth", construction_depth(k, levels)},
            {"average", ScalarOps<S>::to_string(avg)},
            {"average_inverse", ScalarOps<S>::to_string(avg_inv)},
            {"averages_match", av_ok},
            {"forming", forming},
            {"specials", specials}};
  const Json doc = envelope("build-weight", Json{{"k", k}, {"levels", levels}, {"omega", rational_to_string(omega)}},
                            body, av_ok, elapsed(start));
  write_file(sidecar, doc.dump(2) + "\n");
  if (!g.quiet) {
    out << "wrote " << aw.weight.size() << " leaves to " << out_path << " (<w> = " << ScalarOps<S>::to_string(avg)
        << ", <1/w> = " << ScalarOps<S>::to_string(avg_inv) << ")\n";
  }
  return av_ok ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// apply

struct ApplyArgs {
  std::string op;
  std::string input;
  std::string signs;
  std::string interval = "root";
  std::string convention = "haar";
  std::string g;
  int terms = 8;
  std::string m_norm = "auto";
  std::string out;
};

template <Scalar S>
int apply_impl(const Global& g, const ApplyArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const StepFunction<S> f = from_text<S>(read_file(a.input));
  const DyadicInterval j = parse_interval(a.interval);
  std::optional<StepFunction<S>> result;
  std::optional<S> scalar;
  if (a.op == "transform") {
    if (a.signs.empty()) throw UsageError("--op transform needs --signs");
    result = martingale_transform(f, SignPattern::from_text(read_file(a.signs)));
  } else if (a.op == "square") {
    DeltaConvention conv;
    if (a.convention == "haar") conv = DeltaConvention::kHaar;
    else if (a.convention == "difference") conv = DeltaConvention::kDifference;
    else throw UsageError("--convention must be haar or difference");
    result = haar_square_sum(f, j, conv);
  } else if (a.op == "maximal") {
    result = maximal_function(f, j);
  } else if (a.op == "rdf") {
    const StepFunction<S> g = a.g.empty() ? StepFunction<S>::indicator(DyadicInterval::root()) : from_text<S>(read_file(a.g));
    const S m = a.m_norm == "auto"
                    ? ScalarOps<S>::from_rational(Rational(kMaximalNormSafety * maximal_norm_lower_estimate(f)))
                    : ScalarOps<S>::parse(a.m_norm);
    result = rubio_de_francia(g, f, m, a.terms).value;
  } else if (a.op == "invert") {
    result = invert(f);
  } else if (a.op == "a2") {
    scalar = a2_characteristic(f);
  } else if (a.op == "a1") {
    scalar = a1_characteristic(f);
  } else if (a.op == "average") {
    scalar = average(f, j);
  } else {
    throw UsageError("unknown --op '" + a.op + "'");
  }
  Json body;
  if (result) {
    const std::string text = to_text(*result);
    if (a.out.empty()) out << text;
    else write_file(a.out, text);
    body = Json{{"leaves", result->size()}, {"output", a.out.empty() ? "stdout" : a.out}};
  } else {
    if (!g.quiet || a.out.empty()) out << a.op << '\t' << ScalarOps<S>::to_string(*scalar) << '\n';
    if (!a.out.empty()) write_file(a.out, ScalarOps<S>::to_string(*scalar) + "\n");
    body = Json{{"value", to_double(*scalar)}, {"exact", ScalarOps<S>::to_string(*scalar)}};
  }
  if (!g.json.empty()) {
    Json inputs{{"op", a.op}, {"input", a.input}, {"interval", a.interval}, {"mode", g.mode}};
    if (!a.signs.empty()) inputs["signs"] = a.signs;
    if (a.op == "square") inputs["convention"] = a.convention;
    if (a.op == "rdf") {
      inputs["g"] = a.g.empty() ? "1" : a.g;
      inputs["terms"] = a.terms;
      inputs["m_norm"] = a.m_norm;
    }
    write_file(g.json, envelope("apply", inputs, body, true, elapsed(start)).dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// experiment

int cmd_experiment(const Global& g, const std::string& suite, int k_min, int k_max, const std::string& levels,
                   std::ostream& out) {
  SweepConfig c;
  c.k_min = k_min;
  c.k_max = k_max;
  c.mode = parse_mode_flag(g.mode);
  c.seed = g.seed;
  c.budget_intervals = g.budget_intervals;
  c.budget_seconds = g.budget_seconds;
  try {
    c.suites = SuiteSet::parse(suite);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (levels != "auto") {
    try {
      std::size_t used = 0;
      c.levels = std::stoi(levels, &used);
      if (used != levels.size() || *c.levels < 0) throw std::invalid_argument("levels");
    } catch (const std::logic_error&) {
      throw UsageError("--levels must be auto or a nonnegative integer");
    }
  }
  if (c.k_min < 2 || c.k_max < c.k_min) throw UsageError("invalid k range");
  const SweepResult r = scaling_sweep(c);
  if (!g.csv.empty()) write_file(g.csv, to_csv(r.reports));
  if (!g.json.empty()) write_file(g.json, sweep_json(c, r).dump(2) + "\n");
  if (!g.quiet) {
    out << to_csv(r.reports);
    for (const auto& rep : r.reports) {
      for (const auto& ch : rep.checks) {
        if (!ch.pass) out << "FAIL k=" << rep.k << ' ' << ch.name << " value=" << fmt(ch.value) << '\n';
      }
      if (rep.incomplete) out << "INCOMPLETE k=" << rep.k << ": " << rep.incomplete_reason << '\n';
    }
    for (const auto& ch : r.checks) {
      if (!ch.pass) out << "FAIL " << ch.name << " value=" << fmt(ch.value) << '\n';
    }
    out << (r.passed() ? "all checks passed\n" : "some checks failed\n");
  }
  return r.passed() ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// bellman

struct BellmanArgs {
  std::string checks = "all";
  double Q = 10;
  std::string K = "auto";
  double c = 0.125;
  double c_phi = 0.01;
  double a0 = 1;
  double tau0 = 1e-3;
  int grid = 200;
  std::size_t samples = 100000;
};

int cmd_bellman(const Global& g, const BellmanArgs& a, std::ostream& out) {
  using namespace bellman;
  const auto start = std::chrono::steady_clock::now();
  BellmanParams p;
  p.Q = a.Q;
  p.c_drift = a.c;
  p.a0 = a.a0;
  p.tau0 = a.tau0;
  if (a.K != "auto") {
    try {
      p.K = std::stod(a.K);
    } catch (const std::logic_error&) {
      throw UsageError("--K must be auto or a positive number");
    }
    if (!(p.K > 0)) throw UsageError("--K must be auto or a positive number");
  }
  if (!(p.Q >= 1) || !(p.c_drift > 0 && p.c_drift <= 1) || !(p.a0 > 0) || !(p.tau0 > 0) || a.grid < 3 ||
      a.samples == 0) {
    throw UsageError("Bellman parameters out of range");
  }
  const std::vector<std::string> known{"hessian", "main", "obstacle", "phi", "u", "lines", "growth", "certificate"};
  std::vector<std::string> selected;
  {
    std::stringstream ss(a.checks);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "all") {
        selected = known;
      } else if (std::find(known.begin(), known.end(), item) != known.end()) {
        if (std::find(selected.begin(), selected.end(), item) == selected.end()) selected.push_back(item);
      } else {
        throw UsageError("unknown check '" + item + "'");
      }
    }
  }
  const GridSpec grid{a.grid, 1e-2, 1e2};
  Json results = Json::object();
  Json discrepancies = Json::object();
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok, Json body, const std::string& summary) {
    body["pass"] = ok;
    results[name] = std::move(body);
    all_ok = all_ok && ok;
    if (!g.quiet) out << name << ": " << (ok ? "pass" : "FAIL") << "  " << summary << '\n';
  };
  for (const auto& name : selected) {
    if (name == "hessian") {
      const HessianReport h = check_hessian_drift(p, grid);
      const bool ok = h.max_eig_analytic <= 1e-8 && h.max_eig_fd <= 1e-8 && h.max_corner_jump <= 1e-9;
      report(name, ok,
             Json{{"points", h.points},
                  {"excluded_corner", h.excluded_corner},
                  {"max_eig_analytic", h.max_eig_analytic},
                  {"max_eig_fd", h.max_eig_fd},
                  {"worst_point", Json::array({h.worst_gamma, h.worst_tau})},
                  {"corner_points", h.corner_points},
                  {"max_corner_jump", h.max_corner_jump}},
             "max eigenvalue " + fmt(h.max_eig_fd) + " on " + std::to_string(h.points) + " points");
    } else if (name == "main") {
      const MainInequalityReport m = check_main_inequality(p, a.samples, g.seed);
      Json examples = Json::array();
      for (const auto& v : m.examples) examples.push_back(Json{{"margin", v.margin}, {"point", v.point}});
      report(name, m.violations == 0,
             Json{{"K", p.k_value()},
                  {"theta_samples", m.theta_samples},
                  {"b_samples", m.b_samples},
                  {"violations", m.violations},
                  {"worst_margin", m.worst_margin},
                  {"examples", examples}},
             std::to_string(m.violations) + " violations, worst margin " + fmt(m.worst_margin));
    } else if (name == "obstacle") {
      const ObstacleReport o = check_obstacle(p, grid);
      report(name, o.holds,
             Json{{"K", p.k_value()},
                  {"delta", p.delta()},
                  {"strip_points", o.strip_points},
                  {"strip_failures", o.strip_failures},
                  {"omega_points", o.omega_points},
                  {"omega_failures", o.omega_failures},
                  {"region_fraction", o.region_fraction},
                  {"counterexample", o.counterexample}},
             std::to_string(o.strip_failures) + " strip failures");
    } else if (name == "phi") {
      const PhiReport r = check_phi_inequality(p, a.c_phi, a.grid, a.samples / 10, g.seed);
      const bool ok = r.violations == 0 && r.max_phi_second < 0 && r.max_ode_residual <= 1e-10;
      report(name, ok,
             Json{{"constant", a.c_phi},
                  {"tau0", p.tau0},
                  {"points", r.points},
                  {"violations", r.violations},
                  {"worst_margin", r.worst_margin},
                  {"tau0_star", r.tau0_star},
                  {"max_phi_second", r.max_phi_second},
                  {"max_ode_residual", r.max_ode_residual}},
             std::to_string(r.violations) + " violations, tau0* " + fmt(r.tau0_star) + ", ODE residual " +
                 fmt(r.max_ode_residual));
    } else if (name == "u") {
      const UReport u = check_u_inequality(a.samples, g.seed);
      const bool core = u.violations == 0 && u.min_t_second_difference >= -1e-12 &&
                        u.closed_form_corrected_error <= 1e-6;
      report(name, core,
             Json{{"points", u.points},
                  {"violations", u.violations},
                  {"worst_margin", u.worst_margin},
                  {"min_t_second_difference", u.min_t_second_difference},
                  {"closed_form_corrected_error", u.closed_form_corrected_error},
                  {"ratio09_min", u.ratio09_min},
                  {"ratio09_max", u.ratio09_max}},
             std::to_string(u.violations) + " violations, min second difference " +
                 fmt(u.min_t_second_difference));
      // known defects of the printed argument: recorded, not counted
      discrepancies["u_closed_form_stated"] =
          Json{{"relative_error", u.closed_form_stated_error}, {"matches", u.closed_form_stated_error <= 1e-6}};
      discrepancies["u_ratio09"] =
          Json{{"ratio_min", u.ratio09_min}, {"ratio_max", u.ratio09_max}, {"at_most_0.9", u.ratio09_max <= 0.9}};
      if (!g.quiet) {
        out << "  note: displayed second derivative off by " << fmt(u.closed_form_stated_error)
            << " relative; ratio bound 0.9 vs actual " << fmt(u.ratio09_max) << '\n';
      }
    } else if (name == "lines") {
      const LineReport l = check_line_concavity(p, a.samples / 100, g.seed);
      const ChangeOfVariablesReport c = check_change_of_variables(a.samples / 100, g.seed);
      const bool ok = l.max_second_difference <= 1e-10 && l.max_pullback_gap <= 1e-8 && c.max_round_trip <= 1e-12 &&
                      c.max_general_second <= 1e-10;
      report(name, ok,
             Json{{"lines", l.lines},
                  {"max_second_difference", l.max_second_difference},
                  {"max_pullback_gap", l.max_pullback_gap},
                  {"round_trip", c.max_round_trip},
                  {"curve_second_difference", c.max_curve_second},
                  {"family_second_difference", c.max_general_second}},
             "second difference " + fmt(l.max_second_difference) + ", pullback gap " + fmt(l.max_pullback_gap));
    } else if (name == "growth") {
      const GrowthReport r = check_growth(p, a.samples / 10, g.seed);
      const bool ok = r.max_homogeneity_error <= 1e-12 && r.max_growth_ratio <= 1 + 1e-12 &&
                      r.nonincreasing_in_lambda && r.nondecreasing_in_gamma;
      report(name, ok,
             Json{{"points", r.points},
                  {"max_homogeneity_error", r.max_homogeneity_error},
                  {"max_growth_ratio", r.max_growth_ratio},
                  {"nonincreasing_in_lambda", r.nonincreasing_in_lambda},
                  {"nondecreasing_in_gamma", r.nondecreasing_in_gamma}},
             "homogeneity " + fmt(r.max_homogeneity_error) + ", growth ratio " + fmt(r.max_growth_ratio));
    } else if (name == "certificate") {
      const AnnotatedWeight<double> aw = build_weight<double>(make_params(2, 3));
      BellmanParams cp = p;
      cp.Q = std::max(p.Q, a2_characteristic(aw.weight));
      const StepFunction<double> s2 = haar_square_sum(invert(aw.weight), DyadicInterval::root(),
                                                      DeltaConvention::kDifference);
      std::vector<double> values;
      for (const auto& l : s2.leaves()) values.push_back(l.value);
      std::nth_element(values.begin(), values.begin() + static_cast<long>(values.size() / 2), values.end());
      const double median = values[values.size() / 2];
      Json runs = Json::array();
      bool ok = true;
      for (double lambda : {median * cp.c_drift, median, 4 * median}) {
        Json run{{"lambda", lambda}};
        try {
          const Certificate c = bellman_induction_certificate(aw.weight, lambda, cp);
          run["certified_bound"] = c.certified_bound;
          run["stopped_sum"] = c.stopped_sum;
          run["actual"] = c.actual;
          run["growth_bound"] = c.growth_bound;
          run["worst_margin"] = c.worst_margin;
          run["dominates"] = c.dominates;
          ok = ok && c.dominates && c.within_growth;
        } catch (const std::runtime_error& e) {
          run["error"] = e.what();
          ok = false;
        }
        runs.push_back(run);
      }
      report(name, ok, Json{{"k", 2}, {"L", 3}, {"Q", cp.Q}, {"runs", runs}},
             std::to_string(runs.size()) + " thresholds");
    }
  }
  if (!g.json.empty()) {
    Json inputs{{"checks", a.checks}, {"Q", a.Q},       {"K", a.K},         {"K_value", p.k_value()},
                {"c", a.c},           {"c_phi", a.c_phi}, {"a0", a.a0},     {"tau0", a.tau0},
                {"grid", a.grid},     {"samples", a.samples}, {"seed", g.seed}};
    write_file(g.json, envelope("bellman", inputs, Json{{"checks", results}, {"discrepancies", discrepancies}}, all_ok, elapsed(start)).dump(2) + "\n");
  }
  return all_ok ? kOk : kCheckFailed;
}

bool present(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

}  // namespace

std::map<std::string, std::string> read_config(const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dyadic extremal weights: construction, operators, lower-bound experiments and Bellman checks", "del"};
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  Global g;
  app.add_option("--mode", g.mode, "exact or float arithmetic")->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--budget-intervals", g.budget_intervals, "maximum forming intervals per weight")
      ->check(CLI::PositiveNumber);
  app.add_option("--budget-seconds", g.budget_seconds, "wall-clock budget, 0 for none")->check(CLI::NonNegativeNumber);
  app.add_option("--csv", g.csv, "CSV output path");
  app.add_option("--json", g.json, "JSON output path");
  app.add_option("--config", g.config, "flat key=value file; flags override it");
  app.add_flag("--quiet", g.quiet, "suppress console output");

  int p_kmin = 2, p_kmax = 8, p_k = 0;
  auto* params = app.add_subcommand("params", "solve the weight parameters exactly");
  params->add_option("--k", p_k, "single k");
  params->add_option("--k-min", p_kmin, "smallest k");
  params->add_option("--k-max", p_kmax, "largest k");

  int b_k = 2, b_levels = 1;
  std::string b_omega = "1", b_out, b_signs;
  auto* build = app.add_subcommand("build-weight", "build the truncated weight and write it as text");
  build->add_option("--k", b_k, "construction parameter k")->required();
  build->add_option("--levels", b_levels, "recursion levels L")->required();
  build->add_option("--omega", b_omega, "average of w, a rational");
  build->add_option("--out", b_out, "weight text file")->required();
  build->add_option("--signs-out", b_signs, "also write the sign pattern used by the lower bound");

  ApplyArgs ap;
  auto* apply = app.add_subcommand("apply", "apply an operator to a weight file");
  apply->add_option("--op", ap.op, "transform|square|maximal|a2|a1|rdf|invert|average")->required();
  apply->add_option("--weight,--input", ap.input, "weight (step function text file)")->required();
  apply->add_option("--signs", ap.signs, "sign pattern file for transform");
  apply->add_option("--interval", ap.interval, "dyadic interval as path bits, or root");
  apply->add_option("--convention", ap.convention, "haar or difference, for square");
  apply->add_option("--g", ap.g, "step function for rdf (default 1)");
  apply->add_option("--terms", ap.terms, "series terms for rdf")->check(CLI::PositiveNumber);
  apply->add_option("--m-norm", ap.m_norm, "maximal norm for rdf: auto or a value");
  apply->add_option("--out", ap.out, "output file (stdout when omitted)");

  std::string e_suite = "all", e_levels = "auto";
  int e_kmin = 2, e_kmax = 4, e_k = 0;
  auto* experiment = app.add_subcommand("experiment", "run the lower-bound and testing experiments");
  experiment->add_option("--suite", e_suite, "mart|square|maximal|weak|all, comma separated");
  experiment->add_option("--k", e_k, "single k");
  experiment->add_option("--k-min", e_kmin, "smallest k");
  experiment->add_option("--k-max", e_kmax, "largest k");
  experiment->add_option("--levels", e_levels, "auto or a fixed L");

  BellmanArgs ba;
  auto* bell = app.add_subcommand("bellman", "numerical checks of the Bellman candidate");
  bell->add_option("--check", ba.checks, "hessian|main|obstacle|phi|u|lines|growth|certificate|all, comma separated");
  bell->add_option("--Q", ba.Q, "A2 bound");
  bell->add_option("--K", ba.K, "auto or the constant in Theta");
  bell->add_option("--c", ba.c, "drift constant of the main inequality");
  bell->add_option("--c-phi", ba.c_phi, "drift constant of the scalar phi inequality");
  bell->add_option("--a0", ba.a0, "obstacle threshold");
  bell->add_option("--tau0", ba.tau0, "smallness threshold for the phi inequality");
  bell->add_option("--grid", ba.grid, "grid points per axis");
  bell->add_option("--samples", ba.samples, "random samples");
  app.require_subcommand(0, 1);

  if (args_in.empty()) {
    out << app.help();
    return kOk;
  }

  std::vector<std::string> args = args_in;
  try {
    // merge the config file: keys become flags unless given on the command line
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty()) {
      CLI::App* sub = nullptr;
      std::size_t sub_pos = args.size();
      for (std::size_t i = 0; i < args.size(); ++i) {
        for (CLI::App* s : {params, build, apply, experiment, bell}) {
          if (args[i] == s->get_name()) {
            sub = s;
            sub_pos = i;
            break;
          }
        }
        if (sub != nullptr) break;
      }
      std::vector<std::string> extra;
      for (const auto& [key, value] : read_config(config_path)) {
        const std::string flag = "--" + key;
        const bool known = (key != "config" && app.get_option_no_throw(flag) != nullptr) ||
                           (sub != nullptr && sub->get_option_no_throw(flag) != nullptr);
        if (!known) throw UsageError("unknown config key '" + key + "'");
        if (!present(args, flag)) extra.push_back(flag + "=" + value);
      }
      const auto at = sub_pos == args.size() ? args.end() : args.begin() + static_cast<long>(sub_pos) + 1;
      args.insert(at, extra.begin(), extra.end());
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    err << "del: " << e.what() << '\n';
    return kUsage;
  } catch (const std::ios_base::failure& e) {
    err << "del: " << e.what() << '\n';
    return kIo;
  }

  try {
    if (params->parsed()) {
      if (p_k != 0) p_kmin = p_kmax = p_k;
      return cmd_params(g, p_kmin, p_kmax, out);
    }
    if (build->parsed()) {
      precheck_budget(b_k, b_levels, g.budget_intervals);
      Rational omega;
      try {
        omega = parse_rational(b_omega);
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--omega: ") + e.what());
      }
      if (omega <= 0) throw UsageError("--omega must be positive");
      const std::string sidecar = g.json.empty() ? b_out + ".json" : g.json;
      if (parse_mode_flag(g.mode) == Mode::kExact) {
        return build_weight_impl<QuadraticSurd>(g, b_k, b_levels, omega, b_out, b_signs, sidecar, out);
      }
      return build_weight_impl<double>(g, b_k, b_levels, omega, b_out, b_signs, sidecar, out);
    }
    if (apply->parsed()) {
      if (parse_mode_flag(g.mode) == Mode::kExact) return apply_impl<QuadraticSurd>(g, ap, out);
      return apply_impl<double>(g, ap, out);
    }
    if (experiment->parsed()) {
      if (e_k != 0) e_kmin = e_kmax = e_k;
      return cmd_experiment(g, e_suite, e_kmin, e_kmax, e_levels, out);
    }
    if (bell->parsed()) return cmd_bellman(g, ba, out);
    out << app.help();
    return kOk;
  } catch (const UsageError& e) {
    err << "del: " << e.what() << '\n';
    return kUsage;
  } catch (const std::length_error& e) {
    err << "del: budget exceeded: " << e.what() << '\n';
    return kUsage;
  } catch (const std::ios_base::failure& e) {
    err << "del: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    err << "del: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "del: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace del::cli
