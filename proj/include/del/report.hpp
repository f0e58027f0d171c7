#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "del/scalar.hpp"
#include "del/weight.hpp"
#include "json.hpp"

namespace del {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// Constants frozen from the smallest exact instance (k = 2, full depth 16).
/// Larger runs are measured against them.
namespace calibration {

inline const Rational kRowRatio{13, 57};         // min row / (k 3^{l+1} omega)
inline constexpr double kMartingaleRatio = 0.71388205417913309;  // int (Tw)^2 w^-1 / (p^2 ln^2 p)
inline constexpr double kSquareRatio = 1.959863910356225;        // int S^2w w^-1 / (p^2 ln p)
inline constexpr double kSquareOnSpecials = 1.1412742382271468;  // min S^2w / (k 3^{2l} omega^2) on specials
inline constexpr double kTestingRatio = 1.936813291589941;       // max testing ratio at L = 4
inline constexpr double kTolerance = 1e-9;                       // relative slack on comparisons
inline constexpr double kTestingSpread = 3.0;                    // allowed growth over the k = 2 value
inline constexpr double kMajorantFactor = 6.0;                   // M^d w <= 6 w~
inline constexpr double kA2Low = 1.0 / 50;
inline constexpr double kA2High = 50.0;

}  // namespace calibration

struct SuiteSet {
  bool mart = false;
  bool square = false;
  bool maximal = false;
  bool weak = false;

  /// mart | square | maximal | weak | all, comma separated.
  static SuiteSet parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
  [[nodiscard]] bool any() const { return mart || square || maximal || weak; }
};

struct ExperimentConfig {
  int k = 2;
  std::optional<int> levels;  // empty selects the level policy
  Mode mode = Mode::kExact;
  std::uint64_t seed = 0;
  SuiteSet suites;
  std::uint64_t budget_intervals = 1'000'000;
  double budget_seconds = 0;  // 0 means no limit
};

/// Default truncation: min(4^k, deepest level within the forming budget and the depth cap).
int auto_levels(int k, std::uint64_t budget_intervals);

/// Truncation used by the maximal and weak suites: min(4, auto).
int small_levels(int k, std::uint64_t budget_intervals);

/// Rejects (k, levels) pairs beyond the budget before any work; throws std::length_error.
void precheck_budget(int k, int levels, std::uint64_t budget_intervals);

/// One measured number with the operation and inputs that produced it.
struct Measurement {
  std::string name;
  std::string op;
  Json inputs;
  double value = 0;
  std::string exact;  // exact form when available
};

struct Check {
  std::string name;
  bool pass = false;
  double value = 0;
  double threshold = 0;
  std::string relation;  // "<=", ">=", "==", "in"
};

struct ExperimentReport {
  int k = 0;
  int levels = 0;
  int small_levels = 0;
  Mode mode = Mode::kExact;
  std::uint64_t seed = 0;
  SuiteSet suites;
  WeightParams params;
  std::vector<Measurement> measurements;
  std::vector<Check> checks;

  std::optional<double> a2;
  std::optional<double> ratio_mart_brute;
  std::optional<double> ratio_mart_ledger;
  std::optional<double> ratio_mart_full;
  std::optional<double> ratio_sq;
  std::optional<double> ratio_sq_full;
  std::optional<double> test_max;
  std::optional<double> weak_max;

  double seconds = 0;
  bool incomplete = false;
  std::string incomplete_reason;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] const Measurement* find(std::string_view name) const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

struct SweepConfig {
  int k_min = 2;
  int k_max = 4;
  std::optional<int> levels;
  Mode mode = Mode::kExact;
  std::uint64_t seed = 0;
  SuiteSet suites;
  std::uint64_t budget_intervals = 1'000'000;
  double budget_seconds = 0;
};

struct SweepResult {
  std::vector<ExperimentReport> reports;
  std::vector<Check> checks;  // trends across k
  bool incomplete = false;
  double seconds = 0;

  [[nodiscard]] bool passed() const;
};

/// Runs every selected suite for k in [k_min, k_max] and the cross-k checks.
SweepResult scaling_sweep(const SweepConfig& config);

/// Cross-k checks on finished reports (calibration floors, monotone trends, stability).
std::vector<Check> sweep_checks(const std::vector<ExperimentReport>& reports);

// ---------------------------------------------------------------------------
// Emission

inline constexpr const char* kCsvHeader =
    "k,L,eps,tau,p,a2,ratio_mart_brute,ratio_mart_ledger,ratio_sq,test_max,weak_max,seconds";

std::string to_csv(const std::vector<ExperimentReport>& reports);

Json to_json(const Check& c);
Json to_json(const Measurement& m);
Json params_json(const WeightParams& p);
Json versions_json();

/// Deterministic part of one report; wall-clock data goes under the top-level "timestamp".
Json to_json(const ExperimentReport& r);

/// Full experiment document: inputs, reports, cross-k checks, versions, timestamp.
Json sweep_json(const SweepConfig& config, const SweepResult& result);

/// The document without its "timestamp" member.
Json strip_timestamp(Json doc);

/// Writes text to a file; throws std::ios_base::failure when the path is unwritable.
void write_file(const std::string& path, const std::string& text);

/// ISO 8601 UTC wall-clock time.
std::string utc_now();

}  // namespace del
