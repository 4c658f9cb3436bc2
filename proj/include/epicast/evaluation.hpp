#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "epicast/calendar.hpp"
#include "epicast/density.hpp"
#include "epicast/epidata.hpp"
#include "epicast/smoothing.hpp"
#include "epicast/training.hpp"

namespace epicast::evaluation {

enum class TrainingData { raw, smoothed };

/// A = raw data + standard MSE, B = raw + adaptive,
/// C = smoothed + standard MSE, D = smoothed + adaptive.
struct MethodSpec {
  char id = 'A';
  TrainingData training_data = TrainingData::raw;
  forecast::LossKind loss = forecast::LossKind::standard_mse;

  static MethodSpec from_id(char id);
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

std::string to_string(TrainingData data);

/// "A,B,C,D" style list; whitespace around ids is ignored.
std::vector<MethodSpec> parse_methods(std::string_view list);

/// Mean absolute error. Throws on empty or mismatched input.
double mae(std::span<const double> y_true, std::span<const double> y_pred);

enum class GroundTruth { raw, smoothed };
std::string to_string(GroundTruth truth);

inline constexpr std::string_view kGeneralized = "generalized";
inline constexpr std::string_view kLocal = "local";

struct ReportRow {
  std::string training_set;  // "generalized" or "local"
  char method = 'A';
  std::string test_set;  // test region id
  GroundTruth ground_truth = GroundTruth::raw;
  double mae = 0.0;  // cases/day
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct EvalConfig {
  forecast::TrainConfig train;
  dsp::ObjectiveParams objective;
  Date split_date = Date{std::chrono::year{2021} / 3 / 1};
  /// Also train one model per test region on that region's own pre-split history.
  bool include_local = false;
  /// Run independent trainings on separate threads. Results do not depend on this.
  bool parallel = true;
};

struct RegionCutoff {
  std::string region_id;
  double cutoff = 0.0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::uint64_t seed = 0;
  std::vector<std::string> training_regions;
  std::vector<std::string> test_regions;
  std::size_t training_samples = 0;
  std::vector<RegionCutoff> test_cutoffs;  // smoothed ground truth cutoffs
  EvalConfig config;
  std::vector<MethodSpec> methods;

  const ReportRow* find(std::string_view training_set, char method, std::string_view test_set,
                        GroundTruth truth) const;
};

/// Trains every method on the pre-split part of `train_curves` and scores it on
/// the post-split part of `test_curves`. Each series is 0-1 normalized on its
/// own and, for smoothed methods, filtered at its own optimized cutoff. Test
/// predictions are scored against the raw post-split cases and against the
/// same cases smoothed at the test curve's own cutoff.
///
/// Train and test region sets must be disjoint. Throws ValidationError naming
/// the region set when no samples can be extracted.
EvalReport run_method_matrix(std::span<const epidata::EpiCurve> train_curves,
                             std::span<const epidata::EpiCurve> test_curves,
                             std::span<const MethodSpec> methods, const EvalConfig& config);

/// MAE over every forecast day of every test region, i.e. rows weighted by n_samples.
/// nullopt when no matching row exists.
std::optional<double> pooled_mae(const EvalReport& report, std::string_view training_set, char method,
                                 GroundTruth truth);

struct StrategyRatio {
  std::string region_id;
  char method = 'A';
  GroundTruth ground_truth = GroundTruth::raw;
  double local_mae = 0.0;
  double generalized_mae = 0.0;
  double ratio = 0.0;  // local / generalized; > 1 means generalized training did better
};

struct StrategyComparison {
  std::vector<StrategyRatio> ratios;
  double mean_ratio = 0.0;
};

/// Ratio local/generalized for every generalized row. Throws if a local row is missing.
StrategyComparison compare_training_strategies(const EvalReport& report);

/// One row per cell: training_set,method,test_set,ground_truth,mae,n_samples,seed
void write_report_csv(std::ostream& out, const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace epicast::evaluation
