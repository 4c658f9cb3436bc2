#include "epicast/evaluation.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <memory>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "epicast/csv.hpp"
#include "epicast/error.hpp"
#include "epicast/filter.hpp"

namespace epicast::evaluation {

MethodSpec MethodSpec::from_id(char id) {
  using forecast::LossKind;
  switch (id) {
    case 'A': return {'A', TrainingData::raw, LossKind::standard_mse};
    case 'B': return {'B', TrainingData::raw, LossKind::adaptive};
    case 'C': return {'C', TrainingData::smoothed, LossKind::standard_mse};
    case 'D': return {'D', TrainingData::smoothed, LossKind::adaptive};
    default: throw ValidationError(fmt::format("unknown method '{}' (expected A, B, C or D)", id));
  }
}

std::string to_string(TrainingData data) { return data == TrainingData::raw ? "raw" : "smoothed"; }
std::string to_string(GroundTruth truth) { return truth == GroundTruth::raw ? "raw" : "smoothed"; }

std::vector<MethodSpec> parse_methods(std::string_view list) {
  std::vector<MethodSpec> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto token = csv::trim(list.substr(pos, comma == std::string_view::npos ? list.size() - pos : comma - pos));
    if (token.size() != 1) throw ValidationError(fmt::format("bad method '{}' in list '{}'", token, list));
    const auto spec = MethodSpec::from_id(token[0]);
    if (std::find(out.begin(), out.end(), spec) != out.end()) {
      throw ValidationError(fmt::format("method {} listed twice", token));
    }
    out.push_back(spec);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError(fmt::format("mae: length mismatch ({} vs {})", y_true.size(), y_pred.size()));
  }
  if (y_true.empty()) throw ValidationError("mae: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) sum += std::abs(y_true[i] - y_pred[i]);
  return sum / static_cast<double>(y_true.size());
}

const ReportRow* EvalReport::find(std::string_view training_set, char method, std::string_view test_set,
                                  GroundTruth truth) const {
  for (const auto& r : rows) {
    if (r.training_set == training_set && r.method == method && r.test_set == test_set && r.ground_truth == truth) {
      return &r;
    }
  }
  return nullptr;
}

namespace {

constexpr std::size_t kWindow = epidata::kInputDays + epidata::kOutputDays;

/// A normalized series and, if requested, its optimally smoothed version.
struct Prepared {
  epidata::NormalizedCurve norm;
  std::vector<double> smoothed;  // normalized units; empty unless smoothing was run
  double cutoff = dsp::kNyquist;

  const std::vector<double>& series(TrainingData data) const {
    return data == TrainingData::smoothed ? smoothed : norm.values;
  }
};

Prepared prepare(std::span<const double> values, const std::string& region, bool smooth,
                 const dsp::ObjectiveParams& params) {
  Prepared p;
  p.norm = epidata::normalize(values, region);
  if (smooth) {
    if (values.size() < 8) {
      throw ValidationError(fmt::format("region '{}': {} days are too few to smooth", region, values.size()));
    }
    auto fr = dsp::optimize_cutoff(p.norm.values, params);
    p.smoothed = std::move(fr.smoothed);
    p.cutoff = fr.cutoff;
  }
  return p;
}

/// Window-aligned slices of `series` as training samples (input and target from the same series).
void append_samples(std::vector<epidata::Sample>& out, const std::vector<double>& series, const std::string& region) {
  auto s = epidata::extract_samples(series, epidata::kInputDays, epidata::kOutputDays, region);
  out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
}

/// Everything needed to score one test region.
struct TestRegion {
  std::string region_id;
  std::vector<double> raw_cases;
  std::vector<double> smoothed_cases;
  Prepared prepared;  // normalized post-split series, smoothed at its own cutoff
  std::size_t samples = 0;
};

std::vector<double> training_targets(const std::vector<epidata::Sample>& samples) {
  std::vector<double> t;
  for (const auto& s : samples) t.insert(t.end(), s.target_window.begin(), s.target_window.end());
  return t;
}

forecast::LstmModel fit(const std::vector<epidata::Sample>& samples, const MethodSpec& method,
                        const EvalConfig& config) {
  auto tc = config.train;
  tc.loss_kind = method.loss;
  std::optional<forecast::DensityHistogram> density;
  if (method.loss == forecast::LossKind::adaptive) {
    density = forecast::build_density(training_targets(samples), tc.density_bins);
  }
  return forecast::train(samples, tc, density ? &*density : nullptr).model;
}

/// MAE rows of one trained model on one test region, raw truth then smoothed truth.
std::array<ReportRow, 2> score(const forecast::LstmModel& model, const MethodSpec& method, const TestRegion& test,
                               std::string_view training_set, std::uint64_t seed) {
  const auto& input_series = test.prepared.series(method.training_data);
  std::vector<double> pred, raw_truth, smooth_truth;
  for (std::size_t k = 0; k < test.samples; ++k) {
    const std::size_t first = k * kWindow;
    const std::span<const double> input(input_series.data() + first, epidata::kInputDays);
    const auto y = forecast::predict(model, input, test.prepared.norm.scale, test.prepared.norm.offset);
    pred.insert(pred.end(), y.begin(), y.end());
    const std::size_t target = first + epidata::kInputDays;
    raw_truth.insert(raw_truth.end(), test.raw_cases.begin() + static_cast<std::ptrdiff_t>(target),
                     test.raw_cases.begin() + static_cast<std::ptrdiff_t>(target + epidata::kOutputDays));
    smooth_truth.insert(smooth_truth.end(), test.smoothed_cases.begin() + static_cast<std::ptrdiff_t>(target),
                        test.smoothed_cases.begin() + static_cast<std::ptrdiff_t>(target + epidata::kOutputDays));
  }
  ReportRow raw{std::string(training_set), method.id, test.region_id, GroundTruth::raw, mae(raw_truth, pred),
                test.samples, seed};
  ReportRow smoothed = raw;
  smoothed.ground_truth = GroundTruth::smoothed;
  smoothed.mae = mae(smooth_truth, pred);
  return {raw, smoothed};
}

/// Runs the jobs in order, or concurrently; results always come back in job order.
template <typename T>
std::vector<T> run_all(std::vector<std::function<T()>>& jobs, bool parallel) {
  std::vector<T> out;
  out.reserve(jobs.size());
  if (!parallel) {
    for (auto& j : jobs) out.push_back(j());
    return out;
  }
  std::vector<std::future<T>> futures;
  futures.reserve(jobs.size());
  for (auto& j : jobs) futures.push_back(std::async(std::launch::async, j));
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace

EvalReport run_method_matrix(std::span<const epidata::EpiCurve> train_curves,
                             std::span<const epidata::EpiCurve> test_curves, std::span<const MethodSpec> methods,
                             const EvalConfig& config) {
  config.train.validate();
  config.objective.validate();
  if (methods.empty()) throw ValidationError("no methods requested");
  if (test_curves.empty()) throw ValidationError("no test regions");

  std::set<std::string> train_ids;
  for (const auto& c : train_curves) train_ids.insert(c.region_id);
  for (const auto& c : test_curves) {
    if (train_ids.count(c.region_id)) {
      throw ValidationError(fmt::format("region '{}' is in both the training and the test set", c.region_id));
    }
  }
  const bool need_smoothing = std::any_of(methods.begin(), methods.end(),
                                          [](const auto& m) { return m.training_data == TrainingData::smoothed; });

  EvalReport report;
  report.seed = config.train.seed;
  report.config = config;
  report.methods.assign(methods.begin(), methods.end());

  // Generalized training samples, raw and smoothed.
  std::vector<epidata::Sample> train_raw, train_smooth;
  if (!train_curves.empty()) {
    for (const auto& c : train_curves) {
      report.training_regions.push_back(c.region_id);
      const auto pre = epidata::temporal_split(c, config.split_date).first;
      if (pre.size() < kWindow) continue;
      const auto p = prepare(pre, c.region_id, need_smoothing, config.objective);
      append_samples(train_raw, p.norm.values, c.region_id);
      if (need_smoothing) append_samples(train_smooth, p.smoothed, c.region_id);
    }
    if (train_raw.empty()) {
      throw ValidationError(fmt::format("training regions [{}]: no {}-day samples before {}",
                                        fmt::join(report.training_regions, ", "), kWindow,
                                        format_date(config.split_date)));
    }
    report.training_samples = train_raw.size();
  }

  std::vector<TestRegion> tests;
  for (const auto& c : test_curves) {
    report.test_regions.push_back(c.region_id);
    TestRegion t;
    t.region_id = c.region_id;
    t.raw_cases = epidata::temporal_split(c, config.split_date).second;
    if (t.raw_cases.size() < kWindow) {
      throw ValidationError(fmt::format("test region '{}': {} days after {}, need at least {}", c.region_id,
                                        t.raw_cases.size(), format_date(config.split_date), kWindow));
    }
    t.prepared = prepare(t.raw_cases, c.region_id, true, config.objective);
    t.smoothed_cases = t.prepared.norm.denormalize(t.prepared.smoothed);
    t.samples = t.raw_cases.size() / kWindow;
    report.test_cutoffs.push_back({c.region_id, t.prepared.cutoff});
    tests.push_back(std::move(t));
  }

  using Rows = std::vector<ReportRow>;
  std::vector<std::function<Rows()>> jobs;
  if (!train_curves.empty()) {
    for (const auto& m : methods) {
      jobs.push_back([&, m] {
        const auto model = fit(m.training_data == TrainingData::smoothed ? train_smooth : train_raw, m, config);
        Rows rows;
        for (const auto& t : tests) {
          for (auto& r : score(model, m, t, kGeneralized, config.train.seed)) rows.push_back(std::move(r));
        }
        return rows;
      });
    }
  }
  if (config.include_local) {
    for (std::size_t i = 0; i < test_curves.size(); ++i) {
      const auto& c = test_curves[i];
      const auto pre = epidata::temporal_split(c, config.split_date).first;
      if (pre.size() < kWindow) {
        throw ValidationError(fmt::format("local training for '{}': {} days before {}, need at least {}",
                                          c.region_id, pre.size(), format_date(config.split_date), kWindow));
      }
      auto p = std::make_shared<Prepared>(prepare(pre, c.region_id, need_smoothing, config.objective));
      for (const auto& m : methods) {
        jobs.push_back([&, m, p, i] {
          std::vector<epidata::Sample> samples;
          append_samples(samples, p->series(m.training_data), tests[i].region_id);
          const auto model = fit(samples, m, config);
          Rows rows;
          for (auto& r : score(model, m, tests[i], kLocal, config.train.seed)) rows.push_back(std::move(r));
          return rows;
        });
      }
    }
  }
  if (jobs.empty()) throw ValidationError("nothing to evaluate: no training regions and local mode is off");

  for (auto& rows : run_all(jobs, config.parallel)) {
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  return report;
}

std::optional<double> pooled_mae(const EvalReport& report, std::string_view training_set, char method,
                                 GroundTruth truth) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : report.rows) {
    if (r.training_set == training_set && r.method == method && r.ground_truth == truth) {
      sum += r.mae * static_cast<double>(r.n_samples);
      n += r.n_samples;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

StrategyComparison compare_training_strategies(const EvalReport& report) {
  StrategyComparison out;
  for (const auto& g : report.rows) {
    if (g.training_set != kGeneralized) continue;
    const auto* l = report.find(kLocal, g.method, g.test_set, g.ground_truth);
    if (l == nullptr) {
      throw ValidationError(fmt::format("no local row for method {} on '{}' ({} truth)", g.method, g.test_set,
                                        to_string(g.ground_truth)));
    }
    StrategyRatio r{g.test_set, g.method, g.ground_truth, l->mae, g.mae, 0.0};
    if (g.mae > 0.0) {
      r.ratio = l->mae / g.mae;
    } else {
      r.ratio = l->mae > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    out.ratios.push_back(std::move(r));
  }
  if (out.ratios.empty()) throw ValidationError("report has no generalized rows to compare");
  double sum = 0.0;
  for (const auto& r : out.ratios) sum += r.ratio;
  out.mean_ratio = sum / static_cast<double>(out.ratios.size());
  return out;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "training_set,method,test_set,ground_truth,mae,n_samples,seed\n";
  for (const auto& r : report.rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.training_set, r.method, csv::escape(r.test_set),
                       to_string(r.ground_truth), r.mae, r.n_samples, r.seed);
  }
}

nlohmann::json report_to_json(const EvalReport& report) {
  using nlohmann::json;
  const auto& c = report.config;
  json doc;
  doc["seed"] = report.seed;
  doc["config"] = {
      {"split_date", format_date(c.split_date)},
      {"include_local", c.include_local},
      {"objective", {{"a", c.objective.a}, {"b", c.objective.b}, {"grid_size", c.objective.grid_size},
                     {"psd_points", c.objective.psd_points}}},
      {"train", {{"learning_rate", c.train.learning_rate}, {"beta1", c.train.beta1}, {"beta2", c.train.beta2},
                 {"adam_epsilon", c.train.adam_epsilon}, {"batch_size", c.train.batch_size},
                 {"epochs", c.train.epochs}, {"hidden_size", c.train.hidden_size},
                 {"density_bins", c.train.density_bins}, {"seed", c.train.seed}}},
  };
  json methods = json::array();
  for (const auto& m : report.methods) {
    methods.push_back({{"id", std::string(1, m.id)}, {"training_data", to_string(m.training_data)},
                       {"loss", forecast::to_string(m.loss)}});
  }
  doc["methods"] = methods;
  doc["training_regions"] = report.training_regions;
  doc["training_samples"] = report.training_samples;
  doc["test_regions"] = report.test_regions;
  json cutoffs = json::object();
  for (const auto& rc : report.test_cutoffs) cutoffs[rc.region_id] = rc.cutoff;
  doc["test_cutoffs"] = cutoffs;

  json cells = json::object();
  for (const auto& r : report.rows) {
    cells[r.training_set][std::string(1, r.method)][r.test_set][to_string(r.ground_truth)] = {
        {"mae", r.mae}, {"n_samples", r.n_samples}};
  }
  doc["cells"] = cells;

  json pooled = json::object();
  for (const auto& set : {kGeneralized, kLocal}) {
    for (const auto& m : report.methods) {
      for (auto truth : {GroundTruth::raw, GroundTruth::smoothed}) {
        if (auto v = pooled_mae(report, set, m.id, truth)) {
          pooled[std::string(set)][std::string(1, m.id)][to_string(truth)] = *v;
        }
      }
    }
  }
  doc["pooled_mae"] = pooled;

  // Head-to-head ratios between methods that differ only in the loss.
  json ratios = json::object();
  auto ratio = [&](char num, char den, GroundTruth truth, const char* key) {
    const auto a = pooled_mae(report, kGeneralized, num, truth);
    const auto b = pooled_mae(report, kGeneralized, den, truth);
    if (a && b && *b > 0.0) ratios[key] = *a / *b;
  };
  ratio('B', 'A', GroundTruth::raw, "B_over_A_raw");
  ratio('D', 'C', GroundTruth::smoothed, "D_over_C_smoothed");
  ratio('D', 'B', GroundTruth::raw, "D_over_B_raw");
  ratio('D', 'B', GroundTruth::smoothed, "D_over_B_smoothed");
  doc["method_ratios"] = ratios;

  if (c.include_local && !report.training_regions.empty()) {
    const auto cmp = compare_training_strategies(report);
    json list = json::array();
    for (const auto& r : cmp.ratios) {
      list.push_back({{"region_id", r.region_id}, {"method", std::string(1, r.method)},
                      {"ground_truth", to_string(r.ground_truth)}, {"local_mae", r.local_mae},
                      {"generalized_mae", r.generalized_mae}, {"ratio", r.ratio}});
    }
    doc["strategy_comparison"] = {{"ratios", list}, {"mean_ratio", cmp.mean_ratio}};
  }
  return doc;
}

}  // namespace epicast::evaluation
