#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "epicast/alerts.hpp"
#include "epicast/cli.hpp"
#include "epicast/error.hpp"
#include "epicast/evaluation.hpp"
#include "epicast/filter.hpp"
#include "epicast/lstm.hpp"
#include "epicast/smoothing.hpp"
#include "epicast/synthetic.hpp"
#include "epicast/training.hpp"

namespace epicast::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<std::size_t> grid_size;
  std::optional<std::size_t> epochs;
  std::optional<std::string> methods;
  std::optional<std::string> cases;
  std::optional<std::string> metadata;
  std::optional<std::string> model;
};

RunConfig effective_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.a) c.objective.a = *f.a;
  if (f.b) c.objective.b = *f.b;
  if (f.grid_size) c.objective.grid_size = *f.grid_size;
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.methods) c.methods = evaluation::parse_methods(*f.methods);
  if (f.cases) c.cases = *f.cases;
  if (f.metadata) c.metadata = *f.metadata;
  if (f.model) c.model = *f.model;
  c.finalize();
  return c;
}

/// Region-level failures collected over a batch command.
struct Failures {
  std::vector<std::pair<std::string, std::string>> items;

  void add(std::string region, std::string message) { items.emplace_back(std::move(region), std::move(message)); }
  bool empty() const { return items.empty(); }
  int report(std::ostream& err) const {
    if (items.empty()) return 0;
    err << fmt::format("{} region(s) failed:\n", items.size());
    for (const auto& [region, msg] : items) err << fmt::format("  {}: {}\n", region, msg);
    return 1;
  }
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

void write_json(const fs::path& path, json doc, const RunConfig& config) {
  doc.update(provenance(config));
  write_file(path, doc.dump(2) + "\n");
}

std::vector<epidata::EpiCurve> load_curves(const RunConfig& c, Failures& failures) {
  if (c.cases.empty()) throw ValidationError("no cases CSV: set data.cases in the config or pass --cases");
  if (c.metadata.empty()) throw ValidationError("no metadata CSV: set data.metadata in the config or pass --metadata");
  std::ifstream cases(c.cases);
  if (!cases) throw ValidationError(fmt::format("cannot open cases CSV '{}'", c.cases.string()));
  std::ifstream meta(c.metadata);
  if (!meta) throw ValidationError(fmt::format("cannot open metadata CSV '{}'", c.metadata.string()));
  auto result = epidata::ingest_cases_lenient(cases, meta);
  for (auto& e : result.errors) failures.add(std::move(e.region_id), std::move(e.message));
  return std::move(result.curves);
}

/// Output file stems, one per curve; a curve whose stem collides with an earlier one gets none.
std::vector<std::optional<std::string>> stems(const std::vector<epidata::EpiCurve>& curves, Failures& failures) {
  std::set<std::string> used;
  std::vector<std::optional<std::string>> out;
  for (const auto& c : curves) {
    auto s = file_stem(c.region_id);
    if (!used.insert(s).second) {
      failures.add(c.region_id, fmt::format("output name '{}' collides with another region", s));
      out.emplace_back();
    } else {
      out.emplace_back(std::move(s));
    }
  }
  return out;
}

json curve_json(const epidata::EpiCurve& c) {
  return {{"region_id", c.region_id},
          {"name", c.name},
          {"country", c.country_code},
          {"role", epidata::to_string(c.role)},
          {"population", c.population},
          {"start", format_date(c.start)},
          {"end", format_date(c.last_date())},
          {"days", c.size()},
          {"new_cases", c.new_cases},
          {"warnings", c.warnings}};
}

int cmd_ingest(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Failures failures;
  const auto curves = load_curves(c, failures);
  json regions = json::array();
  for (const auto& curve : curves) regions.push_back(curve_json(curve));
  json errors = json::array();
  for (const auto& [region, msg] : failures.items) errors.push_back({{"region_id", region}, {"message", msg}});
  write_json(c.output_dir / "ingest.json", {{"regions", regions}, {"errors", errors}}, c);
  out << fmt::format("ingested {} region(s)\n", curves.size());
  return failures.report(err);
}

/// Smoothed case counts at the curve's optimized cutoff.
dsp::FilterResult smooth_curve(const epidata::EpiCurve& curve, const RunConfig& c) {
  return dsp::optimize_cutoff(curve.new_cases, c.objective);
}

int cmd_smooth(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Failures failures;
  const auto curves = load_curves(c, failures);
  const auto names = stems(curves, failures);
  std::size_t written = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (!names[i]) continue;
    const auto& curve = curves[i];
    try {
      const auto fr = smooth_curve(curve, c);
      std::string csv = provenance_comment(c) + "date,raw,smoothed\n";
      for (std::size_t t = 0; t < curve.size(); ++t) {
        csv += fmt::format("{},{},{}\n", format_date(curve.date_at(t)), curve.new_cases[t], fr.smoothed[t]);
      }
      const auto dir = c.output_dir / "smooth";
      write_file(dir / (*names[i] + ".csv"), csv);
      write_json(dir / (*names[i] + ".json"),
                 {{"region_id", curve.region_id}, {"cutoff", fr.cutoff}, {"j_r", fr.objective.correlation},
                  {"j_psd", fr.objective.spectral}, {"j_total", fr.objective.total}, {"a", c.objective.a},
                  {"b", c.objective.b}},
                 c);
      ++written;
    } catch (const Error& e) {
      failures.add(curve.region_id, e.what());
    }
  }
  out << fmt::format("smoothed {} region(s)\n", written);
  return failures.report(err);
}

std::string alert_csv(const RunConfig& c, const epidata::EpiCurve& curve, const std::vector<double>& incidence,
                      const alerts::AlertSeries& low, const alerts::AlertSeries& high) {
  std::string csv = provenance_comment(c) + "date,incidence,low_inertia_level,high_inertia_level\n";
  for (std::size_t t = 0; t < incidence.size(); ++t) {
    csv += fmt::format("{},{},{},{}\n", format_date(curve.date_at(t)), incidence[t], low.levels[t], high.levels[t]);
  }
  return csv;
}

int cmd_alerts(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Failures failures;
  const auto curves = load_curves(c, failures);
  const auto names = stems(curves, failures);
  json summary = json::array();
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (!names[i]) continue;
    const auto& curve = curves[i];
    try {
      const auto raw = epidata::incidence_per_million(curve);
      auto smoothed_curve = curve;
      smoothed_curve.new_cases = smooth_curve(curve, c).smoothed;
      const auto smooth = epidata::incidence_per_million(smoothed_curve);

      const auto raw_low = alerts::low_inertia_series(raw, c.alerts, curve.region_id);
      const auto raw_high = alerts::high_inertia_series(raw, c.alerts, curve.region_id);
      const auto sm_low = alerts::low_inertia_series(smooth, c.alerts, curve.region_id);
      const auto sm_high = alerts::high_inertia_series(smooth, c.alerts, curve.region_id);

      const auto dir = c.output_dir / "alerts";
      write_file(dir / (*names[i] + ".raw.csv"), alert_csv(c, curve, raw, raw_low, raw_high));
      write_file(dir / (*names[i] + ".smoothed.csv"), alert_csv(c, curve, smooth, sm_low, sm_high));
      summary.push_back({{"region_id", curve.region_id},
                         {"spikes_raw", alerts::count_spikes(raw_low)},
                         {"spikes_smoothed", alerts::count_spikes(sm_low)},
                         {"level_changes_raw", alerts::count_level_changes(raw_high)},
                         {"level_changes_smoothed", alerts::count_level_changes(sm_high)}});
    } catch (const Error& e) {
      failures.add(curve.region_id, e.what());
    }
  }
  write_json(c.output_dir / "alerts" / "summary.json", {{"regions", summary}}, c);
  out << fmt::format("alert levels for {} region(s)\n", summary.size());
  return failures.report(err);
}

int cmd_synth(const RunConfig& c, std::ostream& out, std::ostream&) {
  std::vector<epidata::EpiCurve> curves;
  for (auto& r : synthetic::generate(c.synth)) curves.push_back(std::move(r.curve));
  std::ostringstream cases, meta;
  cases << provenance_comment(c);
  synthetic::write_cases_csv(cases, curves);
  meta << provenance_comment(c);
  synthetic::write_metadata_csv(meta, curves);
  write_file(c.output_dir / "cases.csv", cases.str());
  write_file(c.output_dir / "metadata.csv", meta.str());
  out << fmt::format("wrote {} synthetic region(s)\n", curves.size());
  return 0;
}

/// The model input series of one region: 0-1 normalized, optionally smoothed.
struct ModelSeries {
  epidata::NormalizedCurve norm;
  std::vector<double> values;
};

ModelSeries model_series(std::span<const double> cases, evaluation::TrainingData data, const RunConfig& c,
                         const std::string& region) {
  ModelSeries s{epidata::normalize(cases, region), {}};
  s.values = data == evaluation::TrainingData::smoothed ? dsp::optimize_cutoff(s.norm.values, c.objective).smoothed
                                                        : s.norm.values;
  return s;
}

int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Failures failures;
  const auto curves = load_curves(c, failures);
  const auto method = evaluation::MethodSpec::from_id(c.train_method);
  std::vector<epidata::Sample> samples;
  std::vector<std::string> used;
  for (const auto& curve : curves) {
    if (curve.role != epidata::RegionRole::train) continue;
    try {
      const auto s = model_series(curve.new_cases, method.training_data, c, curve.region_id);
      auto extracted = epidata::extract_samples(s.values, epidata::kInputDays, epidata::kOutputDays, curve.region_id,
                                                curve.start);
      if (extracted.empty()) continue;
      samples.insert(samples.end(), extracted.begin(), extracted.end());
      used.push_back(curve.region_id);
    } catch (const Error& e) {
      failures.add(curve.region_id, e.what());
    }
  }
  if (samples.empty()) throw ValidationError("train: no 60-day samples in regions with role 'train'");

  auto tc = c.train;
  tc.loss_kind = method.loss;
  std::optional<forecast::DensityHistogram> density;
  if (method.loss == forecast::LossKind::adaptive) {
    std::vector<double> targets;
    for (const auto& s : samples) targets.insert(targets.end(), s.target_window.begin(), s.target_window.end());
    density = forecast::build_density(targets, tc.density_bins);
  }
  const auto result = forecast::train(samples, tc, density ? &*density : nullptr);

  auto doc = forecast::model_to_json(result.model);
  doc["method"] = std::string(1, method.id);
  doc["training_data"] = evaluation::to_string(method.training_data);
  doc["loss"] = forecast::to_string(method.loss);
  doc["training_regions"] = used;
  doc["training_samples"] = samples.size();
  write_json(c.output_dir / "model.json", doc, c);

  std::string trace = provenance_comment(c) + "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_trace.size(); ++e) trace += fmt::format("{},{}\n", e + 1, result.loss_trace[e]);
  write_file(c.output_dir / "loss.csv", trace);
  out << fmt::format("trained method {} on {} sample(s) from {} region(s), final loss {}\n", method.id,
                     samples.size(), used.size(), result.loss_trace.back());
  return failures.report(err);
}

int cmd_predict(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto model_path = c.model.empty() ? c.output_dir / "model.json" : c.model;
  std::ifstream in(model_path);
  if (!in) throw ValidationError(fmt::format("cannot open model file '{}'", model_path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("model '{}': {}", model_path.string(), e.what()), 0);
  }
  const auto model = forecast::model_from_json(doc);
  const auto data = doc.value("training_data", std::string("raw")) == "smoothed" ? evaluation::TrainingData::smoothed
                                                                                 : evaluation::TrainingData::raw;

  Failures failures;
  const auto curves = load_curves(c, failures);
  std::string csv = provenance_comment(c) + "region_id,date,predicted_cases\n";
  std::size_t written = 0;
  for (const auto& curve : curves) {
    try {
      if (curve.size() < epidata::kInputDays) {
        throw ValidationError(fmt::format("{} days of history, need {}", curve.size(), epidata::kInputDays));
      }
      const auto s = model_series(curve.new_cases, data, c, curve.region_id);
      const std::span<const double> input(s.values.data() + s.values.size() - epidata::kInputDays, epidata::kInputDays);
      const auto y = forecast::predict(model, input, s.norm.scale, s.norm.offset);
      const auto last = curve.last_date();
      for (std::size_t k = 0; k < y.size(); ++k) {
        csv += fmt::format("{},{},{}\n", curve.region_id, format_date(add_days(last, static_cast<long long>(k + 1))),
                           y[k]);
      }
      ++written;
    } catch (const Error& e) {
      failures.add(curve.region_id, e.what());
    }
  }
  write_file(c.output_dir / "predictions.csv", csv);
  out << fmt::format("forecast {} region(s)\n", written);
  return failures.report(err);
}

int cmd_evaluate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Failures failures;
  const auto curves = load_curves(c, failures);
  std::vector<epidata::EpiCurve> train, test;
  for (const auto& curve : curves) (curve.role == epidata::RegionRole::train ? train : test).push_back(curve);

  evaluation::EvalConfig ec;
  ec.train = c.train;
  ec.objective = c.objective;
  ec.split_date = c.split_date;
  ec.include_local = c.include_local;
  const auto report = evaluation::run_method_matrix(train, test, c.methods, ec);

  std::ostringstream csv;
  csv << provenance_comment(c);
  evaluation::write_report_csv(csv, report);
  write_file(c.output_dir / "report.csv", csv.str());
  write_json(c.output_dir / "report.json", evaluation::report_to_json(report), c);
  out << fmt::format("evaluated {} method(s) on {} test region(s)\n", report.methods.size(),
                     report.test_regions.size());
  return failures.report(err);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"epicast: epi-curve smoothing, alert levels and windowed forecasting"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  Flags flags;
  using Handler = int (*)(const RunConfig&, std::ostream&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
      {"ingest", "Validate case and metadata CSVs and export them as JSON", cmd_ingest},
      {"smooth", "Smooth every region at its optimized cutoff frequency", cmd_smooth},
      {"alerts", "Alert levels and spike counts from raw and smoothed incidence", cmd_alerts},
      {"synth", "Generate a seeded synthetic dataset", cmd_synth},
      {"train", "Train a forecaster on the regions with role 'train'", cmd_train},
      {"predict", "Forecast the 10 days after each region's last date", cmd_predict},
      {"evaluate", "Run the method matrix and write report.csv / report.json", cmd_evaluate},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, help, handler] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Global seed");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--a", flags.a, "Weight of the correlation term");
    sub->add_option("--b", flags.b, "Weight of the spectral term");
    sub->add_option("--grid-size", flags.grid_size, "Number of candidate cutoffs");
    sub->add_option("--epochs", flags.epochs, "Training epochs");
    sub->add_option("--methods", flags.methods, "Comma-separated methods, e.g. A,B,C,D");
    sub->add_option("--cases", flags.cases, "Cases CSV (region_id,date,new_cases)");
    sub->add_option("--metadata", flags.metadata, "Metadata CSV (region_id,name,population,country,role)");
    sub->add_option("--model", flags.model, "Model JSON for predict");
    handlers[sub] = handler;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto config = effective_config(flags);
    for (auto* sub : app.get_subcommands()) return handlers.at(sub)(config, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"epicast"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace epicast::cli
