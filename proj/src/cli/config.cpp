#include "epicast/cli.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "epicast/error.hpp"

namespace epicast::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ValidationError(fmt::format("config: '{}' must be an object", section));
  const std::set<std::string_view> keys(allowed);
  for (const auto& [key, _] : obj.items()) {
    if (!keys.count(key)) throw ValidationError(fmt::format("config: unknown key '{}' in '{}'", key, section));
  }
}

template <typename T>
void read(const json& obj, const char* key, T& into) {
  if (auto it = obj.find(key); it != obj.end()) into = it->get<T>();
}

std::filesystem::path read_path(const json& obj, const char* key, const std::filesystem::path& base) {
  const auto text = obj.at(key).get<std::string>();
  if (text.empty()) return {};
  const std::filesystem::path p(text);
  return p.is_absolute() || base.empty() ? p : base / p;
}

Date read_date(const json& obj, const char* key) {
  const auto text = obj.at(key).get<std::string>();
  const auto d = parse_date(text);
  if (!d) throw ValidationError(fmt::format("config: '{}' is not a YYYY-MM-DD date", text));
  return *d;
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc, const std::filesystem::path& base) {
  RunConfig c;
  try {
    reject_unknown(doc, "<root>",
                   {"seed", "data", "output_dir", "objective", "alerts", "train", "evaluate", "predict", "synth"});
    read(doc, "seed", c.seed);
    if (doc.contains("output_dir")) c.output_dir = read_path(doc, "output_dir", base);
    if (auto it = doc.find("data"); it != doc.end()) {
      reject_unknown(*it, "data", {"cases", "metadata"});
      if (it->contains("cases")) c.cases = read_path(*it, "cases", base);
      if (it->contains("metadata")) c.metadata = read_path(*it, "metadata", base);
    }
    if (auto it = doc.find("objective"); it != doc.end()) {
      reject_unknown(*it, "objective", {"a", "b", "grid_size", "psd_points"});
      read(*it, "a", c.objective.a);
      read(*it, "b", c.objective.b);
      read(*it, "grid_size", c.objective.grid_size);
      read(*it, "psd_points", c.objective.psd_points);
    }
    if (auto it = doc.find("alerts"); it != doc.end()) {
      reject_unknown(*it, "alerts", {"thresholds", "up_days", "down_days"});
      read(*it, "thresholds", c.alerts.thresholds);
      read(*it, "up_days", c.alerts.up_days);
      read(*it, "down_days", c.alerts.down_days);
    }
    if (auto it = doc.find("train"); it != doc.end()) {
      reject_unknown(*it, "train",
                     {"learning_rate", "beta1", "beta2", "adam_epsilon", "batch_size", "epochs", "hidden_size",
                      "density_bins", "method"});
      auto& t = c.train;
      read(*it, "learning_rate", t.learning_rate);
      read(*it, "beta1", t.beta1);
      read(*it, "beta2", t.beta2);
      read(*it, "adam_epsilon", t.adam_epsilon);
      read(*it, "batch_size", t.batch_size);
      read(*it, "epochs", t.epochs);
      read(*it, "hidden_size", t.hidden_size);
      read(*it, "density_bins", t.density_bins);
      if (it->contains("method")) {
        const auto m = it->at("method").get<std::string>();
        if (m.size() != 1) throw ValidationError(fmt::format("config: train.method '{}' must be one of A-D", m));
        c.train_method = evaluation::MethodSpec::from_id(m[0]).id;
      }
    }
    if (auto it = doc.find("evaluate"); it != doc.end()) {
      reject_unknown(*it, "evaluate", {"methods", "split_date", "local"});
      if (it->contains("methods")) c.methods = evaluation::parse_methods(it->at("methods").get<std::string>());
      if (it->contains("split_date")) c.split_date = read_date(*it, "split_date");
      read(*it, "local", c.include_local);
    }
    if (auto it = doc.find("predict"); it != doc.end()) {
      reject_unknown(*it, "predict", {"model"});
      if (it->contains("model")) c.model = read_path(*it, "model", base);
    }
    if (auto it = doc.find("synth"); it != doc.end()) {
      reject_unknown(*it, "synth",
                     {"train_regions", "test_regions", "days", "start", "min_waves", "max_waves", "min_peak",
                      "max_peak", "min_width", "max_width", "amplitude_noise", "report_every", "min_population",
                      "max_population"});
      auto& s = c.synth;
      read(*it, "train_regions", s.train_regions);
      read(*it, "test_regions", s.test_regions);
      read(*it, "days", s.days);
      if (it->contains("start")) s.start = read_date(*it, "start");
      read(*it, "min_waves", s.min_waves);
      read(*it, "max_waves", s.max_waves);
      read(*it, "min_peak", s.min_peak);
      read(*it, "max_peak", s.max_peak);
      read(*it, "min_width", s.min_width);
      read(*it, "max_width", s.max_width);
      read(*it, "amplitude_noise", s.amplitude_noise);
      read(*it, "report_every", s.report_every);
      read(*it, "min_population", s.min_population);
      read(*it, "max_population", s.max_population);
    }
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("config: {}", e.what()));
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(fmt::format("cannot open config file '{}'", file.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("config '{}': {}", file.string(), e.what()), 0);
  }
  return from_json(doc, file.parent_path());
}

json RunConfig::to_json() const {
  std::string methods;
  for (const auto& m : this->methods) {
    if (!methods.empty()) methods += ',';
    methods += m.id;
  }
  const auto& s = synth;
  return {
      {"seed", seed},
      {"objective", {{"a", objective.a}, {"b", objective.b}, {"grid_size", objective.grid_size},
                     {"psd_points", objective.psd_points}}},
      {"alerts", {{"thresholds", alerts.thresholds}, {"up_days", alerts.up_days}, {"down_days", alerts.down_days}}},
      {"train", {{"learning_rate", train.learning_rate}, {"beta1", train.beta1}, {"beta2", train.beta2},
                 {"adam_epsilon", train.adam_epsilon}, {"batch_size", train.batch_size}, {"epochs", train.epochs},
                 {"hidden_size", train.hidden_size}, {"density_bins", train.density_bins},
                 {"method", std::string(1, train_method)}}},
      {"evaluate", {{"methods", methods}, {"split_date", format_date(split_date)}, {"local", include_local}}},
      {"synth", {{"train_regions", s.train_regions}, {"test_regions", s.test_regions}, {"days", s.days},
                 {"start", format_date(s.start)}, {"min_waves", s.min_waves}, {"max_waves", s.max_waves},
                 {"min_peak", s.min_peak}, {"max_peak", s.max_peak}, {"min_width", s.min_width},
                 {"max_width", s.max_width}, {"amplitude_noise", s.amplitude_noise},
                 {"report_every", s.report_every}, {"min_population", s.min_population},
                 {"max_population", s.max_population}}},
  };
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string RunConfig::hash() const { return sha256_hex(to_json().dump()); }

void RunConfig::finalize() {
  train.seed = seed;
  synth.seed = seed;
  objective.validate();
  alerts.validate();
  train.validate();
  synth.validate();
  if (methods.empty()) throw ValidationError("config: evaluate.methods is empty");
}

std::string provenance_comment(const RunConfig& config) {
  return fmt::format("# epicast version={}, seed={}, config_hash={}\n", kVersion, config.seed, config.hash());
}

nlohmann::json provenance(const RunConfig& config) {
  return {{"seed", config.seed}, {"config_hash", config.hash()}, {"version", kVersion}};
}

std::string file_stem(const std::string& region_id) {
  std::string out = region_id;
  for (auto& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '.' ||
                    ch == '_' || ch == '-';
    if (!ok) ch = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace epicast::cli
