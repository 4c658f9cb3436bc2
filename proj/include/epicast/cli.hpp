#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "epicast/alerts.hpp"
#include "epicast/evaluation.hpp"
#include "epicast/smoothing.hpp"
#include "epicast/synthetic.hpp"
#include "epicast/training.hpp"

namespace epicast::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Effective settings of one run. Built from defaults, then the JSON config
/// file, then command-line flags, in that order of increasing precedence.
struct RunConfig {
  std::filesystem::path cases;
  std::filesystem::path metadata;
  std::filesystem::path model;  // predict input; defaults to <output_dir>/model.json
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 7;

  dsp::ObjectiveParams objective;
  alerts::AlertConfig alerts;
  forecast::TrainConfig train;
  char train_method = 'D';  // what `train` fits: data kind and loss
  std::vector<evaluation::MethodSpec> methods = evaluation::parse_methods("A,B,C,D");
  Date split_date = Date{std::chrono::year{2021} / 3 / 1};
  bool include_local = true;
  synthetic::SynthConfig synth;

  /// Reads a config document. Relative paths are resolved against `base_dir`.
  /// Unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& file);

  /// Everything that influences results. Output and model locations are left out
  /// so a rerun into another directory hashes the same.
  nlohmann::json to_json() const;
  /// Lower-case hex SHA-256 of to_json().dump().
  std::string hash() const;

  /// Pushes the global seed into the train and synth sections and validates.
  void finalize();
};

std::string sha256_hex(std::string_view bytes);

/// Header line written at the top of every CSV artifact.
std::string provenance_comment(const RunConfig& config);
/// {seed, config_hash, version} merged into every JSON artifact.
nlohmann::json provenance(const RunConfig& config);

/// Region ids with characters outside [A-Za-z0-9._-] replaced by '_'.
std::string file_stem(const std::string& region_id);

/// Entry point shared by the executable and the tests. Returns the exit status:
/// 0 on success, 1 when some regions failed, 2 on usage or fatal errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epicast::cli
