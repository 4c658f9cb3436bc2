#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "epicast/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using epicast::cli::run;

namespace {

/// Fresh directory removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("epicast-cli-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string metadata(const std::vector<std::string>& ids) {
  std::string m = "region_id,name,population,country,role\n";
  for (const auto& id : ids) m += id + "," + id + ",1000000,XX,test\n";
  return m;
}

std::string curve_rows(const std::string& id, std::size_t days, double base, double amp) {
  std::string out;
  for (std::size_t t = 0; t < days; ++t) {
    const int day = static_cast<int>(t);
    const auto date = epicast::format_date(epicast::add_days(epicast::Date{std::chrono::year{2021} / 1 / 1}, day));
    out += id + "," + date + "," + std::to_string(base + amp * ((t % 3 == 2) ? 1.0 : 0.0)) + "\n";
  }
  return out;
}

std::vector<std::string> data_flags(const TempDir& d) {
  return {"--cases", d / "cases.csv", "--metadata", d / "metadata.csv"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("synth is reproducible for a fixed seed") {
  TempDir d;
  REQUIRE(cli({"synth", "--seed", "7", "--out", d / "a"}).code == 0);
  REQUIRE(cli({"synth", "--seed", "7", "--out", d / "b"}).code == 0);
  REQUIRE(cli({"synth", "--seed", "8", "--out", d / "c"}).code == 0);
  CHECK(slurp(d / "a/cases.csv") == slurp(d / "b/cases.csv"));
  CHECK(slurp(d / "a/metadata.csv") == slurp(d / "b/metadata.csv"));
  CHECK(slurp(d / "a/cases.csv") != slurp(d / "c/cases.csv"));
  CHECK(slurp(d / "a/cases.csv").rfind("# epicast version=0.1.0, seed=7, config_hash=", 0) == 0);
}

TEST_CASE("smooth writes one CSV and one JSON per region") {
  TempDir d;
  spit(d / "cases.csv", "region_id,date,new_cases\n" + curve_rows("R1", 60, 5, 30) + curve_rows("R2", 60, 0, 9) +
                            curve_rows("R3", 60, 2, 4));
  spit(d / "metadata.csv", metadata({"R1", "R2", "R3"}));
  const auto before = slurp(d / "cases.csv");
  const auto r = cli(concat({"smooth", "--out", d / "o1"}, data_flags(d)));
  CHECK(r.code == 0);
  for (const char* id : {"R1", "R2", "R3"}) {
    const auto csv = slurp(d / ("o1/smooth/" + std::string(id) + ".csv"));
    CHECK(csv.find("\ndate,raw,smoothed\n") != std::string::npos);
    const auto doc = read_json(d / ("o1/smooth/" + std::string(id) + ".json"));
    CHECK(doc["region_id"] == id);
    for (const char* key : {"cutoff", "j_r", "j_psd", "j_total", "a", "b", "seed", "config_hash", "version"}) {
      CHECK(doc.contains(key));
    }
    CHECK(doc["j_total"].get<double>() ==
          doctest::Approx(doc["a"].get<double>() * doc["j_r"].get<double>() + doc["b"].get<double>() * doc["j_psd"].get<double>()));
  }
  CHECK(slurp(d / "cases.csv") == before);

  REQUIRE(cli(concat({"smooth", "--out", d / "o2"}, data_flags(d))).code == 0);
  for (const char* f : {"R1.csv", "R1.json", "R2.csv", "R3.json"}) {
    CHECK(slurp(d / ("o1/smooth/" + std::string(f))) == slurp(d / ("o2/smooth/" + std::string(f))));
  }
}

TEST_CASE("one malformed region does not stop the others") {
  TempDir d;
  spit(d / "cases.csv", "region_id,date,new_cases\n" + curve_rows("R1", 40, 5, 30) + "BAD,2021-01-01,-4\n" +
                            curve_rows("R3", 40, 2, 4));
  spit(d / "metadata.csv", metadata({"R1", "BAD", "R3"}));
  const auto r = cli(concat({"smooth", "--out", d / "o"}, data_flags(d)));
  CHECK(r.code == 1);
  CHECK(r.err.find("BAD") != std::string::npos);
  CHECK(fs::exists(d / "o/smooth/R1.csv"));
  CHECK(fs::exists(d / "o/smooth/R3.json"));
  CHECK(!fs::exists(d / "o/smooth/BAD.csv"));
}

TEST_CASE("alerts on periodic, constant and empty inputs") {
  TempDir d;
  REQUIRE(cli({"synth", "--config", EPICAST_SOURCE_DIR "/configs/periodic_alerts.json", "--out", d / "syn"}).code == 0);
  const auto r = cli({"alerts", "--cases", d / "syn/cases.csv", "--metadata", d / "syn/metadata.csv", "--out", d / "o"});
  REQUIRE(r.code == 0);
  const auto summary = read_json(d / "o/alerts/summary.json");
  REQUIRE(summary["regions"].size() == 26);
  std::size_t raw = 0, smoothed = 0;
  for (const auto& region : summary["regions"]) {
    raw += region["spikes_raw"].get<std::size_t>();
    smoothed += region["spikes_smoothed"].get<std::size_t>();
  }
  CHECK(smoothed < raw);
  const auto csv = slurp(d / "o/alerts/SYN-TRAIN-01.raw.csv");
  CHECK(csv.find("\ndate,incidence,low_inertia_level,high_inertia_level\n") != std::string::npos);
  CHECK(fs::exists(d / "o/alerts/SYN-TRAIN-01.smoothed.csv"));

  spit(d / "flat/cases.csv", "region_id,date,new_cases\n" + curve_rows("F", 50, 30, 0));
  spit(d / "flat/metadata.csv", metadata({"F"}));
  REQUIRE(cli({"alerts", "--cases", d / "flat/cases.csv", "--metadata", d / "flat/metadata.csv", "--out", d / "f"}).code == 0);
  const auto flat = read_json(d / "f/alerts/summary.json")["regions"][0];
  CHECK(flat["spikes_raw"] == 0);
  CHECK(flat["spikes_smoothed"] == 0);

  spit(d / "empty/cases.csv", "region_id,date,new_cases\n");
  spit(d / "empty/metadata.csv", metadata({}));
  REQUIRE(cli({"alerts", "--cases", d / "empty/cases.csv", "--metadata", d / "empty/metadata.csv", "--out", d / "e"}).code == 0);
  CHECK(read_json(d / "e/alerts/summary.json")["regions"].empty());
}

TEST_CASE("train then predict on a flat region") {
  TempDir d;
  REQUIRE(cli({"synth", "--seed", "3", "--out", d / "syn"}).code == 0);
  const std::vector<std::string> syn = {"--cases", d / "syn/cases.csv", "--metadata", d / "syn/metadata.csv"};
  REQUIRE(cli(concat({"train", "--epochs", "3", "--out", d / "m"}, syn)).code == 0);
  const auto model = read_json(d / "m/model.json");
  CHECK(model["method"] == "D");
  CHECK(model["seed"] == 7);
  CHECK(model.contains("config_hash"));
  CHECK(slurp(d / "m/loss.csv").find("\nepoch,loss\n1,") != std::string::npos);

  spit(d / "flat/cases.csv", "region_id,date,new_cases\n" + curve_rows("FLAT", 70, 12, 0));
  spit(d / "flat/metadata.csv", metadata({"FLAT"}));
  const auto r = cli({"predict", "--cases", d / "flat/cases.csv", "--metadata", d / "flat/metadata.csv", "--model",
                      d / "m/model.json", "--out", d / "p"});
  REQUIRE(r.code == 0);
  std::istringstream lines(slurp(d / "p/predictions.csv"));
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("# ", 0) == 0);
  std::getline(lines, line);
  CHECK(line == "region_id,date,predicted_cases");
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 10);
  CHECK(rows.front().rfind("FLAT,2021-03-12,", 0) == 0);
  CHECK(rows.back().rfind("FLAT,2021-03-21,", 0) == 0);
  for (const auto& row : rows) CHECK(std::stod(row.substr(row.rfind(',') + 1)) >= 0.0);
}

TEST_CASE("predict without a model is a fatal error") {
  TempDir d;
  REQUIRE(cli({"synth", "--out", d / "syn"}).code == 0);
  const auto r = cli({"predict", "--cases", d / "syn/cases.csv", "--metadata", d / "syn/metadata.csv", "--model",
                      d / "missing.json", "--out", d / "p"});
  CHECK(r.code == 2);
  CHECK(r.err.find("missing.json") != std::string::npos);
  CHECK(cli({"smooth", "--out", d / "x"}).code == 2);
}

TEST_CASE("evaluate writes the report pair") {
  TempDir d;
  spit(d / "cfg.json", R"({"synth": {"train_regions": 3, "test_regions": 2},
                          "train": {"hidden_size": 4, "epochs": 2},
                          "evaluate": {"methods": "B,D", "local": false}})");
  REQUIRE(cli({"synth", "--config", d / "cfg.json", "--out", d / "syn"}).code == 0);
  const auto r = cli({"evaluate", "--config", d / "cfg.json", "--cases", d / "syn/cases.csv", "--metadata",
                      d / "syn/metadata.csv", "--out", d / "ev"});
  REQUIRE(r.code == 0);
  const auto csv = slurp(d / "ev/report.csv");
  CHECK(csv.find("\ntraining_set,method,test_set,ground_truth,mae,n_samples,seed\n") != std::string::npos);
  std::size_t rows = 0;
  for (char c : csv) rows += c == '\n';
  CHECK(rows == 2 + 2 * 2 * 2);
  const auto doc = read_json(d / "ev/report.json");
  CHECK(doc["version"] == "0.1.0");
  CHECK(doc["cells"]["generalized"]["D"].size() == 2);
  CHECK(!doc["method_ratios"].contains("B_over_A_raw"));
  CHECK(doc["method_ratios"].contains("D_over_B_raw"));
}

TEST_CASE("flags override the config file, which overrides defaults") {
  TempDir d;
  spit(d / "cases.csv", "region_id,date,new_cases\n" + curve_rows("R", 40, 5, 30));
  spit(d / "metadata.csv", metadata({"R"}));
  spit(d / "cfg.json", R"({"data": {"cases": "cases.csv", "metadata": "metadata.csv"}, "objective": {"a": 1.2}})");
  REQUIRE(cli({"smooth", "--config", d / "cfg.json", "--out", d / "file"}).code == 0);
  CHECK(read_json(d / "file/smooth/R.json")["a"] == 1.2);
  REQUIRE(cli({"smooth", "--config", d / "cfg.json", "--a", "1.4", "--out", d / "flag"}).code == 0);
  CHECK(read_json(d / "flag/smooth/R.json")["a"] == 1.4);
  REQUIRE(cli(concat({"smooth", "--out", d / "default"}, data_flags(d))).code == 0);
  CHECK(read_json(d / "default/smooth/R.json")["a"] == 1.25);
  CHECK(read_json(d / "file/smooth/R.json")["config_hash"] != read_json(d / "flag/smooth/R.json")["config_hash"]);

  const auto bad_ratio = cli({"smooth", "--config", d / "cfg.json", "--a", "2", "--out", d / "bad"});
  CHECK(bad_ratio.code == 2);
  CHECK(bad_ratio.err.find("a/b") != std::string::npos);
  spit(d / "typo.json", R"({"objective": {"alpha": 1.2}})");
  const auto typo = cli({"smooth", "--config", d / "typo.json"});
  CHECK(typo.code == 2);
  CHECK(typo.err.find("alpha") != std::string::npos);
  CHECK(cli({"smooth", "--bogus"}).code == 2);
  CHECK(cli({}).code == 2);
}

TEST_CASE("ingest mirrors the CSVs as JSON") {
  TempDir d;
  spit(d / "cases.csv", "region_id,date,new_cases\nR,2021-01-01,1\nR,2021-01-03,3\n");
  spit(d / "metadata.csv", metadata({"R"}));
  REQUIRE(cli(concat({"ingest", "--out", d / "o"}, data_flags(d))).code == 0);
  const auto doc = read_json(d / "o/ingest.json");
  const auto& r = doc["regions"][0];
  CHECK(r["region_id"] == "R");
  CHECK(r["new_cases"] == json::array({1.0, 0.0, 3.0}));
  CHECK(r["warnings"].size() == 1);
  CHECK(doc["errors"].empty());
}

TEST_CASE("config hash ignores the output directory") {
  epicast::cli::RunConfig a, b;
  b.output_dir = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.seed = 8;
  CHECK(a.hash() != b.hash());
  CHECK(epicast::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(epicast::cli::file_stem("a/b c") == "a_b_c");
}
