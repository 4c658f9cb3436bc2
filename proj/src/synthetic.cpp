#include "epicast/synthetic.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "epicast/csv.hpp"
#include "epicast/error.hpp"

namespace epicast::synthetic {

void SynthConfig::validate() const {
  if (train_regions + test_regions == 0) throw ValidationError("synth: no regions requested");
  if (days < 1) throw ValidationError("synth: days must be >= 1");
  if (min_waves < 1 || min_waves > max_waves) throw ValidationError("synth: need 1 <= min_waves <= max_waves");
  if (!(min_peak >= 0.0 && min_peak <= max_peak)) throw ValidationError("synth: need 0 <= min_peak <= max_peak");
  if (!(min_width > 0.0 && min_width <= max_width)) throw ValidationError("synth: need 0 < min_width <= max_width");
  if (!(amplitude_noise >= 0.0)) throw ValidationError("synth: amplitude_noise must be >= 0");
  if (report_every < 1) throw ValidationError("synth: report_every must be >= 1");
  if (min_population < 1 || min_population > max_population) {
    throw ValidationError("synth: need 1 <= min_population <= max_population");
  }
}

double logistic_pulse(double day, double center, double width, double peak) {
  const double s = 1.0 / (1.0 + std::exp(-(day - center) / width));
  return 4.0 * peak * s * (1.0 - s);
}

std::vector<double> periodic_reporting(const std::vector<double>& daily, std::size_t every) {
  if (every < 1) throw ValidationError("report interval must be >= 1");
  std::vector<double> out(daily.size(), 0.0);
  double backlog = 0.0;
  for (std::size_t t = 0; t < daily.size(); ++t) {
    backlog += daily[t];
    if ((t + 1) % every == 0) {
      out[t] = backlog;
      backlog = 0.0;
    }
  }
  return out;
}

namespace {

SynthRegion make_region(const SynthConfig& c, std::mt19937_64& rng, std::string id, std::string name,
                        epidata::RegionRole role) {
  std::uniform_int_distribution<std::size_t> wave_count(c.min_waves, c.max_waves);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t waves = wave_count(rng);
  const double segment = static_cast<double>(c.days) / static_cast<double>(waves);
  std::vector<double> clean(c.days, 0.0);
  for (std::size_t w = 0; w < waves; ++w) {
    // One pulse per segment keeps waves spread over the whole period.
    const double center = segment * (static_cast<double>(w) + unit(rng));
    const double width = c.min_width + (c.max_width - c.min_width) * unit(rng);
    const double peak = c.min_peak + (c.max_peak - c.min_peak) * unit(rng);
    for (std::size_t t = 0; t < c.days; ++t) clean[t] += logistic_pulse(static_cast<double>(t), center, width, peak);
  }

  std::vector<double> noisy(c.days);
  const double sigma = c.amplitude_noise;
  for (std::size_t t = 0; t < c.days; ++t) {
    // Mean-one log-normal factor.
    noisy[t] = std::round(clean[t] * std::exp(sigma * gauss(rng) - 0.5 * sigma * sigma));
  }

  SynthRegion region;
  region.clean = std::move(clean);
  auto& curve = region.curve;
  curve.region_id = std::move(id);
  curve.name = std::move(name);
  curve.country_code = "SYN";
  curve.role = role;
  curve.population = std::uniform_int_distribution<std::int64_t>(c.min_population, c.max_population)(rng);
  curve.start = c.start;
  curve.new_cases = periodic_reporting(noisy, c.report_every);
  return region;
}

}  // namespace

std::vector<SynthRegion> generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::vector<SynthRegion> out;
  out.reserve(config.train_regions + config.test_regions);
  for (std::size_t i = 0; i < config.train_regions; ++i) {
    out.push_back(make_region(config, rng, fmt::format("SYN-TRAIN-{:02}", i + 1),
                              fmt::format("Synthetic training region {}", i + 1), epidata::RegionRole::train));
  }
  for (std::size_t i = 0; i < config.test_regions; ++i) {
    out.push_back(make_region(config, rng, fmt::format("SYN-TEST-{:02}", i + 1),
                              fmt::format("Synthetic test region {}", i + 1), epidata::RegionRole::test));
  }
  return out;
}

void write_cases_csv(std::ostream& out, const std::vector<epidata::EpiCurve>& curves) {
  out << "region_id,date,new_cases\n";
  for (const auto& c : curves) {
    for (std::size_t t = 0; t < c.size(); ++t) {
      out << fmt::format("{},{},{}\n", csv::escape(c.region_id), format_date(c.date_at(t)), c.new_cases[t]);
    }
  }
}

void write_metadata_csv(std::ostream& out, const std::vector<epidata::EpiCurve>& curves) {
  out << "region_id,name,population,country,role\n";
  for (const auto& c : curves) {
    out << fmt::format("{},{},{},{},{}\n", csv::escape(c.region_id), csv::escape(c.name), c.population,
                       csv::escape(c.country_code), epidata::to_string(c.role));
  }
}

}  // namespace epicast::synthetic
