#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "epicast/calendar.hpp"
#include "epicast/epidata.hpp"

namespace epicast::synthetic {

/// Seeded multi-wave epi-curves. Each region is a sum of logistic-derivative
/// pulses, perturbed by daily lognormal amplitude noise and then passed
/// through periodic reporting (all cases since the last report are released
/// every `report_every` days, zeros in between). Counts are rounded.
struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t train_regions = 6;
  std::size_t test_regions = 2;
  std::size_t days = 540;
  Date start = Date{std::chrono::year{2020} / 3 / 1};
  std::size_t min_waves = 2;
  std::size_t max_waves = 4;
  double min_peak = 20.0;  // cases/day at the top of one pulse
  double max_peak = 120.0;
  double min_width = 6.0;  // logistic scale, days
  double max_width = 18.0;
  double amplitude_noise = 0.3;  // sigma of the log-normal day factor
  std::size_t report_every = 3;  // 1 disables periodic reporting
  std::int64_t min_population = 500'000;
  std::int64_t max_population = 3'000'000;

  void validate() const;
};

/// Noise-free daily rate of one pulse with peak height `peak` at day `center`.
double logistic_pulse(double day, double center, double width, double peak);

/// Backlog reporting: day t reports the sum since the previous report when
/// (t + 1) % every == 0, otherwise 0. Trailing unreported cases are dropped.
std::vector<double> periodic_reporting(const std::vector<double>& daily, std::size_t every);

struct SynthRegion {
  epidata::EpiCurve curve;
  std::vector<double> clean;  // expected daily cases before noise and reporting
};

/// Train regions come first, then test regions. Ids are SYN-TRAIN-01, SYN-TEST-01, ...
std::vector<SynthRegion> generate(const SynthConfig& config);

void write_cases_csv(std::ostream& out, const std::vector<epidata::EpiCurve>& curves);
void write_metadata_csv(std::ostream& out, const std::vector<epidata::EpiCurve>& curves);

}  // namespace epicast::synthetic
