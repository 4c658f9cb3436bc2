#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace epicast::dsp {

/// Daily sampling: frequencies are in cycles/day and Nyquist is 0.5.
inline constexpr double kNyquist = 0.5;

struct PowerSpectrum {
  std::vector<double> frequencies;  // bin centres, strictly increasing in [0, 0.5]
  std::vector<double> power;

  std::size_t size() const noexcept { return power.size(); }
  double total() const;
};

/// One-sided periodogram of the mean-removed signal aggregated into `bins`
/// equal-width frequency bins over [0, 0.5]. The total power equals the
/// (population) variance of the input.
PowerSpectrum periodogram(std::span<const double> values, std::size_t bins);

/// Normalized autocorrelation r(0..max_lag) of the mean-removed signal, r(0) == 1.
/// Uses the biased estimator (lag sums divided by the lag-0 sum).
std::vector<double> autocorrelation(std::span<const double> values, std::size_t max_lag);

}  // namespace epicast::dsp
