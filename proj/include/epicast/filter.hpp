#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace epicast::dsp {

/// First-order Butterworth low-pass. `cutoff` is the -3 dB frequency in cycles/day.
struct FilterSpec {
  double cutoff = 0.5;
  static constexpr int order = 1;

  /// Throws ValidationError unless 0 < cutoff <= 0.5.
  void validate() const;
};

/// |H(f)| = 1 / sqrt(1 + (f / cutoff)^2)
double butterworth_gain(const FilterSpec& spec, double frequency);

enum class Clamp { none, non_negative };

/// Zero-phase low-pass: the signal is mirror-extended to length 2L
/// (x0..x[L-1], x[L-1]..x0), every DFT bin is scaled by the real Butterworth
/// gain at its frequency, and the first L samples of the inverse are kept.
/// Requires at least 4 samples.
std::vector<double> zero_phase_filter(std::span<const double> values, const FilterSpec& spec,
                                      Clamp clamp = Clamp::non_negative);

/// Trailing N-day mean, y[t] = mean(x[max(0, t-n+1) .. t]).
std::vector<double> n_day_average(std::span<const double> values, std::size_t n);

}  // namespace epicast::dsp
