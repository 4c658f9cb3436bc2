#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "epicast/filter.hpp"
#include "epicast/spectrum.hpp"

namespace epicast::dsp {

/// Weights of the smoothing objective  J(c) = a * correlation + b * spectral.
struct ObjectiveParams {
  double a = 1.25;
  double b = 1.0;
  std::size_t grid_size = 200;   // candidate cutoffs
  std::size_t psd_points = 128;  // spectrum bins

  static constexpr double kMinRatio = 1.00;
  static constexpr double kMaxRatio = 1.50;

  /// Full configuration check, including 1.00 <= a/b <= 1.50.
  void validate() const;
  /// Structural check only: a, b >= 0, a + b > 0, grid_size >= 2, psd_points >= 1.
  void validate_structure() const;
};

struct ObjectiveValue {
  double total = 0.0;
  double correlation = 0.0;  // information retention, in [-1, 1]
  double spectral = 0.0;     // high-frequency power removed, in [0, 1]
};

struct FilterResult {
  std::vector<double> smoothed;
  double cutoff = kNyquist;
  ObjectiveValue objective;
};

/// Zero-lag Pearson correlation between the initial and filtered signals.
/// A constant `filtered` signal scores 0. Throws if `initial` is constant.
double correlation_fitness(std::span<const double> initial, std::span<const double> filtered);

/// Ramp-weighted (g(i) = i, i = 1..N) shift of spectral mass from high to low
/// frequencies. Both spectra are scaled to unit total power first; the weighted
/// difference is divided by N so the score lies in [0, 1]. Identical spectra
/// score 0; a filtered spectrum with no power at all scores 1.
double spectral_fitness(const PowerSpectrum& initial, const PowerSpectrum& filtered);

/// Evaluates the objective on one signal for many cutoffs. The mirrored
/// spectrum and the initial periodogram are computed once.
class SmoothingObjective {
 public:
  SmoothingObjective(std::span<const double> values, const ObjectiveParams& params);

  /// Linear (unclamped) filter output at `cutoff`.
  std::vector<double> filtered(double cutoff) const;
  ObjectiveValue evaluate(double cutoff) const;
  ObjectiveValue evaluate(std::span<const double> filtered_values) const;

  const PowerSpectrum& initial_spectrum() const noexcept { return initial_psd_; }

 private:
  std::vector<double> values_;
  ObjectiveParams params_;
  std::vector<std::complex<double>> mirrored_spectrum_;
  PowerSpectrum initial_psd_;
};

ObjectiveValue objective(std::span<const double> values, double cutoff,
                         const ObjectiveParams& params);

/// `grid_size` cutoffs, log-spaced from 1/length to 0.5 inclusive, ascending.
std::vector<double> cutoff_grid(std::size_t length, std::size_t grid_size);

/// Grid search for the cutoff maximizing the objective. Ties go to the smaller
/// cutoff. Constant input is returned unchanged with cutoff 0.5.
/// Requires at least 8 samples.
FilterResult optimize_cutoff(std::span<const double> values, const ObjectiveParams& params = {});

}  // namespace epicast::dsp
