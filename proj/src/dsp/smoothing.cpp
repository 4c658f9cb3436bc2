#include "epicast/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dsp/fft.hpp"
#include "epicast/error.hpp"

namespace epicast::dsp {

void ObjectiveParams::validate_structure() const {
  if (!(a >= 0.0) || !(b >= 0.0) || !(a + b > 0.0)) {
    throw ValidationError(fmt::format("objective weights must be non-negative, not both zero (a={}, b={})", a, b));
  }
  if (grid_size < 2) throw ValidationError("grid_size must be >= 2");
  if (psd_points < 1) throw ValidationError("psd_points must be >= 1");
}

void ObjectiveParams::validate() const {
  validate_structure();
  if (!(b > 0.0)) throw ValidationError("b must be positive");
  const double ratio = a / b;
  // Small slack so that e.g. a=1.5,b=1 written as decimals is accepted.
  constexpr double slack = 1e-12;
  if (ratio < kMinRatio - slack || ratio > kMaxRatio + slack) {
    throw ValidationError(fmt::format("a/b = {} outside [{:.2f}, {:.2f}]", ratio, kMinRatio, kMaxRatio));
  }
}

double correlation_fitness(std::span<const double> initial, std::span<const double> filtered) {
  if (initial.size() != filtered.size()) throw ValidationError("correlation_fitness: length mismatch");
  if (initial.size() < 2) throw ValidationError("correlation_fitness needs at least 2 samples");
  const double n = static_cast<double>(initial.size());
  const double mx = std::accumulate(initial.begin(), initial.end(), 0.0) / n;
  const double my = std::accumulate(filtered.begin(), filtered.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const double dx = initial[i] - mx;
    const double dy = filtered[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0)) throw ValidationError("correlation_fitness: initial signal has zero variance");
  // Round-off leaves a constant filtered signal with ~1e-30 relative variance.
  if (!(syy > 1e-20 * sxx)) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spectral_fitness(const PowerSpectrum& initial, const PowerSpectrum& filtered) {
  if (initial.size() != filtered.size() || initial.frequencies != filtered.frequencies) {
    throw ValidationError("spectral_fitness: spectra are on different frequency grids");
  }
  const double initial_total = initial.total();
  if (!(initial_total > 0.0)) return 0.0;
  const double filtered_total = filtered.total();
  if (!(filtered_total > 0.0)) return 1.0;

  double shift = 0.0;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const double ramp = static_cast<double>(i + 1);
    shift += ramp * (initial.power[i] / initial_total - filtered.power[i] / filtered_total);
  }
  return std::clamp(shift / static_cast<double>(initial.size()), 0.0, 1.0);
}

SmoothingObjective::SmoothingObjective(std::span<const double> values, const ObjectiveParams& params)
    : values_(values.begin(), values.end()), params_(params) {
  params_.validate_structure();
  if (values_.size() < 4) throw ValidationError("smoothing objective needs at least 4 samples");
  const std::size_t n = values_.size();
  std::vector<double> extended(2 * n);
  std::copy(values_.begin(), values_.end(), extended.begin());
  std::reverse_copy(values_.begin(), values_.end(), extended.begin() + static_cast<std::ptrdiff_t>(n));
  detail::real_fft(2 * n).forward(extended, mirrored_spectrum_);
  initial_psd_ = periodogram(values_, params_.psd_points);
}

std::vector<double> SmoothingObjective::filtered(double cutoff) const {
  const FilterSpec spec{cutoff};
  spec.validate();
  const std::size_t m = 2 * values_.size();
  std::vector<std::complex<double>> spectrum(mirrored_spectrum_.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    spectrum[k] = mirrored_spectrum_[k] *
                  butterworth_gain(spec, static_cast<double>(k) / static_cast<double>(m));
  }
  std::vector<double> time;
  detail::real_fft(m).inverse(spectrum, time);
  time.resize(values_.size());
  const double inv = 1.0 / static_cast<double>(m);
  for (auto& v : time) v *= inv;
  return time;
}

ObjectiveValue SmoothingObjective::evaluate(std::span<const double> filtered_values) const {
  ObjectiveValue out;
  out.correlation = correlation_fitness(values_, filtered_values);
  out.spectral = spectral_fitness(initial_psd_, periodogram(filtered_values, params_.psd_points));
  out.total = params_.a * out.correlation + params_.b * out.spectral;
  return out;
}

ObjectiveValue SmoothingObjective::evaluate(double cutoff) const { return evaluate(filtered(cutoff)); }

ObjectiveValue objective(std::span<const double> values, double cutoff, const ObjectiveParams& params) {
  return SmoothingObjective(values, params).evaluate(cutoff);
}

std::vector<double> cutoff_grid(std::size_t length, std::size_t grid_size) {
  if (length < 2) throw ValidationError("cutoff grid needs a length of at least 2");
  if (grid_size < 2) throw ValidationError("grid_size must be >= 2");
  const double lo = std::log(1.0 / static_cast<double>(length));
  const double hi = std::log(kNyquist);
  std::vector<double> grid(grid_size);
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  for (std::size_t k = 0; k < grid_size; ++k) grid[k] = std::exp(lo + step * static_cast<double>(k));
  grid.front() = 1.0 / static_cast<double>(length);
  grid.back() = kNyquist;
  return grid;
}

FilterResult optimize_cutoff(std::span<const double> values, const ObjectiveParams& params) {
  if (values.size() < 8) throw ValidationError("optimize_cutoff needs at least 8 samples");
  params.validate_structure();

  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    // Nothing to smooth: identity output, full information retained.
    FilterResult out;
    out.smoothed.assign(values.begin(), values.end());
    out.cutoff = kNyquist;
    out.objective = {params.a, 1.0, 0.0};
    return out;
  }

  const SmoothingObjective objective(values, params);
  FilterResult best;
  bool have_best = false;
  for (const double cutoff : cutoff_grid(values.size(), params.grid_size)) {
    auto filtered = objective.filtered(cutoff);
    const auto value = objective.evaluate(filtered);
    // Strict '>' over an ascending grid keeps the smaller cutoff on ties.
    if (!have_best || value.total > best.objective.total) {
      best.smoothed = std::move(filtered);
      best.cutoff = cutoff;
      best.objective = value;
      have_best = true;
    }
  }
  for (auto& v : best.smoothed) v = std::max(v, 0.0);
  return best;
}

}  // namespace epicast::dsp
