#include "epicast/filter.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dsp/fft.hpp"
#include "epicast/error.hpp"
#include "epicast/spectrum.hpp"

namespace epicast::dsp {

void FilterSpec::validate() const {
  if (!(cutoff > 0.0 && cutoff <= kNyquist)) {
    throw ValidationError(fmt::format("cutoff {} outside (0, 0.5] cycles/day", cutoff));
  }
}

double butterworth_gain(const FilterSpec& spec, double frequency) {
  const double ratio = frequency / spec.cutoff;
  return 1.0 / std::sqrt(1.0 + ratio * ratio);
}

std::vector<double> zero_phase_filter(std::span<const double> values, const FilterSpec& spec,
                                      Clamp clamp) {
  if (values.size() < 4) throw ValidationError("zero_phase_filter needs at least 4 samples");
  spec.validate();
  const std::size_t n = values.size();
  const std::size_t m = 2 * n;

  std::vector<double> extended(m);
  std::copy(values.begin(), values.end(), extended.begin());
  std::reverse_copy(values.begin(), values.end(), extended.begin() + static_cast<std::ptrdiff_t>(n));

  auto& fft = detail::real_fft(m);
  std::vector<std::complex<double>> spectrum;
  fft.forward(extended, spectrum);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    spectrum[k] *= butterworth_gain(spec, static_cast<double>(k) / static_cast<double>(m));
  }
  std::vector<double> time;
  fft.inverse(spectrum, time);

  std::vector<double> out(n);
  const double inv = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = time[i] * inv;
    if (clamp == Clamp::non_negative) out[i] = std::max(out[i], 0.0);
  }
  return out;
}

std::vector<double> n_day_average(std::span<const double> values, std::size_t n) {
  if (n == 0) throw ValidationError("n_day_average window must be >= 1");
  std::vector<double> out(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) {
    const std::size_t first = t + 1 >= n ? t + 1 - n : 0;
    double sum = 0.0;
    for (std::size_t i = first; i <= t; ++i) sum += values[i];
    out[t] = sum / static_cast<double>(t - first + 1);
  }
  return out;
}

}  // namespace epicast::dsp
