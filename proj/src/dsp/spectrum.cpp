#include "epicast/spectrum.hpp"

#include <algorithm>
#include <numeric>

#include "dsp/fft.hpp"
#include "epicast/error.hpp"

namespace epicast::dsp {

double PowerSpectrum::total() const { return std::accumulate(power.begin(), power.end(), 0.0); }

namespace {
std::vector<double> demeaned(std::span<const double> values) {
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [mean](double v) { return v - mean; });
  return out;
}
}  // namespace

PowerSpectrum periodogram(std::span<const double> values, std::size_t bins) {
  if (values.size() < 2) throw ValidationError("periodogram needs at least 2 samples");
  if (bins == 0) throw ValidationError("periodogram needs at least 1 bin");
  const std::size_t n = values.size();
  const auto x = demeaned(values);

  std::vector<std::complex<double>> spectrum;
  detail::real_fft(n).forward(x, spectrum);

  PowerSpectrum out;
  out.power.assign(bins, 0.0);
  out.frequencies.resize(bins);
  const double width = kNyquist / static_cast<double>(bins);
  for (std::size_t j = 0; j < bins; ++j) out.frequencies[j] = (static_cast<double>(j) + 0.5) * width;

  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    // Interior bins carry the mirrored negative frequency too.
    const bool self_conjugate = k == 0 || (n % 2 == 0 && k == n / 2);
    const double p = std::norm(spectrum[k]) * norm * (self_conjugate ? 1.0 : 2.0);
    // frequency k/n falls in bin floor(k/n / width) = floor(2*bins*k / n)
    const std::size_t bin = std::min((2 * bins * k) / n, bins - 1);
    out.power[bin] += p;
  }
  return out;
}

std::vector<double> autocorrelation(std::span<const double> values, std::size_t max_lag) {
  if (values.size() < 2) throw ValidationError("autocorrelation needs at least 2 samples");
  if (max_lag >= values.size()) throw ValidationError("max_lag must be smaller than the length");
  const auto x = demeaned(values);

  // Zero-pad to at least 2n so the circular correlation equals the linear one.
  std::size_t padded = 1;
  while (padded < 2 * x.size()) padded <<= 1;
  std::vector<double> buffer(padded, 0.0);
  std::copy(x.begin(), x.end(), buffer.begin());

  auto& fft = detail::real_fft(padded);
  std::vector<std::complex<double>> spectrum;
  fft.forward(buffer, spectrum);
  for (auto& c : spectrum) c = std::norm(c);
  std::vector<double> lagged;
  fft.inverse(spectrum, lagged);

  const double energy = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  if (!(energy > 0.0)) throw ValidationError("autocorrelation of a zero-variance signal");
  std::vector<double> r(max_lag + 1);
  const double scale = 1.0 / lagged[0];
  for (std::size_t k = 0; k <= max_lag; ++k) r[k] = lagged[k] * scale;
  r[0] = 1.0;
  return r;
}

}  // namespace epicast::dsp
