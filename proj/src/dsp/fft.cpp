#include "dsp/fft.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "epicast/error.hpp"

namespace epicast::dsp::detail {

namespace {
// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw Error("FFT length must be positive");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spectrum = fftw_alloc_complex(n / 2 + 1);
  complex_ = spectrum;
  const int len = static_cast<int>(n);
  forward_plan_ = fftw_plan_dft_r2c_1d(len, real_, spectrum, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(len, spectrum, real_, FFTW_ESTIMATE);
  if (!forward_plan_ || !inverse_plan_) throw Error("FFTW failed to create a plan");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(complex_);
}

void RealFft::forward(std::span<const double> in, std::vector<std::complex<double>>& out) {
  if (in.size() != n_) throw Error("FFT input length mismatch");
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const std::size_t bins = n_ / 2 + 1;
  out.resize(bins);
  // fftw_complex is layout-compatible with std::complex<double>.
  std::memcpy(out.data(), complex_, bins * sizeof(fftw_complex));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::vector<double>& out) {
  const std::size_t bins = n_ / 2 + 1;
  if (in.size() != bins) throw Error("inverse FFT input length mismatch");
  // c2r destroys its input, so always copy into the plan buffer.
  std::memcpy(complex_, in.data(), bins * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  out.assign(real_, real_ + n_);
}

RealFft& real_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace epicast::dsp::detail
