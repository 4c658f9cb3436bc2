#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace epicast::dsp::detail {

/// Real-to-complex DFT of length n (unnormalized) and its inverse.
/// forward() returns n/2+1 bins; inverse() expects n/2+1 bins and returns n
/// samples scaled by n (FFTW convention).
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<const double> in, std::vector<std::complex<double>>& out);
  void inverse(std::span<const std::complex<double>> in, std::vector<double>& out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Per-thread cached transform of length n.
RealFft& real_fft(std::size_t n);

}  // namespace epicast::dsp::detail
