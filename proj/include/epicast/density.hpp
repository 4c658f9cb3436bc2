#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epicast::forecast {

inline constexpr std::size_t kDefaultDensityBins = 64;

/// Equal-width histogram of training-target values. lookup(v) is the count of
/// v's bin; values outside the range fall into the nearest edge bin.
struct DensityHistogram {
  std::vector<double> bin_edges;     // B+1 ascending
  std::vector<std::size_t> counts;   // B
  /// Counts below this are treated as this value, so ln^2(count) >= 4.
  double count_floor = std::exp(2.0);

  std::size_t bins() const noexcept { return counts.size(); }
  std::size_t bin_of(double value) const;
  std::size_t lookup(double value) const { return counts[bin_of(value)]; }
  std::size_t total() const;
  /// 1 / (10 ln^2(max(lookup(value), count_floor)))
  double weight(double value) const;
};

/// A zero-width range puts every value in bin 0 (edges then step by 1).
DensityHistogram build_density(std::span<const double> targets,
                               std::size_t bins = kDefaultDensityBins);

enum class LossKind { standard_mse, adaptive };

/// Squared-error loss over a batch of n samples:
///   L = (1/n) sum_samples sum_t w(y_true(t)) (y_true(t) - y_pred(t))^2
/// with w == 1 for standard MSE and w = DensityHistogram::weight for the
/// density-adaptive loss. Weights depend on targets only.
class LossFunction {
 public:
  static LossFunction standard();
  static LossFunction adaptive(DensityHistogram density);

  LossKind kind() const noexcept { return kind_; }
  const DensityHistogram* density() const noexcept { return kind_ == LossKind::adaptive ? &density_ : nullptr; }

  double weight(double target) const { return kind_ == LossKind::adaptive ? density_.weight(target) : 1.0; }

  /// One sample's contribution with batch size n.
  double sample_loss(std::span<const double> y_true, std::span<const double> y_pred, std::size_t n) const;
  /// dL/dy_pred for one sample with batch size n, written into `d_pred`.
  void sample_gradient(std::span<const double> y_true, std::span<const double> y_pred, std::size_t n,
                       std::span<double> d_pred) const;

 private:
  LossKind kind_ = LossKind::standard_mse;
  DensityHistogram density_;
};

/// Single-sample form with explicit batch size.
double adaptive_loss(std::span<const double> y_true, std::span<const double> y_pred,
                     const DensityHistogram& density, std::size_t n);

/// Batch form: n is the number of samples.
double adaptive_loss(std::span<const std::vector<double>> y_true, std::span<const std::vector<double>> y_pred,
                     const DensityHistogram& density);

double standard_mse_loss(std::span<const std::vector<double>> y_true, std::span<const std::vector<double>> y_pred);

std::string to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

}  // namespace epicast::forecast
