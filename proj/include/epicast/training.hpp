#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "epicast/density.hpp"
#include "epicast/epidata.hpp"
#include "epicast/lstm.hpp"

namespace epicast::forecast {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 500;
  LossKind loss_kind = LossKind::standard_mse;
  std::uint64_t seed = 0;
  std::size_t hidden_size = kDefaultHidden;
  std::size_t density_bins = kDefaultDensityBins;

  void validate() const;
};

class Adam {
 public:
  Adam(std::size_t parameter_count, const TrainConfig& config);
  void step(std::span<double> parameters, std::span<const double> gradient);
  std::size_t steps() const noexcept { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  double beta1_power_ = 1.0;
  double beta2_power_ = 1.0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct TrainResult {
  LstmModel model;
  std::vector<double> loss_trace;  // sample-weighted mean loss per epoch
};

/// Loss of `model` on a batch (n = batch.size()).
double batch_loss(const LstmModel& model, std::span<const epidata::Sample* const> batch,
                  const LossFunction& loss);

/// Loss and its parameter gradient; `gradient` is overwritten.
double batch_loss_and_gradient(const LstmModel& model, std::span<const epidata::Sample* const> batch,
                               const LossFunction& loss, std::vector<double>& gradient);

/// Mini-batch Adam with BPTT. Batches come from a seeded shuffle each epoch;
/// the last partial batch is used as-is. Throws NumericalError naming the
/// epoch and batch on a non-finite loss.
TrainResult train(std::span<const epidata::Sample> samples, const TrainConfig& config,
                  const DensityHistogram* density = nullptr);

/// Continues training an existing model.
TrainResult train(LstmModel model, std::span<const epidata::Sample> samples, const TrainConfig& config,
                  const DensityHistogram* density = nullptr);

/// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
/// numeric from central differences with step `step`.
double gradient_check(const LstmModel& model, const epidata::Sample& sample, const LossFunction& loss,
                      double step = 1e-5);

/// Forecast in case counts: forward pass, then value*(scale-offset)+offset clamped at 0.
std::vector<double> predict(const LstmModel& model, std::span<const double> normalized_input,
                            double scale, double offset);

/// Mean over all elements of (target - prediction)^2 in normalized units.
double mean_squared_error(const LstmModel& model, std::span<const epidata::Sample> samples);

}  // namespace epicast::forecast
