#include "epicast/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast::forecast {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ValidationError("beta1 and beta2 must lie in (0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (hidden_size < 1) throw ValidationError("hidden_size must be >= 1");
  if (density_bins < 1) throw ValidationError("density_bins must be >= 1");
}

Adam::Adam(std::size_t parameter_count, const TrainConfig& config)
    : lr_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.adam_epsilon),
      m_(parameter_count, 0.0),
      v_(parameter_count, 0.0) {}

void Adam::step(std::span<double> parameters, std::span<const double> gradient) {
  ++t_;
  beta1_power_ *= beta1_;
  beta2_power_ *= beta2_;
  const double c1 = 1.0 - beta1_power_;
  const double c2 = 1.0 - beta2_power_;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    const double g = gradient[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    parameters[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

double batch_loss(const LstmModel& model, std::span<const epidata::Sample* const> batch, const LossFunction& loss) {
  double total = 0.0;
  for (const auto* s : batch) {
    total += loss.sample_loss(s->target_window, lstm_forward(model, s->input_window), batch.size());
  }
  return total;
}

double batch_loss_and_gradient(const LstmModel& model, std::span<const epidata::Sample* const> batch,
                               const LossFunction& loss, std::vector<double>& gradient) {
  gradient.assign(model.parameter_count(), 0.0);
  double total = 0.0;
  for (const auto* s : batch) {
    if (s->target_window.size() != model.horizon()) {
      throw ValidationError(fmt::format("sample target has {} days, model horizon is {}", s->target_window.size(),
                                        model.horizon()));
    }
    lstm_backward(
        model, s->input_window,
        [&](std::span<const double> output, std::span<double> d_output) {
          total += loss.sample_loss(s->target_window, output, batch.size());
          loss.sample_gradient(s->target_window, output, batch.size(), d_output);
        },
        gradient);
  }
  return total;
}

TrainResult train(std::span<const epidata::Sample> samples, const TrainConfig& config,
                  const DensityHistogram* density) {
  config.validate();
  if (samples.empty()) throw ValidationError("train needs at least one sample");
  const std::size_t horizon = samples.front().target_window.size();
  return train(LstmModel::initialized(config.hidden_size, horizon, config.seed), samples, config, density);
}

TrainResult train(LstmModel model, std::span<const epidata::Sample> samples, const TrainConfig& config,
                  const DensityHistogram* density) {
  config.validate();
  if (samples.empty()) throw ValidationError("train needs at least one sample");
  if (config.loss_kind == LossKind::adaptive && density == nullptr) {
    throw ValidationError("adaptive loss requires a density histogram");
  }
  const LossFunction loss =
      config.loss_kind == LossKind::adaptive ? LossFunction::adaptive(*density) : LossFunction::standard();

  std::vector<const epidata::Sample*> order(samples.size());
  std::transform(samples.begin(), samples.end(), order.begin(), [](const auto& s) { return &s; });
  // Shuffle stream is separate from the initialization stream.
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  Adam adam(model.parameter_count(), config);
  TrainResult result;
  result.loss_trace.reserve(config.epochs);
  std::vector<double> gradient;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size, ++batch_index) {
      const std::size_t n = std::min(config.batch_size, order.size() - first);
      const std::span<const epidata::Sample* const> batch(order.data() + first, n);
      const double value = batch_loss_and_gradient(model, batch, loss, gradient);
      if (!std::isfinite(value)) {
        throw NumericalError(fmt::format("non-finite training loss at epoch {}, batch {}", epoch, batch_index));
      }
      epoch_loss += value * static_cast<double>(n);
      adam.step(model.parameters(), gradient);
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  result.model = std::move(model);
  return result;
}

double gradient_check(const LstmModel& model, const epidata::Sample& sample, const LossFunction& loss, double step) {
  const epidata::Sample* batch[] = {&sample};
  std::vector<double> analytic;
  batch_loss_and_gradient(model, batch, loss, analytic);

  LstmModel probe = model;
  auto params = probe.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double original = params[i];
    params[i] = original + step;
    const double up = batch_loss(probe, batch, loss);
    params[i] = original - step;
    const double down = batch_loss(probe, batch, loss);
    params[i] = original;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

std::vector<double> predict(const LstmModel& model, std::span<const double> normalized_input, double scale,
                            double offset) {
  if (scale < offset) throw ValidationError("predict: scale must be >= offset");
  auto out = lstm_forward(model, normalized_input);
  for (auto& v : out) v = std::max(v * (scale - offset) + offset, 0.0);
  return out;
}

double mean_squared_error(const LstmModel& model, std::span<const epidata::Sample> samples) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    const auto y = lstm_forward(model, s.input_window);
    for (std::size_t t = 0; t < y.size(); ++t) {
      const double e = s.target_window[t] - y[t];
      sum += e * e;
    }
    count += y.size();
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace epicast::forecast
