#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

namespace epicast::forecast {

inline constexpr std::size_t kDefaultHidden = 32;
inline constexpr std::size_t kDefaultHorizon = 10;

enum class Gate : std::size_t { input = 0, forget = 1, cell = 2, output = 3 };

/// Single-layer LSTM over a univariate daily series with a dense projection
/// of the final hidden state onto the forecast horizon.
///
/// All parameters live in one flat vector:
///   gate weights  4 x [H x (H+1)]   column 0 multiplies the day's value,
///                                   columns 1..H the previous hidden state
///   gate biases   4 x [H]
///   projection    [horizon x H]
///   projection bias [horizon]
class LstmModel {
 public:
  LstmModel() = default;
  /// All parameters zero.
  LstmModel(std::size_t hidden, std::size_t horizon = kDefaultHorizon, std::uint64_t seed = 0);

  /// Seeded uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases except the forget gate (1.0).
  static LstmModel initialized(std::size_t hidden, std::size_t horizon, std::uint64_t seed);

  std::size_t hidden_size() const noexcept { return hidden_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  double& gate_weight(Gate g, std::size_t row, std::size_t col) { return params_[gate_weight_index(g, row, col)]; }
  double gate_weight(Gate g, std::size_t row, std::size_t col) const { return params_[gate_weight_index(g, row, col)]; }
  double& gate_bias(Gate g, std::size_t row) { return params_[gate_bias_index(g, row)]; }
  double gate_bias(Gate g, std::size_t row) const { return params_[gate_bias_index(g, row)]; }
  double& projection_weight(std::size_t row, std::size_t col) { return params_[projection_weight_index(row, col)]; }
  double projection_weight(std::size_t row, std::size_t col) const { return params_[projection_weight_index(row, col)]; }
  double& projection_bias(std::size_t row) { return params_[projection_bias_index(row)]; }
  double projection_bias(std::size_t row) const { return params_[projection_bias_index(row)]; }

  std::size_t gate_weight_index(Gate g, std::size_t row, std::size_t col) const noexcept {
    return static_cast<std::size_t>(g) * hidden_ * (hidden_ + 1) + row * (hidden_ + 1) + col;
  }
  std::size_t gate_bias_index(Gate g, std::size_t row) const noexcept {
    return 4 * hidden_ * (hidden_ + 1) + static_cast<std::size_t>(g) * hidden_ + row;
  }
  std::size_t projection_weight_index(std::size_t row, std::size_t col) const noexcept {
    return 4 * hidden_ * (hidden_ + 2) + row * hidden_ + col;
  }
  std::size_t projection_bias_index(std::size_t row) const noexcept {
    return 4 * hidden_ * (hidden_ + 2) + horizon_ * hidden_ + row;
  }

  /// Throws NumericalError if any parameter is not finite.
  void validate() const;

  friend bool operator==(const LstmModel&, const LstmModel&) = default;

 private:
  std::size_t hidden_ = 0;
  std::size_t horizon_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
};

/// Runs the recurrence from zero hidden/cell state and projects the final
/// hidden state. Throws NumericalError on a non-finite result.
std::vector<double> lstm_forward(const LstmModel& model, std::span<const double> input);

/// Fills dLoss/dOutput given the forward output.
using OutputGradientFn = std::function<void(std::span<const double> output, std::span<double> d_output)>;

/// Backpropagation through time for one sequence. Runs the forward pass,
/// asks `output_gradient` for dLoss/dOutput, and adds dLoss/dParams into
/// `gradient` (length parameter_count()). Returns the forward output.
std::vector<double> lstm_backward(const LstmModel& model, std::span<const double> input,
                                  const OutputGradientFn& output_gradient, std::span<double> gradient);

nlohmann::json model_to_json(const LstmModel& model);
LstmModel model_from_json(const nlohmann::json& doc);

}  // namespace epicast::forecast
