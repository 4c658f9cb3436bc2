#include "epicast/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast::forecast {

namespace {

constexpr std::size_t kGates = 4;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t parameter_count_for(std::size_t hidden, std::size_t horizon) {
  return kGates * hidden * (hidden + 2) + horizon * (hidden + 1);
}

// Activations kept for backpropagation. Row t of `gates` holds i,f,g,o after
// their nonlinearities; `cells`/`hidden` hold states 0..T (state 0 is zero).
struct Tape {
  std::size_t steps = 0;
  std::vector<double> gates;
  std::vector<double> cells;
  std::vector<double> hidden;
};

std::vector<double> run_forward(const LstmModel& model, std::span<const double> input, Tape* tape) {
  const std::size_t H = model.hidden_size();
  const std::size_t T = input.size();
  const auto p = model.parameters();
  std::vector<double> h(H, 0.0), c(H, 0.0), z(kGates * H);
  if (tape) {
    tape->steps = T;
    tape->gates.assign(T * kGates * H, 0.0);
    tape->cells.assign((T + 1) * H, 0.0);
    tape->hidden.assign((T + 1) * H, 0.0);
  }
  for (std::size_t t = 0; t < T; ++t) {
    const double x = input[t];
    for (std::size_t g = 0; g < kGates; ++g) {
      for (std::size_t r = 0; r < H; ++r) {
        const double* w = p.data() + model.gate_weight_index(static_cast<Gate>(g), r, 0);
        double acc = p[model.gate_bias_index(static_cast<Gate>(g), r)] + w[0] * x;
        for (std::size_t k = 0; k < H; ++k) acc += w[1 + k] * h[k];
        z[g * H + r] = acc;
      }
    }
    for (std::size_t r = 0; r < H; ++r) {
      const double i = sigmoid(z[r]);
      const double f = sigmoid(z[H + r]);
      const double gc = std::tanh(z[2 * H + r]);
      const double o = sigmoid(z[3 * H + r]);
      c[r] = f * c[r] + i * gc;
      h[r] = o * std::tanh(c[r]);
      if (tape) {
        double* row = tape->gates.data() + t * kGates * H;
        row[r] = i;
        row[H + r] = f;
        row[2 * H + r] = gc;
        row[3 * H + r] = o;
      }
    }
    if (tape) {
      std::copy(c.begin(), c.end(), tape->cells.begin() + static_cast<std::ptrdiff_t>((t + 1) * H));
      std::copy(h.begin(), h.end(), tape->hidden.begin() + static_cast<std::ptrdiff_t>((t + 1) * H));
    }
  }
  std::vector<double> out(model.horizon());
  for (std::size_t r = 0; r < out.size(); ++r) {
    double acc = p[model.projection_bias_index(r)];
    const double* w = p.data() + model.projection_weight_index(r, 0);
    for (std::size_t k = 0; k < H; ++k) acc += w[k] * h[k];
    if (!std::isfinite(acc)) throw NumericalError(fmt::format("non-finite LSTM output at horizon step {}", r));
    out[r] = acc;
  }
  return out;
}

}  // namespace

LstmModel::LstmModel(std::size_t hidden, std::size_t horizon, std::uint64_t seed)
    : hidden_(hidden), horizon_(horizon), seed_(seed), params_(parameter_count_for(hidden, horizon), 0.0) {
  if (hidden == 0 || horizon == 0) throw ValidationError("hidden size and horizon must be positive");
}

LstmModel LstmModel::initialized(std::size_t hidden, std::size_t horizon, std::uint64_t seed) {
  LstmModel model(hidden, horizon, seed);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (std::size_t g = 0; g < kGates; ++g) {
    for (std::size_t r = 0; r < hidden; ++r) {
      for (std::size_t k = 0; k <= hidden; ++k) model.gate_weight(static_cast<Gate>(g), r, k) = uniform(rng);
    }
  }
  for (std::size_t r = 0; r < hidden; ++r) model.gate_bias(Gate::forget, r) = 1.0;
  for (std::size_t r = 0; r < horizon; ++r) {
    for (std::size_t k = 0; k < hidden; ++k) model.projection_weight(r, k) = uniform(rng);
  }
  return model;
}

void LstmModel::validate() const {
  if (params_.size() != parameter_count_for(hidden_, horizon_)) throw ValidationError("LSTM parameter shape mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!std::isfinite(params_[i])) throw NumericalError(fmt::format("LSTM parameter {} is not finite", i));
  }
}

std::vector<double> lstm_forward(const LstmModel& model, std::span<const double> input) {
  return run_forward(model, input, nullptr);
}

std::vector<double> lstm_backward(const LstmModel& model, std::span<const double> input,
                                  const OutputGradientFn& output_gradient, std::span<double> gradient) {
  if (gradient.size() != model.parameter_count()) throw ValidationError("gradient buffer has the wrong size");
  Tape tape;
  auto output = run_forward(model, input, &tape);
  std::vector<double> d_out(output.size(), 0.0);
  output_gradient(output, d_out);

  const std::size_t H = model.hidden_size();
  const std::size_t T = tape.steps;
  const auto p = model.parameters();

  std::vector<double> dh(H, 0.0), dc(H, 0.0), dz(kGates * H), dh_prev(H);
  const double* h_last = tape.hidden.data() + T * H;
  for (std::size_t r = 0; r < output.size(); ++r) {
    gradient[model.projection_bias_index(r)] += d_out[r];
    const std::size_t base = model.projection_weight_index(r, 0);
    for (std::size_t k = 0; k < H; ++k) {
      gradient[base + k] += d_out[r] * h_last[k];
      dh[k] += d_out[r] * p[base + k];
    }
  }

  for (std::size_t t = T; t-- > 0;) {
    const double* a = tape.gates.data() + t * kGates * H;
    const double* c_now = tape.cells.data() + (t + 1) * H;
    const double* c_prev = tape.cells.data() + t * H;
    const double* h_prev = tape.hidden.data() + t * H;
    for (std::size_t r = 0; r < H; ++r) {
      const double i = a[r], f = a[H + r], gc = a[2 * H + r], o = a[3 * H + r];
      const double tc = std::tanh(c_now[r]);
      const double d_o = dh[r] * tc;
      const double d_c = dc[r] + dh[r] * o * (1.0 - tc * tc);
      dz[r] = d_c * gc * i * (1.0 - i);
      dz[H + r] = d_c * c_prev[r] * f * (1.0 - f);
      dz[2 * H + r] = d_c * i * (1.0 - gc * gc);
      dz[3 * H + r] = d_o * o * (1.0 - o);
      dc[r] = d_c * f;
    }
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    const double x = input[t];
    for (std::size_t g = 0; g < kGates; ++g) {
      for (std::size_t r = 0; r < H; ++r) {
        const double d = dz[g * H + r];
        const std::size_t base = model.gate_weight_index(static_cast<Gate>(g), r, 0);
        gradient[model.gate_bias_index(static_cast<Gate>(g), r)] += d;
        gradient[base] += d * x;
        const double* w = p.data() + base + 1;
        double* gw = gradient.data() + base + 1;
        for (std::size_t k = 0; k < H; ++k) {
          gw[k] += d * h_prev[k];
          dh_prev[k] += d * w[k];
        }
      }
    }
    dh.swap(dh_prev);
  }
  return output;
}

nlohmann::json model_to_json(const LstmModel& model) {
  const std::size_t H = model.hidden_size();
  const auto p = model.parameters();
  auto tensor = [&](std::size_t first, std::vector<std::size_t> shape) {
    std::size_t count = 1;
    for (auto s : shape) count *= s;
    return nlohmann::json{{"shape", shape},
                          {"data", std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(first),
                                                       p.begin() + static_cast<std::ptrdiff_t>(first + count))}};
  };
  nlohmann::json tensors;
  const char* names[] = {"input_gate", "forget_gate", "cell_gate", "output_gate"};
  for (std::size_t g = 0; g < kGates; ++g) {
    tensors[std::string(names[g]) + ".weight"] = tensor(model.gate_weight_index(static_cast<Gate>(g), 0, 0), {H, H + 1});
    tensors[std::string(names[g]) + ".bias"] = tensor(model.gate_bias_index(static_cast<Gate>(g), 0), {H});
  }
  tensors["projection.weight"] = tensor(model.projection_weight_index(0, 0), {model.horizon(), H});
  tensors["projection.bias"] = tensor(model.projection_bias_index(0), {model.horizon()});
  return nlohmann::json{{"architecture", "lstm"},
                        {"hidden_size", H},
                        {"horizon", model.horizon()},
                        {"input_size", 1},
                        {"seed", model.seed()},
                        {"tensors", tensors}};
}

LstmModel model_from_json(const nlohmann::json& doc) {
  try {
    LstmModel model(doc.at("hidden_size").get<std::size_t>(), doc.at("horizon").get<std::size_t>(),
                    doc.at("seed").get<std::uint64_t>());
    const std::size_t H = model.hidden_size();
    const auto& tensors = doc.at("tensors");
    auto load = [&](const std::string& name, std::size_t first, std::vector<std::size_t> shape) {
      const auto& t = tensors.at(name);
      if (t.at("shape").get<std::vector<std::size_t>>() != shape) {
        throw ValidationError("tensor '" + name + "' has an unexpected shape");
      }
      const auto data = t.at("data").get<std::vector<double>>();
      std::size_t count = 1;
      for (auto s : shape) count *= s;
      if (data.size() != count) throw ValidationError("tensor '" + name + "' has the wrong number of values");
      std::copy(data.begin(), data.end(), model.parameters().begin() + static_cast<std::ptrdiff_t>(first));
    };
    const char* names[] = {"input_gate", "forget_gate", "cell_gate", "output_gate"};
    for (std::size_t g = 0; g < kGates; ++g) {
      load(std::string(names[g]) + ".weight", model.gate_weight_index(static_cast<Gate>(g), 0, 0), {H, H + 1});
      load(std::string(names[g]) + ".bias", model.gate_bias_index(static_cast<Gate>(g), 0), {H});
    }
    load("projection.weight", model.projection_weight_index(0, 0), {model.horizon(), H});
    load("projection.bias", model.projection_bias_index(0), {model.horizon()});
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model JSON: ") + e.what(), 0);
  }
}

}  // namespace epicast::forecast
