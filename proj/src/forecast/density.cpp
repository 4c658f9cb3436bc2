#include "epicast/density.hpp"

#include <algorithm>
#include <numeric>

#include "epicast/error.hpp"

namespace epicast::forecast {

std::size_t DensityHistogram::bin_of(double value) const {
  if (counts.empty()) throw ValidationError("empty density histogram");
  const double lo = bin_edges.front();
  const double width = (bin_edges.back() - lo) / static_cast<double>(counts.size());
  if (!(value > lo)) return 0;
  const double pos = (value - lo) / width;
  if (pos >= static_cast<double>(counts.size())) return counts.size() - 1;
  return std::min(static_cast<std::size_t>(pos), counts.size() - 1);
}

std::size_t DensityHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

double DensityHistogram::weight(double value) const {
  const double f = std::max(static_cast<double>(lookup(value)), count_floor);
  const double log_f = std::log(f);
  return 1.0 / (10.0 * log_f * log_f);
}

DensityHistogram build_density(std::span<const double> targets, std::size_t bins) {
  if (targets.empty()) throw ValidationError("density needs at least one target value");
  if (bins == 0) throw ValidationError("density needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(targets.begin(), targets.end());
  const double lo = *lo_it;
  const double width = *hi_it > lo ? (*hi_it - lo) / static_cast<double>(bins) : 1.0;

  DensityHistogram h;
  h.bin_edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) h.bin_edges[k] = lo + width * static_cast<double>(k);
  if (*hi_it > lo) h.bin_edges.back() = *hi_it;
  h.counts.assign(bins, 0);
  for (double v : targets) ++h.counts[h.bin_of(v)];
  return h;
}

LossFunction LossFunction::standard() { return LossFunction{}; }

LossFunction LossFunction::adaptive(DensityHistogram density) {
  if (density.counts.empty()) throw ValidationError("adaptive loss needs a density histogram");
  LossFunction out;
  out.kind_ = LossKind::adaptive;
  out.density_ = std::move(density);
  return out;
}

double LossFunction::sample_loss(std::span<const double> y_true, std::span<const double> y_pred,
                                 std::size_t n) const {
  if (y_true.size() != y_pred.size()) throw ValidationError("loss: length mismatch");
  if (n == 0) throw ValidationError("loss: batch size must be >= 1");
  double sum = 0.0;
  for (std::size_t t = 0; t < y_true.size(); ++t) {
    const double e = y_true[t] - y_pred[t];
    sum += weight(y_true[t]) * e * e;
  }
  return sum / static_cast<double>(n);
}

void LossFunction::sample_gradient(std::span<const double> y_true, std::span<const double> y_pred,
                                   std::size_t n, std::span<double> d_pred) const {
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < y_true.size(); ++t) {
    d_pred[t] = scale * weight(y_true[t]) * (y_pred[t] - y_true[t]);
  }
}

double adaptive_loss(std::span<const double> y_true, std::span<const double> y_pred,
                     const DensityHistogram& density, std::size_t n) {
  return LossFunction::adaptive(density).sample_loss(y_true, y_pred, n);
}

namespace {
double batch_sum(const LossFunction& loss, std::span<const std::vector<double>> y_true,
                 std::span<const std::vector<double>> y_pred) {
  if (y_true.size() != y_pred.size()) throw ValidationError("loss: batch length mismatch");
  if (y_true.empty()) throw ValidationError("loss: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) sum += loss.sample_loss(y_true[i], y_pred[i], y_true.size());
  return sum;
}
}  // namespace

double adaptive_loss(std::span<const std::vector<double>> y_true, std::span<const std::vector<double>> y_pred,
                     const DensityHistogram& density) {
  return batch_sum(LossFunction::adaptive(density), y_true, y_pred);
}

double standard_mse_loss(std::span<const std::vector<double>> y_true, std::span<const std::vector<double>> y_pred) {
  return batch_sum(LossFunction::standard(), y_true, y_pred);
}

std::string to_string(LossKind kind) { return kind == LossKind::adaptive ? "adaptive" : "standard_mse"; }

LossKind parse_loss_kind(std::string_view text) {
  if (text == "adaptive") return LossKind::adaptive;
  if (text == "standard_mse" || text == "standard" || text == "mse") return LossKind::standard_mse;
  throw ValidationError("unknown loss kind '" + std::string(text) + "'");
}

}  // namespace epicast::forecast
