#include "epicast/alerts.hpp"

#include <cmath>

#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast::alerts {

void AlertConfig::validate() const {
  const auto& t = thresholds;
  if (!(t[0] < t[1] && t[1] < t[2])) {
    throw ValidationError(fmt::format("alert thresholds must be strictly ascending ({}, {}, {})", t[0], t[1], t[2]));
  }
  if (up_days < 1 || down_days < 1) throw ValidationError("up_days and down_days must be >= 1");
}

std::string to_string(InertiaPolicy policy) {
  return policy == InertiaPolicy::low_inertia ? "low_inertia" : "high_inertia";
}

int level_from_incidence(double incidence, const AlertConfig& config) {
  if (!(incidence >= 0.0)) throw ValidationError(fmt::format("incidence must be >= 0, got {}", incidence));
  const auto& t = config.thresholds;
  if (incidence < t[0]) return 1;
  if (incidence < t[1]) return 2;
  if (incidence <= t[2]) return 3;
  return 4;
}

AlertSeries low_inertia_series(std::span<const double> incidence, const AlertConfig& config,
                               std::string region_id) {
  config.validate();
  AlertSeries out{{}, InertiaPolicy::low_inertia, std::move(region_id)};
  out.levels.reserve(incidence.size());
  for (double v : incidence) out.levels.push_back(level_from_incidence(v, config));
  return out;
}

AlertSeries high_inertia_series(std::span<const double> incidence, const AlertConfig& config,
                                std::string region_id) {
  config.validate();
  AlertSeries out{{}, InertiaPolicy::high_inertia, std::move(region_id)};
  out.levels.reserve(incidence.size());
  int level = 1;
  int above = 0;
  int below = 0;
  for (double v : incidence) {
    const int instant = level_from_incidence(v, config);
    if (instant > level) {
      ++above;
      below = 0;
    } else if (instant < level) {
      ++below;
      above = 0;
    } else {
      above = below = 0;
    }
    if (above >= config.up_days) {
      ++level;
      above = below = 0;
    } else if (below >= config.down_days) {
      --level;
      above = below = 0;
    }
    out.levels.push_back(level);
  }
  return out;
}

std::size_t count_spikes(const AlertSeries& series) {
  const auto& l = series.levels;
  auto changed = [&](std::size_t t) { return t < l.size() && l[t] != l[t - 1]; };
  std::size_t spikes = 0;
  for (std::size_t t = 1; t < l.size(); ++t) {
    if (changed(t) && changed(t + 1)) ++spikes;
  }
  return spikes;
}

std::size_t count_level_changes(const AlertSeries& series) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < series.levels.size(); ++t) n += series.levels[t] != series.levels[t - 1];
  return n;
}

}  // namespace epicast::alerts
