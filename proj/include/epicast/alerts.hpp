#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace epicast::alerts {

/// Daily-incidence thresholds (cases per million per day) separating levels
/// 1|2|3|4, plus the confirmation runs of the high-inertia policy.
///
/// Bands: level 1 below t0, level 2 in [t0, t1), level 3 in [t1, t2], level 4 above t2.
struct AlertConfig {
  std::array<double, 3> thresholds{10.0, 20.0, 40.0};
  int up_days = 7;
  int down_days = 14;

  void validate() const;
};

enum class InertiaPolicy { low_inertia, high_inertia };

std::string to_string(InertiaPolicy policy);

struct AlertSeries {
  std::vector<int> levels;
  InertiaPolicy policy = InertiaPolicy::low_inertia;
  std::string region_id;
};

int level_from_incidence(double incidence, const AlertConfig& config = {});

/// Level follows the instantaneous incidence each day.
AlertSeries low_inertia_series(std::span<const double> incidence, const AlertConfig& config = {},
                               std::string region_id = {});

/// Starts at level 1. Moves up one level after `up_days` consecutive days with
/// the instantaneous level above the current one, and down one level after
/// `down_days` consecutive days below it. Runs restart after every move.
AlertSeries high_inertia_series(std::span<const double> incidence, const AlertConfig& config = {},
                                std::string region_id = {});

/// Days t >= 1 holding a level change that is followed by another change on
/// day t+1, i.e. two changes inside the 3 consecutive days t-1, t, t+1.
std::size_t count_spikes(const AlertSeries& series);

std::size_t count_level_changes(const AlertSeries& series);

}  // namespace epicast::alerts
