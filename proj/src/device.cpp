#include "lambshift/device.hpp"

#include <cmath>
#include <string>

namespace lambshift {

void DeviceSpec::validate() const {
  if (n_q < 2) throw ConfigError("n_q must be at least 2");
  if (n_r < 2) throw ConfigError("n_r must be at least 2");
  if (static_cast<int>(transmon_levels.size()) != n_q)
    throw ConfigError("n_q (" + std::to_string(n_q) + ") does not match the number of transmon levels (" +
                      std::to_string(transmon_levels.size()) + ")");
  if (transmon_levels[0] != 0.0) throw ConfigError("transmon level 0 must be exactly 0");
  for (int n = 0; n + 1 < n_q; ++n)
    if (transmon_levels[n + 1] <= transmon_levels[n])
      throw ConfigError("transmon levels must be strictly increasing");
  for (int n = 0; n + 2 < n_q; ++n)
    if (transition(n + 1) >= transition(n))
      throw ConfigError("transition frequencies must be strictly decreasing (transmon anharmonicity)");
  if (resonator_freq <= 0.0) throw ConfigError("resonator frequency must be positive");
  if (coupling_g < 0.0) throw ConfigError("coupling must be non-negative");
}

std::vector<double> levels_from_transitions(const std::vector<double>& transitions, int n_q,
                                            bool* extrapolated) {
  if (transitions.empty()) throw ConfigError("at least one transition frequency required");
  if (n_q < 2) throw ConfigError("n_q must be at least 2");
  std::vector<double> gaps(transitions);
  bool extra = false;
  while (static_cast<int>(gaps.size()) < n_q - 1) {
    // repeat the last gap decrement beyond the supplied transitions
    double decrement = gaps.size() >= 2 ? gaps[gaps.size() - 2] - gaps.back() : 0.0;
    gaps.push_back(gaps.back() - decrement);
    extra = true;
  }
  if (extrapolated) *extrapolated = extra;
  std::vector<double> levels(n_q, 0.0);
  for (int n = 1; n < n_q; ++n) levels[n] = levels[n - 1] + gaps[n - 1];
  return levels;
}

std::vector<double> duffing_levels(double omega_ge, double anharm_magnitude, int n_q) {
  if (n_q < 2) throw ConfigError("n_q must be at least 2");
  std::vector<double> levels(n_q);
  for (int n = 0; n < n_q; ++n)
    levels[n] = n * omega_ge - anharm_magnitude * n * (n - 1) / 2.0;
  return levels;
}

DeviceSpec default_device(int n_q, int n_r) {
  DeviceSpec dev;
  dev.n_q = n_q;
  dev.n_r = n_r;
  dev.resonator_freq = 4.335;
  dev.coupling_g = 0.248;
  dev.transmon_levels =
      levels_from_transitions({5.869, 5.708, 5.539}, n_q, &dev.levels_extrapolated);
  dev.validate();
  return dev;
}

void DriveSpec::validate() const {
  if (omega_d <= 0.0) throw ConfigError("drive frequency must be positive");
  if (amplitude < 0.0) throw ConfigError("drive amplitude must be non-negative");
}

double DriveSpec::dispersive_margin(const DeviceSpec& dev) const {
  double margin = std::abs(dev.transition(0) - omega_d);
  for (int n = 1; n + 1 < dev.n_q; ++n)
    margin = std::min(margin, std::abs(dev.transition(n) - omega_d));
  return margin;
}

bool DriveSpec::dispersive_ok(const DeviceSpec& dev) const {
  return dispersive_margin(dev) >= 3.0 * amplitude;
}

}  // namespace lambshift
