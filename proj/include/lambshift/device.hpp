#pragma once

#include <vector>

#include "lambshift/errors.hpp"

namespace lambshift {

// Bare device parameters. All stored frequencies are linear (GHz); the
// single linear-to-angular conversion lives in the propagator.
struct DeviceSpec {
  std::vector<double> transmon_levels;  // cumulative level frequencies, level 0 = 0
  double resonator_freq = 0.0;          // bare resonator frequency (GHz)
  double coupling_g = 0.0;              // scale in g_{n,n+1} = g*sqrt(n+1) (GHz)
  int n_q = 0;                          // transmon truncation, equals transmon_levels.size()
  int n_r = 0;                          // resonator Fock truncation
  bool levels_extrapolated = false;     // levels beyond the supplied transitions were extrapolated

  void validate() const;  // throws ConfigError
  double transition(int n) const { return transmon_levels[n + 1] - transmon_levels[n]; }
  double anharmonicity() const { return transition(1) - transition(0); }
};

// cumulative levels from successive transition frequencies; transitions past
// the end of the list repeat the last gap decrement (flagged via
// *extrapolated when that happens)
std::vector<double> levels_from_transitions(const std::vector<double>& transitions, int n_q,
                                            bool* extrapolated = nullptr);

// Duffing rule: omega_n = n*omega_ge - anharm_magnitude*n*(n-1)/2
std::vector<double> duffing_levels(double omega_ge, double anharm_magnitude, int n_q);

// the measured device: transitions 5.869 / 5.708 / 5.539 GHz, resonator
// 4.335 GHz, g = 248 MHz; transitions past the third are extrapolated
DeviceSpec default_device(int n_q = 6, int n_r = 6);

struct DriveSpec {
  double omega_d = 0.0;    // drive frequency f_d (GHz)
  double amplitude = 0.0;  // scale in Omega_{d,n,n+1} = amplitude*sqrt(n+1) (GHz)

  void validate() const;  // throws ConfigError
  // smallest |transition - omega_d| over nearest-neighbor transmon transitions
  double dispersive_margin(const DeviceSpec& dev) const;
  // margin at least three times the amplitude; reported, never enforced
  bool dispersive_ok(const DeviceSpec& dev) const;
};

}  // namespace lambshift
