#pragma once

#include "lambshift/renorm.hpp"

namespace lambshift {

struct DecoherenceParams {
  double gamma1_q = 1.0;          // transmon energy relaxation (MHz)
  double gamma_phi_q = 2.0;       // transmon intrinsic pure dephasing (MHz)
  double gamma1_r_at_res = 13.47; // resonator decay at its own frequency (MHz)
  double gamma1_r_scale = 0.83;   // maps gamma1_r_at_res to the decay at the drive frequency

  void validate() const;  // throws ConfigError
  double gamma1_r_at_drive() const { return gamma1_r_scale * gamma1_r_at_res; }
};

struct DidResult {
  double rate = 0.0;            // MHz
  bool near_resonator = false;  // |detuning| below ten resonator linewidths: estimate unreliable
};

// drive-induced dephasing rate
//   (sqrt(anharm0*chi)/(2*Delta_rd)) * (amplitude/(2*Delta_qd)) * gamma1_r(omega_d)
// with dressed detunings Delta_qd = omega_ge0 - omega_d and
// Delta_rd = omega_r_g - omega_d taken from the observables at this drive point
DidResult did_rate(const ObservableSet& obs, const DriveSpec& drive,
                   const DecoherenceParams& dec);

// Two-tone full width at half maximum from the rate sum
// gamma1_q/2 + gamma_phi_q + did. The conversion constant between the rate
// sum and the quoted width is a calibration fixed once against the measured
// undriven linewidth: 0.83 MHz at gamma1_q = 1, gamma_phi_q = 2 MHz.
inline constexpr double kFwhmPerRateSum = 0.83 / 2.5;

double linewidth(const DecoherenceParams& dec, double did_mhz);

}  // namespace lambshift
