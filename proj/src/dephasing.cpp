#include "lambshift/dephasing.hpp"

#include <cmath>
#include <string>

namespace lambshift {

void DecoherenceParams::validate() const {
  if (gamma1_q < 0.0 || gamma_phi_q < 0.0 || gamma1_r_at_res < 0.0)
    throw ConfigError("decoherence rates must be non-negative");
  if (gamma1_r_scale <= 0.0)
    throw ConfigError("the resonator decay scale must be positive");
}

DidResult did_rate(const ObservableSet& obs, const DriveSpec& drive,
                   const DecoherenceParams& dec) {
  dec.validate();
  if (!obs.omega_ge0 || !obs.omega_r_g || !obs.anharm0 || !obs.chi)
    throw SolverError(
        "drive-induced dephasing needs the vacuum ge transition, the dressed resonator "
        "frequency, the anharmonicity, and the cross-nonlinearity");

  const double delta_qd = *obs.omega_ge0 - drive.omega_d;
  const double delta_rd = *obs.omega_r_g - drive.omega_d;
  if (delta_qd == 0.0)
    throw SolverError("the drive sits exactly on the dressed ge transition");
  if (delta_rd == 0.0)
    throw SolverError("the drive sits exactly on the dressed resonator");

  const double product = *obs.anharm0 * *obs.chi;
  if (product < 0.0)
    throw SolverError("anharmonicity (" + std::to_string(*obs.anharm0 * 1e3) +
                      " MHz) and cross-nonlinearity (" + std::to_string(*obs.chi * 1e3) +
                      " MHz) have opposite signs; the dephasing rate is undefined here");

  DidResult out;
  out.rate = std::abs(std::sqrt(product) / (2.0 * delta_rd) * drive.amplitude /
                      (2.0 * delta_qd) * dec.gamma1_r_at_drive());
  // ten resonator linewidths, with the linewidth in MHz and detunings in GHz
  out.near_resonator = std::abs(delta_rd) < 10.0 * dec.gamma1_r_at_drive() * 1e-3;
  return out;
}

double linewidth(const DecoherenceParams& dec, double did_mhz) {
  return kFwhmPerRateSum * (0.5 * dec.gamma1_q + dec.gamma_phi_q + did_mhz);
}

}  // namespace lambshift
