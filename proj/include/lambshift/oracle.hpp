#pragma once

#include <string>

#include "lambshift/dephasing.hpp"

namespace lambshift {

// fixed cross-validation tolerances; one table, never overridden per test
namespace oracle_tol {
inline constexpr double kCrossMethodGhz = 1e-6;   // quasi-energies, monodromy vs extended space
inline constexpr double kPropagatorEntry = 1e-7;  // max entry, monodromy vs independent integrator
inline constexpr double kStaticObsGhz = 1e-4;     // static observables, tracker vs exact diagonalization
inline constexpr double kRabiRel = 0.02;          // resonant two-level displacement vs amplitude/2
inline constexpr double kStarkRel = 0.03;         // far-detuned level shift vs amplitude^2/(4|Delta|)
inline constexpr double kFourierRel = 0.05;       // first-order component vs (amplitude/2)/Delta
inline constexpr double kTrivial = 1e-9;          // closed-form identities
inline constexpr double kSambeSelfGhz = 1e-6;     // extended-space k_max convergence
inline constexpr double kDispersiveChiRel = 1.0;  // chi formula is order-of-magnitude only: counter-rotating terms roughly double the exact value
}  // namespace oracle_tol

struct OracleRow {
  std::string scenario;
  std::string quantity;
  double main_value = 0.0;
  double oracle_value = 0.0;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool relative = false;  // deviation and tolerance are relative
  bool pass = false;
};

// adaptive Dormand-Prince (RK45) propagator over [0, t_final]; shares no
// stepping or exponential kernel with the solver path
Mat evolve(const TimePeriodicHamiltonian& h, double t_final, double tol);

// extended-space Floquet spectrum: diagonalize the (2 k_max + 1)*dim block
// matrix with H_static + k*omega_d on the diagonal blocks and half the drive
// on the first off-diagonal blocks; returns dim zone-folded quasi-energies
// picked by central-block weight, ascending
Eigen::VectorXd sambe_quasi_energies(const TimePeriodicHamiltonian& h, int k_max = 20);

struct StaticDispersive {
  double lamb_ge = 0.0;  // GHz
  double chi = 0.0;      // GHz
  double pull = 0.0;     // GHz
  double omega_ge0 = 0.0;
  double omega_r_g = 0.0;
  bool straddle = false;  // max-overlap labeling ambiguous
};

// undriven joint system by direct exact diagonalization, dressed states
// labeled by maximum overlap with the bare product basis
StaticDispersive static_dispersive(const DeviceSpec& dev);

// low-order closed forms used as comparators
double rabi_displacement(double amplitude);                  // amplitude/2 on resonance
double stark_level_shift(double amplitude, double delta);    // amplitude^2/(4|delta|)
double fourier_first_order(double amplitude, double delta);  // (amplitude/2)/delta
double dispersive_chi_formula(double g, double delta, double anharm_magnitude);

struct ValidationOptions {
  // negative control: run the solver path with a deliberately coarse
  // integrator so the cross-method rows must fail
  bool loose_integrator = false;
};

std::vector<OracleRow> run_validation_suite(const ValidationOptions& opt = {});

}  // namespace lambshift
