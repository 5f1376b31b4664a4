#pragma once

#include "lambshift/hamiltonian.hpp"

namespace lambshift {

// exp(-2 pi i H dt) for Hermitian H in linear-frequency units and dt in ns.
// This is the single place where linear frequencies meet the angular 2 pi.
Mat expmh(const Mat& h, double dt);

struct PropagatorSettings {
  int steps_per_period = 256;  // CF4 steps across one period
  double tol = 1e-9;           // unitarity-defect budget: defect must stay <= 10*tol
};

double unitarity_defect(const Mat& u);

// one-period propagator U(t0+T, t0) by commutator-free fourth-order Magnus
// stepping. Step factors are evaluated in parallel and combined with a
// fixed-shape pairwise product, so the result is bit-identical for any
// thread count. Steps are doubled (up to a cap) if the unitarity defect
// exceeds 10*tol; past the cap a SolverError reports the achieved defect.
Mat monodromy(const TimePeriodicHamiltonian& h, const PropagatorSettings& s, double t0 = 0.0);

// serial reference kernel (plain left-accumulation); kept for tests and the
// benchmark, not used on the solver path
Mat monodromy_reference(const TimePeriodicHamiltonian& h, int steps, double t0 = 0.0);

// cumulative sub-period propagators U(t_m, 0) at t_m = m*T/samples for
// m = 0..samples-1, each interval covered by steps_per_sample CF4 steps
std::vector<Mat> stroboscopic_propagators(const TimePeriodicHamiltonian& h, int samples,
                                          int steps_per_sample);

}  // namespace lambshift
