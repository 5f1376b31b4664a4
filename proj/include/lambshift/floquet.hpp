#pragma once

#include <functional>
#include <map>

#include "lambshift/propagator.hpp"

namespace lambshift {

struct SolverSettings {
  PropagatorSettings prop;
  double overlap_threshold = 0.9;  // minimum successive-mode overlap while tracking
  double min_step = 1e-4;          // smallest adaptive amplitude step (GHz)
  double max_step = 0.05;          // largest amplitude step between accepted points (GHz)
  double tie_window = 0.02;        // overlap gap below which a match is flagged ambiguous
  int k_max = 10;                  // Fourier harmonic cutoff
  int fourier_samples = 64;        // sub-period samples, auto-doubled on normalization defect
  int fourier_steps_per_sample = 8;
};

// fold an energy into the Brillouin zone [-omega_d/2, omega_d/2)
double fold(double energy, double omega_d);

struct FloquetSolution {
  Eigen::VectorXd quasi_energies;  // ascending, inside [-omega_d/2, omega_d/2)
  Mat modes_t0;                    // columns are the Floquet modes at t = 0
  double omega_d = 0.0;
  bool degenerate = false;  // eigenvalue cluster closer than 1e-10 was re-resolved
};

// quasi-energies epsilon_j = -arg(lambda_j)/(2 pi T) and modes from the
// monodromy eigenproblem; degenerate eigenvalue clusters are re-diagonalized
// against the static Hamiltonian projected into the cluster subspace
FloquetSolution solve(const TimePeriodicHamiltonian& h, const SolverSettings& s);

using HamiltonianFamily = std::function<TimePeriodicHamiltonian(double amplitude)>;

// adiabatic branch continuation along the drive-amplitude axis with
// overlap-driven bisection; visited amplitudes are cached so states at
// arbitrary amplitudes can be served by restarting from the nearest
// cached point below
class BranchTracker {
 public:
  BranchTracker(HamiltonianFamily family, std::vector<int> labels, SolverSettings settings);

  struct State {
    double amplitude = 0.0;
    std::vector<double> energies;   // unfolded quasi-energy per label
    std::vector<int> windings;      // accumulated Brillouin winding per label
    Mat modes;                      // columns per label (frozen at break for broken branches)
    std::vector<char> broken;       // branch lost below the overlap threshold at min_step
    std::vector<double> last_good;  // last amplitude each branch was still tracked at
    std::vector<char> tie_flagged;  // ambiguous overlap encountered somewhere up to here
  };

  const State& state_at(double amplitude);

  const std::vector<int>& labels() const { return labels_; }
  double drive_frequency() const { return omega_d_; }
  int label_position(int label) const;  // -1 when the label is not tracked

 private:
  const State& step_to(const State& from, double target);

  HamiltonianFamily family_;
  std::vector<int> labels_;
  SolverSettings settings_;
  double omega_d_ = 0.0;
  std::map<double, State> history_;
};

struct FourierComponents {
  std::vector<Mat> comp;  // comp[b](j, k + k_max) = c_{label b, j}^{(k)}
  int k_max = 0;

  std::complex<double> get(int b, int j, int k) const { return comp[b](j, k + k_max); }
};

// Fourier components of every tracked mode at one amplitude: the t = 0 mode
// is propagated over uniform sub-period samples, the quasi-energy phase
// exp(+2 pi i eps t) is stripped using the unfolded branch energy (folded
// stripping would shift each branch's harmonic comb by its winding), and the
// samples are discrete-Fourier-transformed with
// c^{(k)} = (1/M) sum_m Phi(t_m) exp(-2 pi i k m / M).
FourierComponents fourier_components(const TimePeriodicHamiltonian& h,
                                     const BranchTracker::State& state,
                                     const SolverSettings& s);

}  // namespace lambshift
