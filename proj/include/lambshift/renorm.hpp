#pragma once

#include "lambshift/floquet.hpp"

namespace lambshift {

// Harmonic-class components of the renormalized coupling. For a level pair
// (n, m) the kept classes are q = n-m+1 and q = n-m-1 (time dependence
// e^{i 2 pi q f_d t}): g_plus holds the n-m+1 class and g_minus the n-m-1
// class. The static nearest-neighbor element is the q = 0 entry
// g_plus(n, n+1); the DLC amplitudes are the diagonal d_n = g_plus(n, n).
// Classes outside n-m±1 are computed, reported via offclass_max, dropped.
struct RenormalizedCoupling {
  Mat g_plus;
  Mat g_minus;
  double offclass_max = 0.0;

  std::complex<double> dlc(int n) const { return g_plus(n, n); }
  std::complex<double> static_elem(int n, int m) const;  // q = 0 class, |n-m| = 1
};

RenormalizedCoupling renormalized_coupling(const FourierComponents& c, const Mat& g_bare);

// transmon-only dressing served at arbitrary amplitude with caching:
// tracked dressed frequencies, mode Fourier components, and the
// renormalized coupling assembled from them
class TransmonDressing {
 public:
  TransmonDressing(const DeviceSpec& dev, double f_d, SolverSettings s);

  struct Dressed {
    std::vector<double> omega_tilde;  // unfolded dressed level frequencies (GHz)
    FourierComponents comps;
    RenormalizedCoupling coupling;
    bool tie_flagged = false;
  };

  const Dressed& at(double amplitude);
  double drive_frequency() const { return f_d_; }
  const DeviceSpec& device() const { return dev_; }

 private:
  DeviceSpec dev_;
  double f_d_ = 0.0;
  SolverSettings settings_;
  BranchTracker tracker_;
  std::map<double, Dressed> cache_;
};

// effective joint model from dressed ingredients: dressed transmon diagonal,
// bare resonator, static renormalized coupling, and (with include_dlc) the
// DLC drive quadratures i*2Re(d_n)cos - i*2Im(d_n)sin on (a - a^dag)
TimePeriodicHamiltonian assemble_effective(const TransmonDressing::Dressed& d,
                                           const DeviceSpec& dev, double f_d, bool include_dlc);

struct ObservableSet {
  double f_d = 0.0;
  double amplitude = 0.0;

  // transmon-only dressed transition frequencies (GHz)
  std::optional<double> omega_ge, omega_ef, omega_gf, omega_gd;
  // joint transition frequencies with the resonator in vacuum (GHz)
  std::optional<double> omega_ge0, omega_ef0, omega_gf0, omega_gd0;
  // dressed resonator frequency with the transmon in g / e (GHz)
  std::optional<double> omega_r_g, omega_r_e;

  std::optional<double> lamb_ge, lamb_gf, lamb_gd, lamb_ef;  // L~ = omega0 - omega (GHz)
  std::optional<double> pull;     // omega_r_g - bare resonator (GHz)
  std::optional<double> chi;      // omega_r_g - omega_r_e (GHz)
  std::optional<double> anharm0;  // omega_ge0 - omega_ef0 (GHz)
  std::optional<double> zeta;     // anharm0 / (omega_ge - omega_r_g - anharm0)
  std::optional<double> zeta_ratio;  // zeta / zeta(0), filled against a baseline
  std::optional<double> chi_scaled;  // chi(0) * zeta_ratio, constant-coupling comparator
  bool chi_singular = false;         // zeta denominator within 1e-6 of zero

  std::vector<int> broken_labels;  // joint labels whose branch broke below this amplitude
  bool tie_flagged = false;
};

// assemble observables from tracked joint and transmon states; fields whose
// branches broke are left absent rather than filled
ObservableSet observables(const BranchTracker::State& joint, const std::vector<int>& joint_labels,
                          const BranchTracker::State& transmon,
                          const std::vector<int>& transmon_labels, const DeviceSpec& dev,
                          const DriveSpec& drive);

// fill zeta_ratio / chi_scaled of row from a zero-drive baseline
void fill_against_baseline(ObservableSet& row, const ObservableSet& baseline);

// the constant-coupling cross-nonlinearity prediction chi(0)*zeta/zeta0;
// absent when either zeta is missing or singular
std::optional<double> chi_scaling(const ObservableSet& obs, const ObservableSet& baseline);

// the joint labels observables() needs: (q,0) for q = g,e,f,d plus (g,1),(e,1)
std::vector<int> observable_joint_labels(int n_q, int n_r);

struct StarkRatios {
  double eta_ef0 = 0.0, eta_ed0 = 0.0;  // from vacuum (resonator-ground) transitions
  double eta_ef = 0.0, eta_ed = 0.0;    // from transmon-only dressed transitions
  std::vector<double> grid;             // amplitude grid of the quadratic window
  std::vector<double> d_ge0, d_gf0, d_gd0;  // raw vacuum shifts over the grid (GHz)
  double window_max = 0.0;   // largest amplitude admitted to the window
  double quad_residual = 0.0;  // relative residual of the quadratic fit to d_ge0
};

// eta_ef = (1/2) d(omega_gf)/d(omega_ge), eta_ed = (1/3) d(omega_gd)/d(omega_ge),
// slopes through the origin over an automatically chosen quadratic-regime
// grid (largest amplitude with |d omega_ge| < 1 MHz, at least 8 points,
// quadratic-fit residual below 1%)
StarkRatios stark_ratios(const DeviceSpec& dev, double f_d, Variant variant,
                         const SolverSettings& s);

}  // namespace lambshift
