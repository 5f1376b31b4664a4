#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lambshift/device.hpp"

namespace lambshift {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// model comparison variants: driven transmon+resonator, driven transmon
// alone, and the effective model that keeps only the static renormalized
// coupling plus the drive-induced longitudinal coupling (DLC)
enum class Variant { Full, NoResonator, StaticPlusDlcOnly };

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);
std::vector<Variant> all_variants();

// H(t) = static_part + drive_cos*cos(2 pi omega_d t) + drive_sin*sin(2 pi omega_d t),
// entries in linear GHz. drive_sin is zero for the bare models; effective-model
// assembly populates it when the DLC amplitudes pick up a complex phase.
struct TimePeriodicHamiltonian {
  Mat static_part;
  Mat drive_cos;
  Mat drive_sin;
  double omega_d = 0.0;
  int dim = 0;
  Variant variant = Variant::Full;

  double period() const { return 1.0 / omega_d; }
  Mat at(double t) const;
  void check_hermitian(double rel_tol = 1e-12) const;  // throws SolverError
};

Mat annihilation(int n);
Mat number_operator(int n);
Mat coupling_matrix(double g, int n_q);       // tridiagonal g*sqrt(n+1) ladder
Mat drive_matrix(double amplitude, int n_q);  // the same ladder scaled by the drive amplitude

// bare transmon alone: diagonal static part, no drive
TimePeriodicHamiltonian build_transmon(const DeviceSpec& dev);

// driven system. NoResonator returns the transmon-only driven Hamiltonian;
// Full and StaticPlusDlcOnly both return the bare joint system (the DLC
// truncation acts downstream on the renormalized coupling, not here) with
// the variant recorded on the result.
TimePeriodicHamiltonian build_joint(const DeviceSpec& dev, const DriveSpec& drive,
                                    Variant variant);

// joint-space bookkeeping: index = transmon*n_r + photon
int joint_index(int transmon, int photon, int n_r);
std::pair<int, int> joint_label(int index, int n_r);

}  // namespace lambshift
