#include "lambshift/hamiltonian.hpp"

#include <cmath>

namespace lambshift {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoResonator: return "no_resonator";
    case Variant::StaticPlusDlcOnly: return "static_plus_dlc";
  }
  return "unknown";
}

std::optional<Variant> variant_from_name(const std::string& name) {
  for (Variant v : all_variants())
    if (name == variant_name(v)) return v;
  return std::nullopt;
}

std::vector<Variant> all_variants() {
  return {Variant::Full, Variant::NoResonator, Variant::StaticPlusDlcOnly};
}

Mat TimePeriodicHamiltonian::at(double t) const {
  const double phase = 2.0 * M_PI * omega_d * t;
  return static_part + std::cos(phase) * drive_cos + std::sin(phase) * drive_sin;
}

void TimePeriodicHamiltonian::check_hermitian(double rel_tol) const {
  auto defect = [](const Mat& m) {
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
  };
  if (defect(static_part) > rel_tol || defect(drive_cos) > rel_tol || defect(drive_sin) > rel_tol)
    throw SolverError("time-periodic Hamiltonian is not Hermitian");
}

Mat annihilation(int n) {
  Mat a = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

Mat number_operator(int n) {
  Mat num = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) num(k, k) = k;
  return num;
}

Mat coupling_matrix(double g, int n_q) {
  Mat c = Mat::Zero(n_q, n_q);
  for (int n = 0; n + 1 < n_q; ++n) {
    c(n, n + 1) = g * std::sqrt(n + 1.0);
    c(n + 1, n) = g * std::sqrt(n + 1.0);
  }
  return c;
}

Mat drive_matrix(double amplitude, int n_q) {
  Mat d = Mat::Zero(n_q, n_q);
  for (int n = 0; n + 1 < n_q; ++n) {
    d(n, n + 1) = amplitude * std::sqrt(n + 1.0);
    d(n + 1, n) = amplitude * std::sqrt(n + 1.0);
  }
  return d;
}

TimePeriodicHamiltonian build_transmon(const DeviceSpec& dev) {
  dev.validate();
  TimePeriodicHamiltonian h;
  h.dim = dev.n_q;
  h.variant = Variant::NoResonator;
  h.omega_d = 0.0;
  h.static_part = Mat::Zero(dev.n_q, dev.n_q);
  for (int n = 0; n < dev.n_q; ++n) h.static_part(n, n) = dev.transmon_levels[n];
  h.drive_cos = Mat::Zero(dev.n_q, dev.n_q);
  h.drive_sin = Mat::Zero(dev.n_q, dev.n_q);
  return h;
}

namespace {

// Kronecker product on dense complex matrices (small dimensions only)
Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TimePeriodicHamiltonian build_joint(const DeviceSpec& dev, const DriveSpec& drive,
                                    Variant variant) {
  dev.validate();
  drive.validate();
  if (variant == Variant::NoResonator) {
    TimePeriodicHamiltonian h = build_transmon(dev);
    h.omega_d = drive.omega_d;
    h.drive_cos = drive_matrix(drive.amplitude, dev.n_q);
    return h;
  }
  const int n_q = dev.n_q;
  const int n_r = dev.n_r;
  Mat eye_q = Mat::Identity(n_q, n_q);
  Mat eye_r = Mat::Identity(n_r, n_r);
  Mat h_q = Mat::Zero(n_q, n_q);
  for (int n = 0; n < n_q; ++n) h_q(n, n) = dev.transmon_levels[n];
  Mat a_r = annihilation(n_r);
  const std::complex<double> i_unit(0.0, 1.0);

  TimePeriodicHamiltonian h;
  h.dim = n_q * n_r;
  h.variant = variant;
  h.omega_d = drive.omega_d;
  h.static_part = kron(h_q, eye_r) + dev.resonator_freq * kron(eye_q, number_operator(n_r)) +
                  i_unit * kron(coupling_matrix(dev.coupling_g, n_q), a_r - Mat(a_r.adjoint()));
  h.drive_cos = kron(drive_matrix(drive.amplitude, n_q), eye_r);
  h.drive_sin = Mat::Zero(h.dim, h.dim);
  return h;
}

int joint_index(int transmon, int photon, int n_r) { return transmon * n_r + photon; }

std::pair<int, int> joint_label(int index, int n_r) { return {index / n_r, index % n_r}; }

}  // namespace lambshift
