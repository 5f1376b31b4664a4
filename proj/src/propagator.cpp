#include "lambshift/propagator.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <omp.h>

namespace lambshift {

Mat expmh(const Mat& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Eigen::VectorXd& w = es.eigenvalues();
  Vec phases(w.size());
  for (int k = 0; k < w.size(); ++k) {
    const double angle = -2.0 * M_PI * w[k] * dt;
    phases[k] = std::complex<double>(std::cos(angle), std::sin(angle));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double unitarity_defect(const Mat& u) {
  return (u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

namespace {

// fourth-order commutator-free Magnus factors for one step [t, t+dt]:
// U_step = expmh(a1*A1 + a2*A2, dt) * expmh(a2*A1 + a1*A2, dt), right factor first,
// with A1/A2 the Hamiltonian at the two Gauss-Legendre nodes
Mat cf4_step(const TimePeriodicHamiltonian& h, double t, double dt) {
  constexpr double kNode1 = 0.5 - 0.28867513459481287;  // 1/2 - sqrt(3)/6
  constexpr double kNode2 = 0.5 + 0.28867513459481287;
  constexpr double kA1 = (3.0 - 2.0 * 1.7320508075688772) / 12.0;
  constexpr double kA2 = (3.0 + 2.0 * 1.7320508075688772) / 12.0;
  Mat h1 = h.at(t + kNode1 * dt);
  Mat h2 = h.at(t + kNode2 * dt);
  return expmh(kA1 * h1 + kA2 * h2, dt) * expmh(kA2 * h1 + kA1 * h2, dt);
}

// fixed-shape pairwise product of factors[lo..hi), later factors on the left;
// the bracketing depends only on the index range, never on the thread count
Mat pairwise_product(const std::vector<Mat>& factors, int lo, int hi) {
  if (hi - lo == 1) return factors[lo];
  const int mid = lo + (hi - lo) / 2;
  return pairwise_product(factors, mid, hi) * pairwise_product(factors, lo, mid);
}

Mat monodromy_fixed(const TimePeriodicHamiltonian& h, int steps, double t0) {
  const double dt = h.period() / steps;
  std::vector<Mat> factors(steps);
#pragma omp parallel for schedule(static)
  for (int m = 0; m < steps; ++m) factors[m] = cf4_step(h, t0 + m * dt, dt);
  return pairwise_product(factors, 0, steps);
}

}  // namespace

Mat monodromy(const TimePeriodicHamiltonian& h, const PropagatorSettings& s, double t0) {
  constexpr int kMaxSteps = 1 << 14;
  int steps = s.steps_per_period;
  double defect = 0.0;
  for (; steps <= kMaxSteps; steps *= 2) {
    Mat u = monodromy_fixed(h, steps, t0);
    defect = unitarity_defect(u);
    if (defect <= 10.0 * s.tol) return u;
  }
  throw SolverError("one-period propagator failed the unitarity check: defect " +
                    std::to_string(defect) + " > " + std::to_string(10.0 * s.tol) + " at " +
                    std::to_string(kMaxSteps) + " steps");
}

Mat monodromy_reference(const TimePeriodicHamiltonian& h, int steps, double t0) {
  const double dt = h.period() / steps;
  Mat u = Mat::Identity(h.dim, h.dim);
  for (int m = 0; m < steps; ++m) u = cf4_step(h, t0 + m * dt, dt) * u;
  return u;
}

std::vector<Mat> stroboscopic_propagators(const TimePeriodicHamiltonian& h, int samples,
                                          int steps_per_sample) {
  const double dt = h.period() / (static_cast<double>(samples) * steps_per_sample);
  std::vector<Mat> props(samples);
  props[0] = Mat::Identity(h.dim, h.dim);
  Mat u = props[0];
  for (int m = 1; m < samples; ++m) {
    const double base = (m - 1) * h.period() / samples;
    for (int k = 0; k < steps_per_sample; ++k) u = cf4_step(h, base + k * dt, dt) * u;
    props[m] = u;
  }
  return props;
}

}  // namespace lambshift
