#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <complex>

#include "lambshift/floquet.hpp"

using namespace lambshift;

namespace {

DeviceSpec two_level(double omega_ge) {
  DeviceSpec dev;
  dev.n_q = 2;
  dev.n_r = 2;
  dev.transmon_levels = {0.0, omega_ge};
  dev.resonator_freq = 4.335;
  dev.coupling_g = 0.0;
  return dev;
}

}  // namespace

TEST_CASE("fold maps into [-omega_d/2, omega_d/2)") {
  CHECK(fold(0.3, 4.2) == doctest::Approx(0.3));
  CHECK(fold(4.5, 4.2) == doctest::Approx(0.3));
  CHECK(fold(-4.0, 4.2) == doctest::Approx(0.2));
  CHECK(fold(2.2, 4.2) == doctest::Approx(-2.0));
  // half-open interval: the lower edge belongs to the zone, the upper wraps
  CHECK(fold(-2.1, 4.2) == doctest::Approx(-2.1));
  CHECK(fold(2.1, 4.2) == doctest::Approx(-2.1));
}

TEST_CASE("zero-drive quasi-energies are the folded static spectrum") {
  DeviceSpec dev = default_device(3, 3);
  TimePeriodicHamiltonian h = build_joint(dev, {4.2, 0.0}, Variant::Full);
  SolverSettings s;
  FloquetSolution sol = solve(h, s);
  CHECK_FALSE(sol.degenerate);

  Eigen::SelfAdjointEigenSolver<Mat> es(h.static_part);
  std::vector<double> folded(h.dim);
  for (int i = 0; i < h.dim; ++i) folded[i] = fold(es.eigenvalues()[i], 4.2);
  std::sort(folded.begin(), folded.end());
  for (int i = 0; i < h.dim; ++i) CHECK(std::abs(sol.quasi_energies[i] - folded[i]) < 1e-9);

  // and the solution is continuous as the drive switches on
  TimePeriodicHamiltonian h_eps = build_joint(dev, {4.2, 1e-6}, Variant::Full);
  FloquetSolution sol_eps = solve(h_eps, s);
  for (int i = 0; i < h.dim; ++i)
    CHECK(std::abs(sol_eps.quasi_energies[i] - sol.quasi_energies[i]) < 1e-6);
}

TEST_CASE("quasi-energies are gauge independent under a drive phase shift") {
  // cos(2 pi f t + phi) redistributes the drive between the two quadratures;
  // the Floquet spectrum must not move
  DeviceSpec dev = default_device(3, 3);
  TimePeriodicHamiltonian h = build_joint(dev, {4.2, 0.3}, Variant::Full);
  TimePeriodicHamiltonian shifted = h;
  const double phi = 0.7;
  shifted.drive_cos = std::cos(phi) * h.drive_cos;
  shifted.drive_sin = -std::sin(phi) * h.drive_cos;

  SolverSettings s;
  FloquetSolution a = solve(h, s);
  FloquetSolution b = solve(shifted, s);
  for (int i = 0; i < h.dim; ++i)
    CHECK(std::abs(a.quasi_energies[i] - b.quasi_energies[i]) < 1e-6);
}

TEST_CASE("quasi-energy sum satisfies the determinant rule") {
  // sum_j eps_j = -arg(det U)/(2 pi T) mod omega_d
  DeviceSpec dev = default_device(3, 3);
  TimePeriodicHamiltonian h = build_joint(dev, {4.2, 0.3}, Variant::Full);
  SolverSettings s;
  FloquetSolution sol = solve(h, s);
  Mat u = monodromy(h, s.prop);

  const double from_det = -std::arg(u.determinant()) / (2.0 * M_PI * h.period());
  double sum = 0.0;
  for (int i = 0; i < h.dim; ++i) sum += sol.quasi_energies[i];
  CHECK(std::abs(fold(sum - from_det, 4.2)) < 1e-8);
}

TEST_CASE("stepper converges at fourth order") {
  DeviceSpec dev = two_level(5.869);
  TimePeriodicHamiltonian h = build_joint(dev, {5.869, 0.3}, Variant::NoResonator);
  Mat ref = monodromy_reference(h, 512);
  const double err8 = (monodromy_reference(h, 8) - ref).cwiseAbs().maxCoeff();
  const double err16 = (monodromy_reference(h, 16) - ref).cwiseAbs().maxCoeff();
  CHECK(err8 / err16 > 8.0);  // fourth order doubles to ~16
}

TEST_CASE("parallel tree product is bit-identical to the serial reference") {
  DeviceSpec dev = default_device(3, 3);
  TimePeriodicHamiltonian h = build_joint(dev, {4.2, 0.3}, Variant::Full);
  PropagatorSettings prop;
  Mat tree = monodromy(h, prop);
  CHECK(unitarity_defect(tree) < 10.0 * prop.tol);
  Mat serial = monodromy_reference(h, prop.steps_per_period);
  CHECK((tree - serial).cwiseAbs().maxCoeff() < 1e-10);

  // the fixed-shape pairwise product must not depend on the thread count
  omp_set_num_threads(1);
  Mat u1 = monodromy(h, prop);
  omp_set_num_threads(4);
  Mat u4 = monodromy(h, prop);
  CHECK((u1 - u4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exactly degenerate monodromy is re-resolved against the static Hamiltonian") {
  // levels {0, 4.2} driven at 4.2 with zero amplitude: U(T) is the identity,
  // both quasi-energies fold to zero, and the cluster tie-break must recover
  // the static eigenbasis instead of an arbitrary unitary mixture
  DeviceSpec dev = two_level(4.2);
  TimePeriodicHamiltonian h = build_joint(dev, {4.2, 0.0}, Variant::NoResonator);
  SolverSettings s;
  FloquetSolution sol = solve(h, s);
  CHECK(sol.degenerate);
  CHECK(std::abs(sol.quasi_energies[0]) < 1e-9);
  CHECK(std::abs(sol.quasi_energies[1]) < 1e-9);
  for (int i = 0; i < 2; ++i) {
    const double w0 = std::norm(sol.modes_t0(0, i));
    const double w1 = std::norm(sol.modes_t0(1, i));
    CHECK(std::max(w0, w1) > 1.0 - 1e-9);  // each mode is a bare basis state
  }
  CHECK(std::abs(sol.modes_t0.col(0).dot(sol.modes_t0.col(1))) < 1e-9);
}

TEST_CASE("tracked branches reproduce the second-order level shifts") {
  DeviceSpec dev = two_level(5.869);
  const double f_d = 4.2, amp = 0.1;
  SolverSettings s;
  auto family = [&](double a) {
    return build_joint(dev, {f_d, a}, Variant::NoResonator);
  };
  BranchTracker tracker(family, {0, 1}, s);
  const auto& state = tracker.state_at(amp);
  REQUIRE_FALSE(state.broken[0]);
  REQUIRE_FALSE(state.broken[1]);

  const double delta = 5.869 - f_d, sigma = 5.869 + f_d;
  const double pred = amp * amp / 4.0 * (1.0 / delta + 1.0 / sigma);
  const double shift_g = state.energies[0] - 0.0;
  const double shift_e = state.energies[1] - 5.869;
  CHECK(std::abs(shift_g + pred) < 0.03 * pred);
  CHECK(std::abs(shift_e - pred) < 0.03 * pred);
  // two-level quasi-energy shifts are exactly opposite (traceless drive)
  CHECK(std::abs(shift_g + shift_e) < 1e-9);
}

TEST_CASE("resonant branches break and report their last good amplitude") {
  // at exact resonance the Floquet modes are equal superpositions for any
  // nonzero amplitude, so no continuation from the bare seed can succeed
  DeviceSpec dev = two_level(5.869);
  SolverSettings s;
  auto family = [&](double a) {
    return build_joint(dev, {5.869, a}, Variant::NoResonator);
  };
  BranchTracker tracker(family, {0, 1}, s);
  const auto& state = tracker.state_at(0.3);
  CHECK(state.broken[0]);
  CHECK(state.broken[1]);
  CHECK(state.last_good[0] == doctest::Approx(0.0));
  CHECK(state.last_good[1] == doctest::Approx(0.0));
  // energies stay frozen at the bare values instead of turning into noise
  CHECK(state.energies[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(state.energies[1] == doctest::Approx(5.869).epsilon(1e-9));
}

TEST_CASE("zero-drive Fourier components are a Kronecker delta in the harmonic index") {
  DeviceSpec dev = default_device(3, 3);
  const double f_d = 4.2;
  SolverSettings s;
  auto family = [&](double a) { return build_joint(dev, {f_d, a}, Variant::Full); };
  std::vector<int> labels;
  for (int i = 0; i < 9; ++i) labels.push_back(i);
  BranchTracker tracker(family, labels, s);
  const auto& state = tracker.state_at(0.0);
  FourierComponents fc = fourier_components(family(0.0), state, s);
  for (int b = 0; b < 9; ++b) {
    CHECK((fc.comp[b].col(fc.k_max) - state.modes.col(b)).norm() < 1e-9);
    for (int k = -fc.k_max; k <= fc.k_max; ++k) {
      if (k == 0) continue;
      CHECK(fc.comp[b].col(k + fc.k_max).norm() < 1e-9);
    }
  }
}

TEST_CASE("driven Fourier components are normalized and dominated by the carrier") {
  DeviceSpec dev = default_device(3, 3);
  const double f_d = 4.2;
  SolverSettings s;
  auto family = [&](double a) { return build_joint(dev, {f_d, a}, Variant::Full); };
  BranchTracker tracker(family, {0}, s);
  const auto& state = tracker.state_at(0.3);
  REQUIRE_FALSE(state.broken[0]);
  FourierComponents fc = fourier_components(family(0.3), state, s);
  const double total = fc.comp[0].squaredNorm();
  CHECK(std::abs(total - 1.0) < 1e-6);
  CHECK(fc.comp[0].col(fc.k_max).squaredNorm() > 0.9);
}

TEST_CASE("first-order sideband amplitude matches perturbation theory") {
  DeviceSpec dev = two_level(5.869);
  const double f_d = 4.2, amp = 0.05;
  SolverSettings s;
  auto family = [&](double a) {
    return build_joint(dev, {f_d, a}, Variant::NoResonator);
  };
  BranchTracker tracker(family, {0}, s);
  const auto& state = tracker.state_at(amp);
  FourierComponents fc = fourier_components(family(amp), state, s);
  const double expected = (amp / 2.0) / (5.869 - f_d);
  const double measured = std::abs(fc.get(0, 1, -1));
  CHECK(std::abs(measured - expected) < 0.05 * expected);
  // counter-rotating sideband lives at the opposite harmonic, suppressed by
  // the sum frequency instead of the detuning
  const double counter = std::abs(fc.get(0, 1, +1));
  CHECK(std::abs(counter - (amp / 2.0) / (5.869 + f_d)) < 0.10 * counter + 1e-4);
}
