#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lambshift/dephasing.hpp"

using namespace lambshift;

namespace {

ObservableSet dressed_point() {
  ObservableSet obs;
  obs.omega_ge0 = 5.902;
  obs.omega_r_g = 4.290;
  obs.anharm0 = 0.165;
  obs.chi = 0.0086;
  return obs;
}

std::vector<int> first_levels(const DeviceSpec& dev) {
  std::vector<int> labels;
  for (int level = 0; level < std::min(dev.n_q, 4); ++level) labels.push_back(level);
  return labels;
}

}  // namespace

TEST_CASE("decoherence parameter validation") {
  DecoherenceParams dec;
  CHECK_NOTHROW(dec.validate());
  CHECK(dec.gamma1_r_at_drive() == doctest::Approx(0.83 * 13.47));

  DecoherenceParams bad = dec;
  bad.gamma1_q = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = dec;
  bad.gamma_phi_q = -0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = dec;
  bad.gamma1_r_at_res = -13.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = dec;
  bad.gamma1_r_scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("dephasing rate is exactly linear in drive and resonator decay") {
  ObservableSet obs = dressed_point();
  DecoherenceParams dec;

  CHECK(did_rate(obs, {4.2, 0.0}, dec).rate == 0.0);

  const double r1 = did_rate(obs, {4.2, 0.1}, dec).rate;
  const double r2 = did_rate(obs, {4.2, 0.2}, dec).rate;
  CHECK(r1 > 0.0);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));

  DecoherenceParams doubled = dec;
  doubled.gamma1_r_at_res *= 2.0;
  CHECK(did_rate(obs, {4.2, 0.1}, doubled).rate == doctest::Approx(2.0 * r1).epsilon(1e-12));
}

TEST_CASE("dephasing rate error paths") {
  DecoherenceParams dec;

  ObservableSet missing = dressed_point();
  missing.chi.reset();
  CHECK_THROWS_AS(did_rate(missing, {4.2, 0.1}, dec), SolverError);

  ObservableSet wrong_sign = dressed_point();
  wrong_sign.chi = -0.0086;
  CHECK_THROWS_AS(did_rate(wrong_sign, {4.2, 0.1}, dec), SolverError);

  ObservableSet on_resonance = dressed_point();
  CHECK_THROWS_AS(did_rate(on_resonance, {*on_resonance.omega_r_g, 0.1}, dec), SolverError);
}

TEST_CASE("near-resonator flag trips inside ten linewidths") {
  ObservableSet obs = dressed_point();
  DecoherenceParams dec;
  // |4.290 - 4.2| = 90 MHz < 10 * 11.18 MHz
  CHECK(did_rate(obs, {4.2, 0.1}, dec).near_resonator);
  // |4.290 - 4.0| = 290 MHz is safely outside
  CHECK_FALSE(did_rate(obs, {4.0, 0.1}, dec).near_resonator);
}

TEST_CASE("linewidth anchor and zero floor") {
  DecoherenceParams dec;
  // undriven width calibrated against the measured 0.83 MHz
  CHECK(linewidth(dec, 0.0) == doctest::Approx(0.83).epsilon(1e-12));
  CHECK(std::abs(linewidth(dec, 0.0) - 0.83) < 0.02);

  DecoherenceParams off;
  off.gamma1_q = 0.0;
  off.gamma_phi_q = 0.0;
  CHECK(linewidth(off, 0.0) == 0.0);
  CHECK(linewidth(dec, 1.0) > linewidth(dec, 0.0));
}

TEST_CASE("static-detuning estimate stays within twenty percent of the dressed rate") {
  // the rate formula evaluated with undriven observables against the same
  // formula fed the tracked drive-dependent ones
  DeviceSpec dev = default_device();
  const double f_d = 4.2;
  SolverSettings s;
  DecoherenceParams dec;
  BranchTracker joint(
      [&](double a) { return build_joint(dev, DriveSpec{f_d, a}, Variant::Full); },
      observable_joint_labels(dev.n_q, dev.n_r), s);
  BranchTracker transmon(
      [&](double a) { return build_joint(dev, DriveSpec{f_d, a}, Variant::NoResonator); },
      first_levels(dev), s);
  const std::vector<int> jl = observable_joint_labels(dev.n_q, dev.n_r);
  const std::vector<int> tl = first_levels(dev);

  ObservableSet base = observables(joint.state_at(0.0), jl, transmon.state_at(0.0), tl, dev,
                                   DriveSpec{f_d, 0.0});
  for (double amp = 0.1; amp <= 0.501; amp += 0.1) {
    const DriveSpec drive{f_d, amp};
    ObservableSet obs = observables(joint.state_at(amp), jl, transmon.state_at(amp), tl, dev,
                                    drive);
    const double dressed = did_rate(obs, drive, dec).rate;
    const double static_est = did_rate(base, drive, dec).rate;
    REQUIRE(dressed > 0.0);
    CHECK(std::abs(static_est - dressed) / dressed < 0.20);
  }
}
