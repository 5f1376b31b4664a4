#include "lambshift/renorm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>

namespace lambshift {

std::complex<double> RenormalizedCoupling::static_elem(int n, int m) const {
  if (m == n + 1) return g_plus(n, m);
  if (m == n - 1) return g_minus(n, m);
  throw ConfigError("static coupling element is defined for nearest neighbors only");
}

RenormalizedCoupling renormalized_coupling(const FourierComponents& c, const Mat& g_bare) {
  const int nb = static_cast<int>(c.comp.size());
  const int k_max = c.k_max;
  RenormalizedCoupling out;
  out.g_plus = Mat::Zero(nb, nb);
  out.g_minus = Mat::Zero(nb, nb);

  // precompute g_bare applied to every harmonic of every branch
  std::vector<Mat> gc(nb);
  for (int m = 0; m < nb; ++m) gc[m] = g_bare * c.comp[m];

  // class-q element: sum_k <c_n^(k+q) | g_bare | c_m^(k)>
  auto class_elem = [&](int n, int m, int q) {
    std::complex<double> acc(0.0, 0.0);
    const int k_lo = std::max(-k_max, -k_max - q);
    const int k_hi = std::min(k_max, k_max - q);
    for (int k = k_lo; k <= k_hi; ++k)
      acc += c.comp[n].col(k + q + k_max).dot(gc[m].col(k + k_max));
    return acc;
  };

  for (int n = 0; n < nb; ++n)
    for (int m = 0; m < nb; ++m) {
      out.g_plus(n, m) = class_elem(n, m, n - m + 1);
      out.g_minus(n, m) = class_elem(n, m, n - m - 1);
      for (int q = -2 * k_max; q <= 2 * k_max; ++q) {
        if (q == n - m + 1 || q == n - m - 1) continue;
        out.offclass_max = std::max(out.offclass_max, std::abs(class_elem(n, m, q)));
      }
    }
  return out;
}

namespace {

std::vector<int> all_levels(int n_q) {
  std::vector<int> labels(n_q);
  for (int n = 0; n < n_q; ++n) labels[n] = n;
  return labels;
}

constexpr double kCacheKeyTol = 1e-12;

}  // namespace

TransmonDressing::TransmonDressing(const DeviceSpec& dev, double f_d, SolverSettings s)
    : dev_(dev),
      f_d_(f_d),
      settings_(s),
      tracker_(
          [dev, f_d](double a) {
            DriveSpec drive{f_d, a};
            return build_joint(dev, drive, Variant::NoResonator);
          },
          all_levels(dev.n_q), s) {
  dev_.validate();
  if (f_d_ <= 0.0) throw ConfigError("drive frequency must be positive");
}

const TransmonDressing::Dressed& TransmonDressing::at(double amplitude) {
  auto it = cache_.lower_bound(amplitude - kCacheKeyTol);
  if (it != cache_.end() && std::abs(it->first - amplitude) <= kCacheKeyTol) return it->second;

  const BranchTracker::State& state = tracker_.state_at(amplitude);
  for (int n = 0; n < dev_.n_q; ++n)
    if (state.broken[n])
      throw SolverError("transmon level " + std::to_string(n) +
                        " could not be tracked past amplitude " +
                        std::to_string(state.last_good[n]) + " GHz");

  DriveSpec drive{f_d_, amplitude};
  const TimePeriodicHamiltonian h = build_joint(dev_, drive, Variant::NoResonator);

  Dressed d;
  d.omega_tilde = state.energies;
  d.comps = fourier_components(h, state, settings_);
  d.coupling = renormalized_coupling(d.comps, coupling_matrix(dev_.coupling_g, dev_.n_q));
  d.tie_flagged = std::any_of(state.tie_flagged.begin(), state.tie_flagged.end(),
                              [](char f) { return f != 0; });
  return cache_.emplace(amplitude, std::move(d)).first->second;
}

TimePeriodicHamiltonian assemble_effective(const TransmonDressing::Dressed& d,
                                           const DeviceSpec& dev, double f_d, bool include_dlc) {
  const int n_q = dev.n_q;
  const int n_r = dev.n_r;
  if (static_cast<int>(d.omega_tilde.size()) != n_q)
    throw ConfigError("dressing data does not match the device's transmon truncation");
  const int dim = n_q * n_r;
  const std::complex<double> i_unit(0.0, 1.0);

  Mat a_r = annihilation(n_r);
  Mat quad_r = a_r - Mat(a_r.adjoint());  // (a - a^dag)

  // dressed transmon diagonal + bare resonator
  Mat h_static = Mat::Zero(dim, dim);
  for (int n = 0; n < n_q; ++n)
    for (int p = 0; p < n_r; ++p) {
      const int idx = joint_index(n, p, n_r);
      h_static(idx, idx) = d.omega_tilde[n] + dev.resonator_freq * p;
    }

  // static class of the renormalized coupling, Hermitian by the class pairing
  Mat g_static = Mat::Zero(n_q, n_q);
  for (int n = 0; n + 1 < n_q; ++n) {
    g_static(n, n + 1) = d.coupling.static_elem(n, n + 1);
    g_static(n + 1, n) = std::conj(g_static(n, n + 1));
  }
  for (int n = 0; n < n_q; ++n)
    for (int m = 0; m < n_q; ++m) {
      if (g_static(n, m) == std::complex<double>(0.0, 0.0)) continue;
      for (int p = 0; p < n_r; ++p)
        for (int p2 = 0; p2 < n_r; ++p2)
          h_static(joint_index(n, p, n_r), joint_index(m, p2, n_r)) +=
              i_unit * g_static(n, m) * quad_r(p, p2);
    }

  TimePeriodicHamiltonian h;
  h.dim = dim;
  h.variant = Variant::StaticPlusDlcOnly;
  h.omega_d = f_d;
  h.static_part = std::move(h_static);
  h.drive_cos = Mat::Zero(dim, dim);
  h.drive_sin = Mat::Zero(dim, dim);

  if (include_dlc) {
    // d_n e^{i w t} + d_n* e^{-i w t} = 2 Re(d_n) cos - 2 Im(d_n) sin on each level
    for (int n = 0; n < n_q; ++n) {
      const std::complex<double> dlc = d.coupling.dlc(n);
      for (int p = 0; p < n_r; ++p)
        for (int p2 = 0; p2 < n_r; ++p2) {
          const int row = joint_index(n, p, n_r);
          const int col = joint_index(n, p2, n_r);
          h.drive_cos(row, col) += i_unit * 2.0 * dlc.real() * quad_r(p, p2);
          h.drive_sin(row, col) += i_unit * -2.0 * dlc.imag() * quad_r(p, p2);
        }
    }
  }
  return h;
}

namespace {

// energy of one tracked label, absent when untracked or broken
std::optional<double> branch_energy(const BranchTracker::State& state,
                                    const std::vector<int>& labels, int label,
                                    std::vector<int>* broken_out) {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != label) continue;
    if (state.broken[i]) {
      if (broken_out) broken_out->push_back(label);
      return std::nullopt;
    }
    return state.energies[i];
  }
  return std::nullopt;
}

std::optional<double> diff(const std::optional<double>& a, const std::optional<double>& b) {
  if (a && b) return *a - *b;
  return std::nullopt;
}

}  // namespace

ObservableSet observables(const BranchTracker::State& joint, const std::vector<int>& joint_labels,
                          const BranchTracker::State& transmon,
                          const std::vector<int>& transmon_labels, const DeviceSpec& dev,
                          const DriveSpec& drive) {
  ObservableSet obs;
  obs.f_d = drive.omega_d;
  obs.amplitude = drive.amplitude;

  const int n_r = dev.n_r;
  auto joint_e = [&](int level, int photon) {
    return branch_energy(joint, joint_labels, joint_index(level, photon, n_r), &obs.broken_labels);
  };
  auto trans_e = [&](int level) {
    return branch_energy(transmon, transmon_labels, level, nullptr);
  };

  const auto g0 = joint_e(0, 0), e0 = joint_e(1, 0), f0 = joint_e(2, 0), d0 = joint_e(3, 0);
  const auto g1 = joint_e(0, 1), e1 = joint_e(1, 1);
  const auto tg = trans_e(0), te = trans_e(1), tf = trans_e(2), td = trans_e(3);

  obs.omega_ge = diff(te, tg);
  obs.omega_ef = diff(tf, te);
  obs.omega_gf = diff(tf, tg);
  obs.omega_gd = diff(td, tg);
  obs.omega_ge0 = diff(e0, g0);
  obs.omega_ef0 = diff(f0, e0);
  obs.omega_gf0 = diff(f0, g0);
  obs.omega_gd0 = diff(d0, g0);
  obs.omega_r_g = diff(g1, g0);
  obs.omega_r_e = diff(e1, e0);

  obs.lamb_ge = diff(obs.omega_ge0, obs.omega_ge);
  obs.lamb_gf = diff(obs.omega_gf0, obs.omega_gf);
  obs.lamb_gd = diff(obs.omega_gd0, obs.omega_gd);
  obs.lamb_ef = diff(obs.omega_ef0, obs.omega_ef);
  if (obs.omega_r_g) obs.pull = *obs.omega_r_g - dev.resonator_freq;
  obs.chi = diff(obs.omega_r_g, obs.omega_r_e);
  obs.anharm0 = diff(obs.omega_ge0, obs.omega_ef0);

  if (obs.anharm0 && obs.omega_ge && obs.omega_r_g) {
    const double den = *obs.omega_ge - *obs.omega_r_g - *obs.anharm0;
    if (std::abs(den) < 1e-6)
      obs.chi_singular = true;
    else
      obs.zeta = *obs.anharm0 / den;
  }

  auto any_tie = [](const std::vector<char>& flags) {
    return std::any_of(flags.begin(), flags.end(), [](char f) { return f != 0; });
  };
  obs.tie_flagged = any_tie(joint.tie_flagged) || any_tie(transmon.tie_flagged);
  return obs;
}

std::optional<double> chi_scaling(const ObservableSet& obs, const ObservableSet& baseline) {
  if (!obs.zeta || !baseline.zeta || !baseline.chi) return std::nullopt;
  if (std::abs(*baseline.zeta) < 1e-12) return std::nullopt;
  return *baseline.chi * (*obs.zeta / *baseline.zeta);
}

void fill_against_baseline(ObservableSet& row, const ObservableSet& baseline) {
  if (row.zeta && baseline.zeta && std::abs(*baseline.zeta) >= 1e-12)
    row.zeta_ratio = *row.zeta / *baseline.zeta;
  row.chi_scaled = chi_scaling(row, baseline);
}

std::vector<int> observable_joint_labels(int n_q, int n_r) {
  if (n_q < 2 || n_r < 2) throw ConfigError("observables need at least two levels on each side");
  std::vector<int> labels;
  for (int level = 0; level < std::min(n_q, 4); ++level)
    labels.push_back(joint_index(level, 0, n_r));
  labels.push_back(joint_index(0, 1, n_r));
  labels.push_back(joint_index(1, 1, n_r));
  return labels;
}

namespace {

// least-squares slope of y against x through the origin
double origin_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  if (sxx == 0.0) throw SolverError("Stark-ratio reference shift vanished over the whole window");
  return sxy / sxx;
}

}  // namespace

StarkRatios stark_ratios(const DeviceSpec& dev, double f_d, Variant variant,
                         const SolverSettings& s) {
  dev.validate();
  if (dev.n_q < 4)
    throw ConfigError(
        "Stark-ratio extraction needs at least four transmon levels; a two-level truncation "
        "leaves the ratios undefined");

  // vacuum-transition source (variant-dependent) and transmon-only source
  TransmonDressing dressing(dev, f_d, s);
  std::unique_ptr<BranchTracker> joint_tracker;
  std::vector<int> joint_labels;
  if (variant != Variant::NoResonator) {
    for (int level = 0; level < 4; ++level)
      joint_labels.push_back(joint_index(level, 0, dev.n_r));
    HamiltonianFamily family;
    if (variant == Variant::Full) {
      family = [dev, f_d](double a) {
        DriveSpec drive{f_d, a};
        return build_joint(dev, drive, Variant::Full);
      };
    } else {
      family = [&dressing, dev, f_d](double a) {
        return assemble_effective(dressing.at(a), dev, f_d, true);
      };
    }
    joint_tracker = std::make_unique<BranchTracker>(family, joint_labels, s);
  }

  // vacuum (resonator-ground) level energies at one amplitude
  auto vacuum_levels = [&](double a) {
    std::array<double, 4> e{};
    if (variant == Variant::NoResonator) {
      const auto& d = dressing.at(a);
      for (int l = 0; l < 4; ++l) e[l] = d.omega_tilde[l];
    } else {
      const BranchTracker::State& st = joint_tracker->state_at(a);
      for (int l = 0; l < 4; ++l) {
        if (st.broken[l])
          throw SolverError("Stark-ratio branch for level " + std::to_string(l) +
                            " broke inside the quadratic window");
        e[l] = st.energies[l];
      }
    }
    return e;
  };

  const std::array<double, 4> base0 = vacuum_levels(0.0);
  const auto& dress0 = dressing.at(0.0);

  // probe step to place the window where the ge shift reaches ~1 MHz
  constexpr double kTargetShift = 1e-3;  // GHz
  constexpr double kProbe = 0.02;
  constexpr double kWindowCap = 0.25;
  const std::array<double, 4> probe = vacuum_levels(kProbe);
  const double probe_shift = std::abs((probe[1] - probe[0]) - (base0[1] - base0[0]));
  double window = probe_shift > 1e-12 ? kProbe * std::sqrt(kTargetShift / probe_shift) : kWindowCap;
  window = std::min(window, kWindowCap);

  constexpr int kPoints = 8;  // nonzero grid points
  StarkRatios out;
  for (int attempt = 0; attempt < 12; ++attempt) {
    std::vector<double> grid, d_ge0, d_gf0, d_gd0, d_ge, d_gf, d_gd;
    for (int i = 1; i <= kPoints; ++i) {
      const double a = window * i / kPoints;
      const std::array<double, 4> lev = vacuum_levels(a);
      const auto& d = dressing.at(a);
      grid.push_back(a);
      d_ge0.push_back((lev[1] - lev[0]) - (base0[1] - base0[0]));
      d_gf0.push_back((lev[2] - lev[0]) - (base0[2] - base0[0]));
      d_gd0.push_back((lev[3] - lev[0]) - (base0[3] - base0[0]));
      d_ge.push_back((d.omega_tilde[1] - d.omega_tilde[0]) -
                     (dress0.omega_tilde[1] - dress0.omega_tilde[0]));
      d_gf.push_back((d.omega_tilde[2] - d.omega_tilde[0]) -
                     (dress0.omega_tilde[2] - dress0.omega_tilde[0]));
      d_gd.push_back((d.omega_tilde[3] - d.omega_tilde[0]) -
                     (dress0.omega_tilde[3] - dress0.omega_tilde[0]));
    }

    // quadratic fit through the origin and its relative residual
    double num = 0.0, den = 0.0, dmax = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      num += grid[i] * grid[i] * d_ge0[i];
      den += grid[i] * grid[i] * grid[i] * grid[i];
      dmax = std::max(dmax, std::abs(d_ge0[i]));
    }
    const double coeff = den > 0.0 ? num / den : 0.0;
    double residual = 0.0;
    for (int i = 0; i < kPoints; ++i)
      residual = std::max(residual, std::abs(coeff * grid[i] * grid[i] - d_ge0[i]));
    residual = dmax > 0.0 ? residual / dmax : 0.0;

    const bool in_window = std::abs(d_ge0.back()) < kTargetShift * 1.000001;
    if ((residual < 0.01 && in_window) || attempt == 11) {
      out.grid = grid;
      out.d_ge0 = d_ge0;
      out.d_gf0 = d_gf0;
      out.d_gd0 = d_gd0;
      out.window_max = window;
      out.quad_residual = residual;
      out.eta_ef0 = 0.5 * origin_slope(d_ge0, d_gf0);
      out.eta_ed0 = origin_slope(d_ge0, d_gd0) / 3.0;
      out.eta_ef = 0.5 * origin_slope(d_ge, d_gf);
      out.eta_ed = origin_slope(d_ge, d_gd) / 3.0;
      if (residual >= 0.01)
        throw SolverError("quadratic window for Stark ratios did not converge: residual " +
                          std::to_string(residual));
      return out;
    }
    window *= 0.8;
  }
  throw SolverError("quadratic window for Stark ratios did not converge");
}

}  // namespace lambshift
