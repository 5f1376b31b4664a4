#include "lambshift/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace lambshift {

double fold(double energy, double omega_d) {
  double z = std::fmod(energy + 0.5 * omega_d, omega_d);
  if (z < 0.0) z += omega_d;
  return z - 0.5 * omega_d;
}

namespace {

// rotate a column so its largest-magnitude entry is real and positive
void fix_phase(Eigen::Ref<Vec> col) {
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < col.size(); ++i) {
    const double mag = std::abs(col[i]);
    if (mag > best) {
      best = mag;
      imax = i;
    }
  }
  const std::complex<double> z = col[imax];
  if (std::abs(z) > 0.0) col *= std::conj(z) / std::abs(z);
}

}  // namespace

FloquetSolution solve(const TimePeriodicHamiltonian& h, const SolverSettings& s) {
  h.check_hermitian();
  const Mat u = monodromy(h, s.prop);
  const int dim = h.dim;

  // the Schur basis of a unitary matrix is an orthonormal eigenbasis up to
  // roundoff, and stays orthonormal through degenerate clusters
  Eigen::ComplexSchur<Mat> schur(u, true);
  if (schur.info() != Eigen::Success) throw SolverError("Schur decomposition failed to converge");
  Vec lambda = schur.matrixT().diagonal();
  Mat modes = schur.matrixU();

  // group eigenvalues closer than the cluster tolerance (union-find over pairs)
  constexpr double kClusterTol = 1e-10;
  std::vector<int> parent(dim);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      if (std::abs(lambda[i] - lambda[j]) < kClusterTol) parent[find(i)] = find(j);

  bool degenerate = false;
  std::vector<std::vector<int>> clusters(dim);
  for (int i = 0; i < dim; ++i) clusters[find(i)].push_back(i);
  for (const auto& cluster : clusters) {
    if (cluster.size() < 2) continue;
    degenerate = true;
    // tie-break the arbitrary basis inside the cluster by diagonalizing the
    // static Hamiltonian projected onto the cluster subspace
    Mat basis(dim, cluster.size());
    for (size_t c = 0; c < cluster.size(); ++c) basis.col(c) = modes.col(cluster[c]);
    Mat projected = basis.adjoint() * h.static_part * basis;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (projected + projected.adjoint()));
    basis = basis * es.eigenvectors();
    for (size_t c = 0; c < cluster.size(); ++c) modes.col(cluster[c]) = basis.col(c);
  }

  // every column must still be an eigenvector of the monodromy
  constexpr double kResidualTol = 1e-7;
  for (int i = 0; i < dim; ++i) {
    const double residual = (u * modes.col(i) - lambda[i] * modes.col(i)).norm();
    if (residual > kResidualTol)
      throw SolverError("monodromy eigenpair residual " + std::to_string(residual) +
                        " exceeds " + std::to_string(kResidualTol));
  }

  const double period = h.period();
  Eigen::VectorXd eps(dim);
  for (int i = 0; i < dim; ++i) eps[i] = -std::arg(lambda[i]) / (2.0 * M_PI * period);

  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eps[a] < eps[b]; });

  FloquetSolution sol;
  sol.omega_d = h.omega_d;
  sol.degenerate = degenerate;
  sol.quasi_energies.resize(dim);
  sol.modes_t0.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    sol.quasi_energies[i] = eps[order[i]];
    sol.modes_t0.col(i) = modes.col(order[i]);
    fix_phase(sol.modes_t0.col(i));
  }
  return sol;
}

namespace {

constexpr double kAmplitudeKeyTol = 1e-12;

double unfold(double eps, double omega_d, double prev_energy) {
  return eps + std::round((prev_energy - eps) / omega_d) * omega_d;
}

}  // namespace

BranchTracker::BranchTracker(HamiltonianFamily family, std::vector<int> labels,
                             SolverSettings settings)
    : family_(std::move(family)), labels_(std::move(labels)), settings_(std::move(settings)) {
  TimePeriodicHamiltonian h0 = family_(0.0);
  if (h0.omega_d <= 0.0) throw ConfigError("branch tracking requires a positive drive frequency");
  omega_d_ = h0.omega_d;
  const int dim = h0.dim;
  const int nb = static_cast<int>(labels_.size());
  for (int label : labels_)
    if (label < 0 || label >= dim) throw ConfigError("tracked label outside the Hilbert space");

  // seed at zero amplitude from the static eigenproblem, labeling each branch
  // by the bare basis state its eigenvector overlaps most
  Eigen::SelfAdjointEigenSolver<Mat> es(h0.static_part);
  if (es.info() != Eigen::Success) throw SolverError("static diagonalization failed");
  const Mat& vecs = es.eigenvectors();

  State seed;
  seed.amplitude = 0.0;
  seed.energies.resize(nb);
  seed.windings.resize(nb);
  seed.modes.resize(dim, nb);
  seed.broken.assign(nb, 0);
  seed.last_good.assign(nb, 0.0);
  seed.tie_flagged.assign(nb, 0);

  std::vector<char> taken(dim, 0);
  for (int b = 0; b < nb; ++b) {
    const int label = labels_[b];
    int best = -1;
    double best_w = -1.0;
    double second_w = -1.0;
    for (int c = 0; c < dim; ++c) {
      if (taken[c]) continue;
      const double w = std::norm(vecs(label, c));
      if (w > best_w) {
        second_w = best_w;
        best_w = w;
        best = c;
      } else if (w > second_w) {
        second_w = w;
      }
    }
    taken[best] = 1;
    // without a clear winner the label assignment is ambiguous (hybridized
    // static eigenvectors); 2x margin avoids knife-edge flips at exact mixing
    if (best_w < 2.0 * second_w) seed.tie_flagged[b] = 1;
    const double energy = es.eigenvalues()[best];
    seed.energies[b] = energy;
    seed.windings[b] = static_cast<int>(std::round((energy - fold(energy, omega_d_)) / omega_d_));
    seed.modes.col(b) = vecs.col(best);
    fix_phase(seed.modes.col(b));
  }
  history_.emplace(0.0, std::move(seed));
}

int BranchTracker::label_position(int label) const {
  for (size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  return -1;
}

namespace {

struct MatchOutcome {
  std::vector<int> choice;      // solution column per branch, -1 for no match
  std::vector<char> tie;        // ambiguity latched during this match
};

// match every active branch of `from` to a column of `sol` by mode overlap;
// ambiguous overlaps fall back to energy continuity, and collisions are
// resolved in favor of the branch with the smaller energy jump
MatchOutcome match_branches(const BranchTracker::State& from, const FloquetSolution& sol,
                            const SolverSettings& s, double omega_d) {
  const int nb = static_cast<int>(from.energies.size());
  const int dim = static_cast<int>(sol.quasi_energies.size());
  MatchOutcome out;
  out.choice.assign(nb, -1);
  out.tie.assign(nb, 0);

  std::vector<std::vector<double>> overlap(nb, std::vector<double>(dim, 0.0));
  std::vector<std::vector<char>> banned(nb, std::vector<char>(dim, 0));

  auto energy_jump = [&](int b, int c) {
    return std::abs(unfold(sol.quasi_energies[c], omega_d, from.energies[b]) - from.energies[b]);
  };
  auto pick = [&](int b) {
    int best = -1;
    double best_o = -1.0;
    for (int c = 0; c < dim; ++c) {
      if (banned[b][c]) continue;
      if (overlap[b][c] > best_o) {
        best_o = overlap[b][c];
        best = c;
      }
    }
    if (best < 0 || best_o < s.overlap_threshold) return -1;
    int chosen = best;
    bool ambiguous = false;
    for (int c = 0; c < dim; ++c) {
      if (c == best || banned[b][c]) continue;
      if (overlap[b][c] > best_o - s.tie_window && overlap[b][c] >= s.overlap_threshold) {
        ambiguous = true;
        if (energy_jump(b, c) < energy_jump(b, chosen)) chosen = c;
      }
    }
    if (ambiguous) out.tie[b] = 1;
    return chosen;
  };

  for (int b = 0; b < nb; ++b) {
    if (from.broken[b]) continue;
    for (int c = 0; c < dim; ++c)
      overlap[b][c] = std::abs(sol.modes_t0.col(c).dot(from.modes.col(b)));
    out.choice[b] = pick(b);
  }

  // resolve collisions; each pass bans the contested column for every branch
  // except the one continuing most smoothly in energy
  for (int pass = 0; pass < nb; ++pass) {
    bool collided = false;
    for (int c = 0; c < dim; ++c) {
      int winner = -1;
      for (int b = 0; b < nb; ++b) {
        if (out.choice[b] != c) continue;
        if (winner < 0 || energy_jump(b, c) < energy_jump(winner, c))
          winner = b;
      }
      for (int b = 0; b < nb; ++b) {
        if (out.choice[b] != c || b == winner) continue;
        collided = true;
        banned[b][c] = 1;
        out.tie[b] = 1;
        out.choice[b] = pick(b);
      }
    }
    if (!collided) break;
  }
  return out;
}

}  // namespace

const BranchTracker::State& BranchTracker::step_to(const State& from, double target) {
  const int nb = static_cast<int>(labels_.size());
  double remaining = target - from.amplitude;
  double step = std::min(settings_.max_step, remaining);

  while (true) {
    const bool final_hop = step >= remaining - 1e-15;
    const double trial = final_hop ? target : from.amplitude + step;
    const FloquetSolution sol = lambshift::solve(family_(trial), settings_);
    MatchOutcome match = match_branches(from, sol, settings_, omega_d_);

    bool any_failed = false;
    for (int b = 0; b < nb; ++b)
      if (!from.broken[b] && match.choice[b] < 0) any_failed = true;

    if (any_failed && step * 0.5 >= settings_.min_step) {
      step *= 0.5;
      continue;
    }

    // accept; branches that still have no match at the minimum step are
    // frozen at their last good amplitude
    State next;
    next.amplitude = trial;
    next.energies.resize(nb);
    next.windings.resize(nb);
    next.modes.resize(sol.modes_t0.rows(), nb);
    next.broken.assign(nb, 0);
    next.last_good.assign(nb, 0.0);
    next.tie_flagged.assign(nb, 0);
    for (int b = 0; b < nb; ++b) {
      next.tie_flagged[b] = from.tie_flagged[b] || match.tie[b];
      if (from.broken[b] || match.choice[b] < 0) {
        next.broken[b] = 1;
        next.energies[b] = from.energies[b];
        next.windings[b] = from.windings[b];
        next.modes.col(b) = from.modes.col(b);
        next.last_good[b] = from.broken[b] ? from.last_good[b] : from.amplitude;
        continue;
      }
      const int c = match.choice[b];
      const double eps = sol.quasi_energies[c];
      const int winding = static_cast<int>(std::round((from.energies[b] - eps) / omega_d_));
      next.energies[b] = eps + winding * omega_d_;
      next.windings[b] = winding;
      next.modes.col(b) = sol.modes_t0.col(c);
      // align the phase with the previous mode for smooth continuation
      const std::complex<double> z = from.modes.col(b).dot(next.modes.col(b));
      if (std::abs(z) > 0.0) next.modes.col(b) *= std::conj(z) / std::abs(z);
      next.last_good[b] = trial;
    }
    auto inserted = history_.emplace(trial, std::move(next));
    return inserted.first->second;
  }
}

const BranchTracker::State& BranchTracker::state_at(double amplitude) {
  if (amplitude < 0.0) throw ConfigError("drive amplitude must be non-negative");
  auto it = history_.upper_bound(amplitude + kAmplitudeKeyTol);
  if (it == history_.begin()) throw SolverError("branch history lost its seed state");
  --it;
  if (std::abs(it->first - amplitude) <= kAmplitudeKeyTol) return it->second;
  const State* cur = &it->second;
  while (cur->amplitude < amplitude - kAmplitudeKeyTol) cur = &step_to(*cur, amplitude);
  return *cur;
}

FourierComponents fourier_components(const TimePeriodicHamiltonian& h,
                                     const BranchTracker::State& state,
                                     const SolverSettings& s) {
  const int dim = h.dim;
  const int nb = static_cast<int>(state.energies.size());
  const int k_max = s.k_max;
  constexpr int kMaxSamples = 512;
  constexpr double kNormTol = 1e-6;
  int samples = std::max(s.fourier_samples, 2 * k_max + 2);

  const double period = h.period();
  double defect = 0.0;
  while (true) {
    const std::vector<Mat> props = stroboscopic_propagators(h, samples, s.fourier_steps_per_sample);

    FourierComponents fc;
    fc.k_max = k_max;
    fc.comp.assign(nb, Mat::Zero(dim, 2 * k_max + 1));
    defect = 0.0;
    for (int b = 0; b < nb; ++b) {
      // periodic part of the branch: propagate the t = 0 mode and strip the
      // quasi-energy phase using the unfolded energy so the harmonic comb
      // stays put through Brillouin-zone crossings
      Mat periodic(dim, samples);
      for (int m = 0; m < samples; ++m) {
        const double t = m * period / samples;
        const double angle = 2.0 * M_PI * state.energies[b] * t;
        periodic.col(m) =
            props[m] * state.modes.col(b) * std::complex<double>(std::cos(angle), std::sin(angle));
      }
      double norm_sum = 0.0;
      for (int k = -k_max; k <= k_max; ++k) {
        Vec acc = Vec::Zero(dim);
        for (int m = 0; m < samples; ++m) {
          const double angle = -2.0 * M_PI * k * m / samples;
          acc += periodic.col(m) * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        acc /= static_cast<double>(samples);
        fc.comp[b].col(k + k_max) = acc;
        norm_sum += acc.squaredNorm();
      }
      defect = std::max(defect, std::abs(norm_sum - 1.0));
    }
    if (defect <= kNormTol) return fc;
    if (samples * 2 > kMaxSamples) break;
    samples *= 2;
  }
  throw SolverError("Fourier normalization defect " + std::to_string(defect) +
                    " persists at " + std::to_string(kMaxSamples) +
                    " samples; increase the harmonic cutoff");
}

}  // namespace lambshift
