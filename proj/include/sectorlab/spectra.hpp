#pragma once

#include <Eigen/Dense>
#include <random>

#include "sectorlab/lattice.hpp"

namespace sectorlab {

// H(s) = s*H0 + (1-s) sum_q X_q is real symmetric in the computational
// basis, so the eigensolver works in real arithmetic.
inline void apply_hs_real(const EnergyTable& table, int n_qubits, double s,
                          const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const std::size_t n = table.size();
  y.resize(static_cast<Eigen::Index>(n));
  const double w = 1.0 - s;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    y(i) = s * table.values[i] * x(i);
  for (int q = 0; q < n_qubits; ++q) {
    const std::size_t bit = std::size_t{1} << q;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      y(i) += w * x(static_cast<Eigen::Index>(static_cast<std::size_t>(i) ^ bit));
  }
}

struct LowestKResult {
  std::vector<double> eigenvalues;        // ascending
  std::vector<Eigen::VectorXd> eigenvectors;
  int matvecs = 0;
};

// Lowest k eigenvalues of H(s) by subspace iteration with explicit
// Rayleigh-Ritz projection, full reorthogonalization, and locking of
// converged pairs (which resolves degeneracies one copy at a time).
inline LowestKResult lowest_k(const IsingModel& model, double s, int k, double tol = 1e-8,
                              std::uint64_t seed = 1, bool want_vectors = false) {
  if (k < 1 || k > 16) throw std::invalid_argument("lowest_k: k must be in [1, 16]");
  const EnergyTable table = energy_table(model);
  const std::size_t dim = std::size_t{1} << model.n_sites;
  const int keep = std::min<int>(k + 4, static_cast<int>(dim));
  const int m_max = std::min<int>(std::max(3 * k + 12, 40), static_cast<int>(dim));
  const double tol_r = std::max(1e-6, std::sqrt(tol) * 0.1);  // residual target
  const int max_cycles = 400;

  std::mt19937_64 rng(seed_stream(seed, "spectra-start"));
  std::normal_distribution<double> dist;
  auto random_vec = [&]() {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = dist(rng);
    return v;
  };

  std::vector<Eigen::VectorXd> locked_vec;
  std::vector<double> locked_val;
  std::vector<Eigen::VectorXd> V, W;  // basis and A*basis
  Eigen::MatrixXd H;                  // projected operator

  auto orthonormalize = [&](Eigen::VectorXd& v) -> bool {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : locked_vec) v -= u.dot(v) * u;
      for (const auto& u : V) v -= u.dot(v) * u;
    }
    const double nrm = v.norm();
    if (nrm < 1e-10) return false;
    v /= nrm;
    return true;
  };

  auto push_basis_vector = [&](Eigen::VectorXd v) -> bool {
    if (!orthonormalize(v)) return false;
    Eigen::VectorXd w;
    apply_hs_real(table, model.n_sites, s, v, w);
    const int m = static_cast<int>(V.size());
    H.conservativeResize(m + 1, m + 1);
    for (int i = 0; i < m; ++i) {
      const double hij = V[static_cast<std::size_t>(i)].dot(w);
      H(i, m) = hij;
      H(m, i) = hij;
    }
    H(m, m) = v.dot(w);
    V.push_back(std::move(v));
    W.push_back(std::move(w));
    return true;
  };

  LowestKResult res;
  Eigen::VectorXd next = random_vec();
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    while (static_cast<int>(V.size()) + static_cast<int>(locked_vec.size()) <
               static_cast<int>(dim) &&
           static_cast<int>(V.size()) < m_max) {
      if (!push_basis_vector(next)) next = random_vec();
      else {
        next = W.back();  // Krylov continuation
        ++res.matvecs;
      }
    }
    const int m = static_cast<int>(V.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(m, m));
    const Eigen::MatrixXd& Y = es.eigenvectors();

    // assemble the lowest `keep` Ritz pairs
    const int nk = std::min(keep, m);
    std::vector<Eigen::VectorXd> rx(static_cast<std::size_t>(nk)), rw(static_cast<std::size_t>(nk));
    for (int i = 0; i < nk; ++i) {
      rx[static_cast<std::size_t>(i)] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
      rw[static_cast<std::size_t>(i)] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
      for (int j = 0; j < m; ++j) {
        rx[static_cast<std::size_t>(i)] += Y(j, i) * V[static_cast<std::size_t>(j)];
        rw[static_cast<std::size_t>(i)] += Y(j, i) * W[static_cast<std::size_t>(j)];
      }
    }

    // lock the converged prefix
    int locked_now = 0;
    for (int i = 0; i < nk; ++i) {
      const double theta = es.eigenvalues()(i);
      const double resid = (rw[static_cast<std::size_t>(i)] - theta * rx[static_cast<std::size_t>(i)]).norm();
      if (resid < tol_r) {
        locked_val.push_back(theta);
        locked_vec.push_back(rx[static_cast<std::size_t>(i)]);
        ++locked_now;
        if (static_cast<int>(locked_val.size()) == k) break;
      } else {
        break;
      }
    }
    if (static_cast<int>(locked_val.size()) >= k ||
        locked_vec.size() + V.size() >= dim) {
      res.eigenvalues.assign(locked_val.begin(), locked_val.begin() + std::min<std::size_t>(k, locked_val.size()));
      if (want_vectors)
        res.eigenvectors.assign(locked_vec.begin(),
                                locked_vec.begin() + std::min<std::size_t>(k, locked_vec.size()));
      if (res.eigenvalues.size() < static_cast<std::size_t>(k)) {
        // tiny spaces: the basis exhausted the complement; take Ritz values
        for (int i = locked_now; i < nk && res.eigenvalues.size() < static_cast<std::size_t>(k); ++i)
          res.eigenvalues.push_back(es.eigenvalues()(i));
      }
      // locking can order near-degenerate pairs within the residual tolerance
      if (want_vectors) {
        std::vector<int> order(res.eigenvalues.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return res.eigenvalues[static_cast<std::size_t>(a)] < res.eigenvalues[static_cast<std::size_t>(b)];
        });
        std::vector<double> ev;
        std::vector<Eigen::VectorXd> vecs;
        for (int idx : order) {
          ev.push_back(res.eigenvalues[static_cast<std::size_t>(idx)]);
          if (static_cast<std::size_t>(idx) < res.eigenvectors.size())
            vecs.push_back(std::move(res.eigenvectors[static_cast<std::size_t>(idx)]));
        }
        res.eigenvalues = std::move(ev);
        res.eigenvectors = std::move(vecs);
      } else {
        std::sort(res.eigenvalues.begin(), res.eigenvalues.end());
      }
      return res;
    }

    // thick restart: the unconverged lowest Ritz vectors seed the new basis
    std::vector<Eigen::VectorXd> restart;
    for (int i = locked_now; i < nk; ++i)
      restart.push_back(std::move(rx[static_cast<std::size_t>(i)]));
    Eigen::VectorXd continuation = restart.empty() ? random_vec() : Eigen::VectorXd(rw.back());
    V.clear();
    W.clear();
    H.resize(0, 0);
    for (auto& v : restart) {
      if (push_basis_vector(std::move(v))) ++res.matvecs;
    }
    next = std::move(continuation);
  }
  throw std::runtime_error("lowest_k: no convergence within the iteration budget");
}

struct GapCurve {
  struct Sample {
    double s = 0.0;
    std::vector<double> levels;
  };
  std::vector<Sample> samples;
  int k = 0;
  int ground_degeneracy = 1;  // classical ground degeneracy at s = 1
  double g_min = 0.0;
  double s_star = 0.0;

  // gap to the first level above the (possibly degenerate) ground manifold
  static double gap_of(const Sample& sample, int degeneracy) {
    if (static_cast<int>(sample.levels.size()) <= degeneracy)
      throw std::invalid_argument("GapCurve: need more levels than the ground degeneracy");
    return sample.levels[static_cast<std::size_t>(degeneracy)] - sample.levels[0];
  }
};

// E_0..E_{k-1} along the annealing path plus the minimum manifold-aware gap.
// After the coarse pass the neighborhood of the minimum is resampled at
// refine_factor times the grid density.
inline GapCurve gap_curve(const IsingModel& model, std::vector<double> s_grid, int k,
                          double tol = 1e-8, int refine_factor = 10, std::uint64_t seed = 1) {
  if (s_grid.empty()) throw std::invalid_argument("gap_curve: empty grid");
  if (!std::is_sorted(s_grid.begin(), s_grid.end()))
    throw std::invalid_argument("gap_curve: grid must be sorted");
  for (double s : s_grid)
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("gap_curve: s must lie in [0, 1]");

  GapCurve curve;
  curve.k = k;
  const auto spectrum = brute_force_spectrum(model);
  curve.ground_degeneracy = static_cast<int>(spectrum.front().degeneracy);
  if (curve.ground_degeneracy >= k)
    throw std::invalid_argument("gap_curve: k must exceed the classical ground degeneracy");

  auto solve_at = [&](double s) {
    GapCurve::Sample sample;
    sample.s = s;
    sample.levels = lowest_k(model, s, k, tol, seed).eigenvalues;
    return sample;
  };
  for (double s : s_grid) curve.samples.push_back(solve_at(s));

  auto locate_min = [&]() {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
      const double g = GapCurve::gap_of(curve.samples[i], curve.ground_degeneracy);
      if (g < best) {
        best = g;
        arg = i;
      }
    }
    return std::pair{arg, best};
  };

  if (refine_factor > 1 && s_grid.size() >= 3) {
    const auto [arg, best] = locate_min();
    const double lo = curve.samples[arg > 0 ? arg - 1 : 0].s;
    const double hi = curve.samples[std::min(arg + 1, curve.samples.size() - 1)].s;
    const int extra = 2 * refine_factor;
    for (int i = 1; i < extra; ++i) {
      const double s = lo + (hi - lo) * static_cast<double>(i) / extra;
      curve.samples.push_back(solve_at(s));
    }
    std::sort(curve.samples.begin(), curve.samples.end(),
              [](const auto& a, const auto& b) { return a.s < b.s; });
  }

  const auto [arg, best] = locate_min();
  curve.g_min = best;
  curve.s_star = curve.samples[arg].s;
  return curve;
}

inline void write_gap_curve_csv(const GapCurve& curve, std::ostream& os) {
  os << "s";
  for (int i = 0; i < curve.k; ++i) os << ",E" << i;
  os << ",gap\n";
  char buf[64];
  for (const auto& sample : curve.samples) {
    std::snprintf(buf, sizeof buf, "%.12g", sample.s);
    os << buf;
    for (double e : sample.levels) {
      std::snprintf(buf, sizeof buf, ",%.12g", e);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.12g\n", GapCurve::gap_of(sample, curve.ground_degeneracy));
    os << buf;
  }
}

}  // namespace sectorlab
