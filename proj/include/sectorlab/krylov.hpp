#pragma once

#include <Eigen/Dense>

#include "sectorlab/lattice.hpp"
#include "sectorlab/statevector.hpp"

namespace sectorlab {

// y = [s * diag(E) + sum_q h_q X_q] x  (the annealing Hamiltonian with the
// driver weight folded into the per-site intensities h_q)
inline void apply_annealing_hamiltonian(const EnergyTable& table, std::span<const double> h,
                                        double s, const std::vector<cplx>& x,
                                        std::vector<cplx>& y) {
  const std::size_t n = x.size();
  if (table.size() != n) throw std::invalid_argument("apply_annealing_hamiltonian: table size mismatch");
  if (y.size() != n) y.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    y[i] = s * table.values[i] * x[i];
  for (std::size_t q = 0; q < h.size(); ++q) {
    if (h[q] == 0.0) continue;
    const std::size_t bit = std::size_t{1} << q;
    const double hq = h[q];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      y[i] += hq * x[static_cast<std::size_t>(i) ^ bit];
  }
}

// exp(-i dt H) |psi> via a Lanczos subspace with full reorthogonalization.
// Serves as the reference applier that cross-validates the splitting stepper.
inline StateVector krylov_expm_apply(const EnergyTable& table, std::span<const double> intensities,
                                     double s, double dt, const StateVector& psi,
                                     double tol = 1e-11, int max_dim = 128) {
  const std::size_t n = psi.dim();
  std::vector<double> h(intensities.begin(), intensities.end());

  std::vector<std::vector<cplx>> basis;
  std::vector<double> alpha, beta;
  basis.push_back(psi.amp);
  const double norm0 = std::sqrt(deterministic_sum(n, [&](std::size_t i) { return std::norm(basis[0][i]); }));
  if (norm0 < 1e-300) throw std::invalid_argument("krylov_expm_apply: zero state");
  for (auto& v : basis[0]) v /= norm0;

  std::vector<cplx> w(n);
  auto dot = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
    const double re = deterministic_sum(n, [&](std::size_t i) {
      return a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    });
    const double im = deterministic_sum(n, [&](std::size_t i) {
      return a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    });
    return cplx{re, im};
  };

  Eigen::VectorXd approx_prev;
  int k = 0;
  for (; k < max_dim; ++k) {
    apply_annealing_hamiltonian(table, h, s, basis[k], w);
    const double a = dot(basis[k], w).real();
    alpha.push_back(a);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      w[i] -= a * basis[k][i];
      if (k > 0) w[i] -= beta[k - 1] * basis[k - 1][i];
    }
    // full reorthogonalization
    for (int j = 0; j <= k; ++j) {
      const cplx c = dot(basis[j], w);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        w[i] -= c * basis[j][i];
    }
    const double b = std::sqrt(deterministic_sum(n, [&](std::size_t i) { return std::norm(w[i]); }));

    // projected propagator on the current subspace
    const int m = k + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
    for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(m);
    for (int i = 0; i < m; ++i) {
      cplx acc = 0.0;
      for (int l = 0; l < m; ++l)
        acc += es.eigenvectors()(i, l) * std::exp(cplx{0.0, -dt * es.eigenvalues()(l)}) *
               es.eigenvectors()(0, l);
      u(i) = acc;
    }

    bool converged = false;
    if (b <= 1e-14) converged = true;  // invariant subspace
    if (!converged && k > 0) {
      // residual-style bound plus stability of the leading coefficients
      const double happy = b * std::abs(u(m - 1)) * dt;
      double drift = 0.0;
      for (int i = 0; i + 1 < m; ++i) drift = std::max(drift, std::abs(std::abs(u(i)) - approx_prev(i)));
      if (happy < tol && drift < tol) converged = true;
    }
    approx_prev.resize(m);
    for (int i = 0; i < m; ++i) approx_prev(i) = std::abs(u(i));

    if (converged || k == max_dim - 1) {
      if (!converged)
        throw std::runtime_error("krylov_expm_apply: no convergence within subspace budget");
      StateVector out(psi.n_qubits);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        cplx acc = 0.0;
        for (int j = 0; j < m; ++j) acc += u(j) * basis[j][i];
        out.amp[i] = norm0 * acc;
      }
      return out;
    }

    beta.push_back(b);
    for (auto& v : w) v /= b;
    basis.push_back(w);
  }
  throw std::runtime_error("krylov_expm_apply: unreachable");
}

}  // namespace sectorlab
