#pragma once

#include "sectorlab/anneal.hpp"
#include "sectorlab/lattice.hpp"
#include "sectorlab/statevector.hpp"
#include "sectorlab/trajectory.hpp"

namespace sectorlab {

struct QiteConfig {
  double delta_tau = 0.1;
  double total_tau = 40.0;
  long record_every = 1;

  void validate() const {
    if (!(delta_tau > 0.0)) throw std::invalid_argument("QiteConfig: delta_tau must be positive");
    if (!(total_tau >= delta_tau))
      throw std::invalid_argument("QiteConfig: total_tau must be at least delta_tau");
  }
};

struct QiteResult {
  Trajectory traj;
  StateVector final_state;
};

// Exact normalized imaginary-time propagation from |Psi+> for a diagonal
// problem Hamiltonian: per step the amplitudes pick up exp(-(E_i - E_min) dtau)
// and the state is renormalized. The uniform E_min shift keeps exponents in
// range without changing the normalized state.
inline QiteResult qite_run(const IsingModel& model, const QiteConfig& cfg) {
  cfg.validate();
  const EnergyTable table = energy_table(model);
  const long n_steps = std::lround(std::ceil(cfg.total_tau / cfg.delta_tau - 1e-12));
  StateVector psi = StateVector::plus_state(model.n_sites);
  detail::RunRecorder rec(model, table);
  const std::vector<double> h0(static_cast<std::size_t>(model.n_sites), 0.0);
  rec.record(psi, 0, 0.0, 1.0, h0);
  const double shift = table.min_value();
  for (long k = 1; k <= n_steps; ++k) {
    detail::apply_level_phase(psi, table, cplx{-cfg.delta_tau, 0.0});
    // amp[i] now carries exp(-E_i dtau); fold in exp(E_min dtau) so the net
    // per-step factor is exp(-(E_i - E_min) dtau) <= 1
    const double rescale = std::exp(shift * cfg.delta_tau);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(psi.dim()); ++i)
      psi.amp[i] *= rescale;
    psi.normalize();
    if (k % cfg.record_every == 0 || k == n_steps)
      rec.record(psi, k, static_cast<double>(k) * cfg.delta_tau, 1.0, h0);
  }
  return {std::move(rec.traj), std::move(psi)};
}

}  // namespace sectorlab
