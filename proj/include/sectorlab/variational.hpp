#pragma once

#include <random>

#include "sectorlab/circuit.hpp"
#include "sectorlab/lattice.hpp"
#include "sectorlab/sectors.hpp"
#include "sectorlab/trajectory.hpp"

namespace sectorlab {

// V(theta) = V2(alpha, beta) V1(omega) acting on |0bar> = H^n |0>.
// V1: per qubit q, Rz(omega_{q,0}) Rx(omega_{q,1}) Rz(omega_{q,2}) in
// application order. V2: per bond (j,k) in the model's bond-list order,
// exp(-i alpha Z_j Y_k / 2) then exp(-i beta Y_j Z_k / 2).
// Parameter layout: [3 per qubit | 2 per bond] -> p = 3 n + 2 n_bonds.
struct Ansatz {
  Circuit circuit;
  std::vector<Bond> bond_order;
  int n_qubits = 0;

  int n_params() const { return circuit.n_params; }
};

inline Ansatz build_ansatz(const IsingModel& model) {
  Ansatz a;
  a.n_qubits = model.n_sites;
  a.bond_order = model.bonds;
  a.circuit = Circuit(model.n_sites);
  for (int q = 0; q < model.n_sites; ++q) a.circuit.add_hadamard(q);
  for (int q = 0; q < model.n_sites; ++q) {
    a.circuit.add_rotation(PauliString({{q, 'Z'}}, model.n_sites), 3 * q);
    a.circuit.add_rotation(PauliString({{q, 'X'}}, model.n_sites), 3 * q + 1);
    a.circuit.add_rotation(PauliString({{q, 'Z'}}, model.n_sites), 3 * q + 2);
  }
  const int base = 3 * model.n_sites;
  for (std::size_t b = 0; b < a.bond_order.size(); ++b) {
    const Bond& bond = a.bond_order[b];
    a.circuit.add_rotation(PauliString({{bond.j, 'Z'}, {bond.k, 'Y'}}, model.n_sites),
                           base + 2 * static_cast<int>(b));
    a.circuit.add_rotation(PauliString({{bond.j, 'Y'}, {bond.k, 'Z'}}, model.n_sites),
                           base + 2 * static_cast<int>(b) + 1);
  }
  a.circuit.validate();
  return a;
}

// independent Gaussian draws, mean 0, sigma 0.05 unless overridden
inline std::vector<double> gaussian_init(int p, std::uint64_t seed, double sigma = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> theta(static_cast<std::size_t>(p));
  for (auto& v : theta) v = dist(rng);
  return theta;
}

// A_jk = Re( <d_j phi | d_k phi> ), the Gram matrix of the tangent states.
inline Eigen::MatrixXd assemble_A(const TangentBank& bank) {
  const int p = static_cast<int>(bank.tangents.cols());
  Eigen::MatrixXd A(p, p);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(p) * (p + 1) / 2);
  for (int j = 0; j < p; ++j)
    for (int k = j; k < p; ++k) pairs.emplace_back(j, k);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs.size()); ++i) {
    const auto [j, k] = pairs[static_cast<std::size_t>(i)];
    const double v = bank.tangents.col(j).dot(bank.tangents.col(k)).real();
    A(j, k) = v;
    A(k, j) = v;
  }
  return A;
}

inline Eigen::MatrixXd assemble_A(const Ansatz& a, std::span<const double> theta) {
  return assemble_A(tangent_bank(a.circuit, theta, StateVector::zero_state(a.n_qubits)));
}

// C_j = -Re( <d_j phi | H | phi> ) with diagonal H
inline Eigen::VectorXd assemble_C(const TangentBank& bank, std::span<const double> energy) {
  const std::size_t dim = bank.state.dim();
  if (energy.size() != dim) throw std::invalid_argument("assemble_C: table size mismatch");
  Eigen::VectorXcd b(static_cast<Eigen::Index>(dim));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(dim); ++i)
    b(i) = energy[i] * bank.state.amp[i];
  const int p = static_cast<int>(bank.tangents.cols());
  Eigen::VectorXd C(p);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < p; ++j) C(j) = -bank.tangents.col(j).dot(b).real();
  return C;
}

inline Eigen::VectorXd assemble_C(const Ansatz& a, std::span<const double> theta,
                                  const EnergyTable& table) {
  return assemble_C(tangent_bank(a.circuit, theta, StateVector::zero_state(a.n_qubits)),
                    table.span());
}

enum class VqiteMode { full, diagonal };

struct VqiteConfig {
  double delta_t = 0.1;      // 0.1 suffices for full mode; diagonal needs 0.05
  double epsilon = 1e-4;     // added to every diagonal entry of A
  double total_t = 40.0;
  VqiteMode mode = VqiteMode::full;
  long record_every = 1;
  bool stop_on_convergence = false;
  double convergence_tol = 5e-2;   // |E - E0| threshold ...
  int convergence_records = 10;    // ... sustained for this many records
  long snapshot_every = 0;         // parameter snapshots, 0 = off
  std::string snapshot_path;

  static VqiteConfig diagonal_defaults() {
    VqiteConfig c;
    c.delta_t = 0.05;
    c.mode = VqiteMode::diagonal;
    return c;
  }
};

// theta' = theta + thetadot * dt where (A + eps I) thetadot = C (full) or
// thetadot_j = C_j / (A_jj + eps) (diagonal).
inline std::vector<double> vqite_step(std::span<const double> theta, const Eigen::MatrixXd& A,
                                      const Eigen::VectorXd& C, const VqiteConfig& cfg,
                                      double dt_override = -1.0) {
  const int p = static_cast<int>(theta.size());
  if (A.rows() != p || A.cols() != p || C.size() != p)
    throw std::invalid_argument("vqite_step: dimension mismatch");
  const double dt = dt_override > 0 ? dt_override : cfg.delta_t;
  Eigen::VectorXd thetadot(p);
  if (cfg.mode == VqiteMode::full) {
    Eigen::MatrixXd M = A;
    M.diagonal().array() += cfg.epsilon;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("vqite_step: regularized linear solve failed");
    thetadot = ldlt.solve(C);
    if (!thetadot.allFinite())
      throw std::runtime_error("vqite_step: linear solve produced non-finite update");
  } else {
    for (int j = 0; j < p; ++j) thetadot(j) = C(j) / (A(j, j) + cfg.epsilon);
  }
  std::vector<double> out(theta.begin(), theta.end());
  for (int j = 0; j < p; ++j) out[static_cast<std::size_t>(j)] += thetadot(j) * dt;
  return out;
}

namespace detail {

inline void dump_snapshot(std::ofstream& os, long step, std::span<const double> theta) {
  // record layout: uint64 step, then p doubles (p fixed by the file header)
  const std::uint64_t s = static_cast<std::uint64_t>(step);
  os.write(reinterpret_cast<const char*>(&s), 8);
  os.write(reinterpret_cast<const char*>(theta.data()),
           static_cast<std::streamsize>(theta.size() * sizeof(double)));
}

inline std::ofstream open_snapshot(const std::string& path, int p) {
  // header: 8 bytes magic "SLABPRM1", uint64 parameter count
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("snapshot: cannot open " + path);
  os.write("SLABPRM1", 8);
  const std::uint64_t pp = static_cast<std::uint64_t>(p);
  os.write(reinterpret_cast<const char*>(&pp), 8);
  return os;
}

}  // namespace detail

struct VqiteResult {
  VariationalTrajectory traj;
  std::vector<double> theta;
  StateVector final_state;
  bool converged = false;
  double first_convergence_t = -1.0;
  long fallback_events = 0;       // energy-raise retries with dt/2
  double min_A_eigenvalue = 0.0;  // smallest eigenvalue of A seen at records (full mode)
  double final_energy = 0.0;
  double reference_e0 = 0.0;
};

// McLachlan imaginary-time flow of the ansatz parameters. Full mode assembles
// the complete A; diagonal mode uses A_jj, which for this ansatz family is
// exactly 1/4 (each parameter appears in a single exp(-i theta P/2) with P a
// Pauli string), and obtains C from the energy gradient, C = -grad E / 2.
inline VqiteResult vqite_run(const IsingModel& model, const Ansatz& ansatz, const VqiteConfig& cfg,
                             std::uint64_t seed) {
  const EnergyTable table = energy_table(model);
  const double e0 = table.min_value();
  const long n_steps = std::lround(std::ceil(cfg.total_t / cfg.delta_t - 1e-12));
  const StateVector input = StateVector::zero_state(ansatz.n_qubits);

  VqiteResult res;
  res.reference_e0 = e0;
  res.traj.mode = (cfg.mode == VqiteMode::full) ? "full" : "diagonal";
  res.theta = gaussian_init(ansatz.n_params(), seed_stream(seed, "vqite-init"));
  res.min_A_eigenvalue = std::numeric_limits<double>::infinity();

  std::ofstream snap;
  if (cfg.snapshot_every > 0) snap = detail::open_snapshot(cfg.snapshot_path, ansatz.n_params());

  int consecutive_ok = 0;
  double energy = 0.0;
  for (long k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * cfg.delta_t;
    double update_norm = 0.0;
    std::vector<double> theta_next;
    if (cfg.mode == VqiteMode::full) {
      const TangentBank bank = tangent_bank(ansatz.circuit, res.theta, input);
      energy = expectation_diagonal(bank.state, table.span());
      const Eigen::MatrixXd A = assemble_A(bank);
      const Eigen::VectorXd C = assemble_C(bank, table.span());
      if (k % cfg.record_every == 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
        res.min_A_eigenvalue = std::min(res.min_A_eigenvalue, es.eigenvalues().minCoeff());
      }
      if (k < n_steps) {
        theta_next = vqite_step(res.theta, A, C, cfg);
        // descent guard: retry once with dt/2 if the energy rose measurably
        StateVector trial = run_circuit(ansatz.circuit, theta_next, input);
        const double e_next = expectation_diagonal(trial, table.span());
        if (e_next > energy + 1e-6) {
          theta_next = vqite_step(res.theta, A, C, cfg, cfg.delta_t / 2);
          ++res.fallback_events;
        }
        Eigen::Map<const Eigen::VectorXd> a(res.theta.data(), res.theta.size());
        Eigen::Map<const Eigen::VectorXd> b(theta_next.data(), theta_next.size());
        update_norm = (b - a).norm() / cfg.delta_t;
      }
    } else {
      std::vector<double> grad;
      energy = energy_and_gradient(ansatz.circuit, res.theta, input, table.span(), grad);
      if (k < n_steps) {
        const double a_jj = 0.25;
        theta_next = res.theta;
        double nrm = 0.0;
        for (std::size_t j = 0; j < grad.size(); ++j) {
          const double thetadot = (-0.5 * grad[j]) / (a_jj + cfg.epsilon);
          theta_next[j] += thetadot * cfg.delta_t;
          nrm += thetadot * thetadot;
        }
        update_norm = std::sqrt(nrm);
      }
    }

    if (k % cfg.record_every == 0 || k == n_steps) {
      res.traj.records.push_back({k, t, energy, update_norm});
      if (std::abs(energy - e0) < cfg.convergence_tol) {
        ++consecutive_ok;
        if (consecutive_ok == 1 && res.first_convergence_t < 0) res.first_convergence_t = t;
        if (consecutive_ok >= cfg.convergence_records) {
          res.converged = true;
          if (cfg.stop_on_convergence) {
            res.final_energy = energy;
            res.final_state = run_circuit(ansatz.circuit, res.theta, input);
            if (snap.is_open()) detail::dump_snapshot(snap, k, res.theta);
            return res;
          }
        }
      } else {
        consecutive_ok = 0;
        if (!res.converged) res.first_convergence_t = -1.0;
      }
    }
    if (snap.is_open() && cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0)
      detail::dump_snapshot(snap, k, res.theta);
    if (k < n_steps) res.theta = std::move(theta_next);
  }
  res.final_energy = energy;
  res.final_state = run_circuit(ansatz.circuit, res.theta, input);
  return res;
}

struct VqeConfig {
  double eta = 0.02;  // 0.02 for tri, 0.05 for sq
  long max_iters = 5000;
  long record_every = 1;
  bool stop_on_convergence = false;
  double convergence_tol = 5e-2;
  int convergence_records = 10;
  double plateau_grad_tol = 1e-5;  // stop early once the gradient stalls

  void validate() const {
    if (!(eta > 0)) throw std::invalid_argument("VqeConfig: eta must be positive");
  }
};

struct VqeResult {
  VariationalTrajectory traj;
  std::vector<double> theta;
  StateVector final_state;
  bool converged = false;
  bool plateaued = false;
  long iterations = 0;
  double final_energy = 0.0;
  double final_grad_norm = 0.0;
  double reference_e0 = 0.0;
};

// Gradient descent on <phi(theta)|H|phi(theta)> with the exact gradient;
// stochasticity enters only through the Gaussian initialization.
inline VqeResult vqe_run(const IsingModel& model, const Ansatz& ansatz, const VqeConfig& cfg,
                         std::uint64_t seed) {
  cfg.validate();
  const EnergyTable table = energy_table(model);
  const double e0 = table.min_value();
  const StateVector input = StateVector::zero_state(ansatz.n_qubits);

  VqeResult res;
  res.reference_e0 = e0;
  res.traj.mode = "vqe";
  res.theta = gaussian_init(ansatz.n_params(), seed_stream(seed, "vqe-init"));

  int consecutive_ok = 0;
  std::vector<double> grad;
  for (long it = 0; it <= cfg.max_iters; ++it) {
    const double energy = energy_and_gradient(ansatz.circuit, res.theta, input, table.span(), grad);
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    res.iterations = it;
    res.final_energy = energy;
    res.final_grad_norm = gnorm;
    if (it % cfg.record_every == 0 || it == cfg.max_iters)
      res.traj.records.push_back({it, static_cast<double>(it), energy, gnorm});

    if (std::abs(energy - e0) < cfg.convergence_tol) {
      ++consecutive_ok;
      if (consecutive_ok >= cfg.convergence_records) {
        res.converged = true;
        if (cfg.stop_on_convergence) break;
      }
    } else {
      consecutive_ok = 0;
    }
    if (gnorm < cfg.plateau_grad_tol) {
      res.plateaued = true;
      break;
    }
    if (it == cfg.max_iters) break;
    for (std::size_t j = 0; j < grad.size(); ++j) res.theta[j] -= cfg.eta * grad[j];
  }
  res.final_state = run_circuit(ansatz.circuit, res.theta, input);
  return res;
}

}  // namespace sectorlab
