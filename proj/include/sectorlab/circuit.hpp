#pragma once

#include <Eigen/Dense>

#include "sectorlab/statevector.hpp"

namespace sectorlab {

// Gate list over a fixed qubit register: fixed Hadamards plus Pauli-string
// rotations bound to parameter slots.
struct Gate {
  enum class Kind { hadamard, rotation };
  Kind kind = Kind::hadamard;
  int qubit = -1;        // hadamard target
  PauliString generator; // rotation generator, gate = exp(-i theta P / 2)
  int slot = -1;         // parameter slot for rotations
};

struct Circuit {
  int n_qubits = 0;
  int n_params = 0;
  std::vector<Gate> gates;

  explicit Circuit(int n = 0) : n_qubits(n) {}

  void add_hadamard(int q) {
    if (q < 0 || q >= n_qubits) throw std::invalid_argument("Circuit: hadamard qubit out of range");
    gates.push_back({Gate::Kind::hadamard, q, {}, -1});
  }

  void add_rotation(const PauliString& generator, int slot) {
    if (slot < 0) throw std::invalid_argument("Circuit: negative parameter slot");
    gates.push_back({Gate::Kind::rotation, -1, generator, slot});
    n_params = std::max(n_params, slot + 1);
  }

  // every slot in [0, n_params) bound by exactly one gate
  void validate() const {
    std::vector<int> uses(static_cast<std::size_t>(n_params), 0);
    for (const Gate& g : gates)
      if (g.kind == Gate::Kind::rotation) ++uses.at(static_cast<std::size_t>(g.slot));
    for (int k = 0; k < n_params; ++k)
      if (uses[static_cast<std::size_t>(k)] != 1)
        throw std::logic_error("Circuit: parameter slot " + std::to_string(k) +
                               " bound " + std::to_string(uses[k]) + " times");
  }
};

inline void apply_circuit(const Circuit& c, std::span<const double> theta, StateVector& psi) {
  if (theta.size() != static_cast<std::size_t>(c.n_params))
    throw std::invalid_argument("apply_circuit: parameter count mismatch");
  if (psi.n_qubits != c.n_qubits) throw std::invalid_argument("apply_circuit: qubit count mismatch");
  for (const Gate& g : c.gates) {
    if (g.kind == Gate::Kind::hadamard)
      detail::hadamard_kernel(psi.amp.data(), psi.dim(), g.qubit);
    else
      detail::pauli_rotation_kernel(psi.amp.data(), psi.dim(), g.generator, theta[g.slot]);
  }
}

inline StateVector run_circuit(const Circuit& c, std::span<const double> theta, const StateVector& in) {
  StateVector psi = in;
  apply_circuit(c, theta, psi);
  return psi;
}

// Output state plus all exact parameter derivatives, computed in one forward
// sweep: when gate k fires, the column for its slot is seeded with
// (-i/2) P_k |v_k> and every later gate is applied to all live columns.
struct TangentBank {
  StateVector state;
  Eigen::MatrixXcd tangents;  // dim x n_params, column k = d|phi>/d theta_k
};

inline TangentBank tangent_bank(const Circuit& c, std::span<const double> theta, const StateVector& in) {
  if (theta.size() != static_cast<std::size_t>(c.n_params))
    throw std::invalid_argument("tangent_bank: parameter count mismatch");
  c.validate();
  TangentBank bank;
  bank.state = in;
  const std::size_t dim = in.dim();
  bank.tangents.resize(static_cast<Eigen::Index>(dim), c.n_params);
  std::vector<int> live;
  live.reserve(static_cast<std::size_t>(c.n_params));
  for (const Gate& g : c.gates) {
    if (g.kind == Gate::Kind::hadamard) {
      detail::hadamard_kernel(bank.state.amp.data(), dim, g.qubit);
      for (int k : live) detail::hadamard_kernel(bank.tangents.col(k).data(), dim, g.qubit);
    } else {
      detail::pauli_rotation_kernel(bank.state.amp.data(), dim, g.generator, theta[g.slot]);
      for (int k : live)
        detail::pauli_rotation_kernel(bank.tangents.col(k).data(), dim, g.generator, theta[g.slot]);
      detail::generator_kernel(g.generator, bank.state.amp.data(), bank.tangents.col(g.slot).data(), dim);
      live.push_back(g.slot);
    }
  }
  return bank;
}

// spec-facing view: one 2^n complex array per parameter
inline std::vector<std::vector<cplx>> tangent_states(const Circuit& c, std::span<const double> theta,
                                                     const StateVector& in) {
  TangentBank bank = tangent_bank(c, theta, in);
  std::vector<std::vector<cplx>> out(static_cast<std::size_t>(c.n_params));
  for (int k = 0; k < c.n_params; ++k) {
    out[static_cast<std::size_t>(k)].assign(bank.tangents.col(k).data(),
                                            bank.tangents.col(k).data() + in.dim());
  }
  return out;
}

// E = <phi|diag(E)|phi> and its exact gradient via one reverse sweep.
inline double energy_and_gradient(const Circuit& c, std::span<const double> theta,
                                  const StateVector& in, std::span<const double> energy,
                                  std::vector<double>& grad) {
  StateVector psi = run_circuit(c, theta, in);
  const std::size_t dim = psi.dim();
  if (energy.size() != dim) throw std::invalid_argument("energy_and_gradient: table size mismatch");
  std::vector<cplx> b(dim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(dim); ++i)
    b[i] = energy[i] * psi.amp[i];
  const double e = deterministic_sum(dim, [&](std::size_t i) {
    return psi.amp[i].real() * b[i].real() + psi.amp[i].imag() * b[i].imag();
  });

  grad.assign(static_cast<std::size_t>(c.n_params), 0.0);
  std::vector<cplx> scratch(dim);
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    const Gate& g = *it;
    if (g.kind == Gate::Kind::rotation) {
      // d<H>/d theta_k = 2 Re <W_k^dag H phi | G_k v_k> with G_k = (-i/2) P_k
      detail::generator_kernel(g.generator, psi.amp.data(), scratch.data(), dim);
      grad[g.slot] = 2.0 * deterministic_sum(dim, [&](std::size_t i) {
        return b[i].real() * scratch[i].real() + b[i].imag() * scratch[i].imag();
      });
      detail::pauli_rotation_kernel(psi.amp.data(), dim, g.generator, -theta[g.slot]);
      detail::pauli_rotation_kernel(b.data(), dim, g.generator, -theta[g.slot]);
    } else {
      detail::hadamard_kernel(psi.amp.data(), dim, g.qubit);
      detail::hadamard_kernel(b.data(), dim, g.qubit);
    }
  }
  return e;
}

}  // namespace sectorlab
