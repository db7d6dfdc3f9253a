#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <utility>

#include "sectorlab/common.hpp"

namespace sectorlab {

// Dense statevector over 2^n basis states. Bit q of the basis index is the
// state of qubit q (little-endian); bit 0 <-> |0> <-> spin up, so the Z
// eigenvalue of qubit q in basis state i is z_q = 1 - 2*((i>>q)&1).
struct StateVector {
  int n_qubits = 0;
  std::vector<cplx> amp;

  StateVector() = default;
  explicit StateVector(int n) : n_qubits(n), amp(std::size_t{1} << n, cplx{0.0, 0.0}) {
    if (n < 1 || n > 28) throw std::invalid_argument("StateVector: unsupported qubit count");
  }

  std::size_t dim() const { return amp.size(); }

  static StateVector basis_state(int n, std::uint64_t index) {
    StateVector s(n);
    s.amp.at(index) = 1.0;
    return s;
  }

  // |0...0>
  static StateVector zero_state(int n) { return basis_state(n, 0); }

  // tensor product of |+> on every qubit
  static StateVector plus_state(int n) {
    StateVector s(n);
    const double a = 1.0 / std::sqrt(static_cast<double>(s.dim()));
    for (auto& v : s.amp) v = a;
    return s;
  }

  // tensor product of |-> on every qubit
  static StateVector minus_state(int n) {
    StateVector s(n);
    const double a = 1.0 / std::sqrt(static_cast<double>(s.dim()));
    for (std::size_t i = 0; i < s.dim(); ++i)
      s.amp[i] = (std::popcount(i) & 1) ? -a : a;
    return s;
  }

  double norm_sq() const {
    return deterministic_sum(dim(), [&](std::size_t i) { return std::norm(amp[i]); });
  }
  double norm() const { return std::sqrt(norm_sq()); }

  void normalize() {
    const double n = norm();
    if (n < 1e-300) throw std::runtime_error("StateVector::normalize: vanishing norm");
    const double inv = 1.0 / n;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(dim()); ++i) amp[i] *= inv;
  }
};

inline cplx inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inner_product: size mismatch");
  const double re = deterministic_sum(a.dim(), [&](std::size_t i) {
    return a.amp[i].real() * b.amp[i].real() + a.amp[i].imag() * b.amp[i].imag();
  });
  const double im = deterministic_sum(a.dim(), [&](std::size_t i) {
    return a.amp[i].real() * b.amp[i].imag() - a.amp[i].imag() * b.amp[i].real();
  });
  return {re, im};
}

inline double distance(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("distance: size mismatch");
  return std::sqrt(deterministic_sum(a.dim(), [&](std::size_t i) { return std::norm(a.amp[i] - b.amp[i]); }));
}

// Pauli string as flip/phase bit masks: letter X sets flip, Z sets phase,
// Y sets both. At most two non-identity letters (the gate set used here).
struct PauliString {
  std::uint32_t flip = 0;   // qubits with X or Y
  std::uint32_t phase = 0;  // qubits with Z or Y

  PauliString() = default;
  PauliString(std::initializer_list<std::pair<int, char>> letters, int n_qubits) {
    int weight = 0;
    for (auto [q, c] : letters) {
      if (q < 0 || q >= n_qubits) throw std::invalid_argument("PauliString: qubit out of range");
      const std::uint32_t bit = 1u << q;
      if ((flip | phase) & bit) throw std::invalid_argument("PauliString: duplicate qubit");
      switch (c) {
        case 'X': flip |= bit; break;
        case 'Y': flip |= bit; phase |= bit; break;
        case 'Z': phase |= bit; break;
        case 'I': continue;
        default: throw std::invalid_argument("PauliString: letter must be I/X/Y/Z");
      }
      ++weight;
    }
    if (weight > 2) throw std::invalid_argument("PauliString: more than two non-identity letters");
  }

  int y_count() const { return std::popcount(flip & phase); }
};

// P|b> = lambda(b) |b ^ flip>, lambda(b) = i^{#Y} * (-1)^{popcount(b & phase)}.
// out may alias in only when they are the same vector and flip == 0.
inline void apply_pauli(const PauliString& p, const std::vector<cplx>& in, std::vector<cplx>& out) {
  const std::size_t n = in.size();
  if (out.size() != n) out.resize(n);
  cplx ipow{1.0, 0.0};
  switch (p.y_count() & 3) {
    case 1: ipow = {0.0, 1.0}; break;
    case 2: ipow = {-1.0, 0.0}; break;
    case 3: ipow = {0.0, -1.0}; break;
    default: break;
  }
  const std::uint32_t flip = p.flip, phase = p.phase;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
    const std::size_t b = static_cast<std::size_t>(j) ^ flip;
    const cplx lam = (std::popcount(b & phase) & 1) ? -ipow : ipow;
    out[j] = lam * in[b];
  }
}

namespace detail {

// exp(-i * angle * P / 2) on a raw amplitude array
inline void pauli_rotation_kernel(cplx* amp, std::size_t n, const PauliString& p, double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  const std::uint32_t flip = p.flip, phase = p.phase;
  if (flip == 0) {
    // pure Z string: diagonal phases exp(-i*angle*(+/-1)/2)
    const cplx ep{c, -s}, em{c, s};
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      amp[i] *= (std::popcount(static_cast<std::size_t>(i) & phase) & 1) ? em : ep;
    return;
  }
  // lambda(b) = i^{#Y} (-1)^{popcount(b & phase)}; the (-i s) prefactor is folded in.
  cplx mis{0.0, -s};  // -i*s
  switch (p.y_count() & 3) {
    case 1: mis *= cplx{0.0, 1.0}; break;
    case 2: mis *= -1.0; break;
    case 3: mis *= cplx{0.0, -1.0}; break;
    default: break;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
    const std::size_t lo = static_cast<std::size_t>(j);
    const std::size_t hi = lo ^ flip;
    if (hi < lo) continue;
    const cplx a = amp[lo], b = amp[hi];
    const cplx f_hi = (std::popcount(hi & phase) & 1) ? -mis : mis;  // factor for amp from hi
    const cplx f_lo = (std::popcount(lo & phase) & 1) ? -mis : mis;
    amp[lo] = c * a + f_hi * b;
    amp[hi] = c * b + f_lo * a;
  }
}

inline void hadamard_kernel(cplx* amp, std::size_t n, int q) {
  const std::size_t bit = std::size_t{1} << q;
  const std::size_t low_mask = bit - 1;
  const double r = 1.0 / std::sqrt(2.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n / 2); ++j) {
    const std::size_t u = static_cast<std::size_t>(j);
    const std::size_t lo = ((u & ~low_mask) << 1) | (u & low_mask);
    const std::size_t hi = lo | bit;
    const cplx a = amp[lo], b = amp[hi];
    amp[lo] = r * (a + b);
    amp[hi] = r * (a - b);
  }
}

// out = (-i/2) P in   (the tangent-state generator insertion)
inline void generator_kernel(const PauliString& p, const cplx* in, cplx* out, std::size_t n) {
  cplx pref{0.0, -0.5};  // -i/2
  switch (p.y_count() & 3) {
    case 1: pref *= cplx{0.0, 1.0}; break;
    case 2: pref *= -1.0; break;
    case 3: pref *= cplx{0.0, -1.0}; break;
    default: break;
  }
  const std::uint32_t flip = p.flip, phase = p.phase;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
    const std::size_t b = static_cast<std::size_t>(j) ^ flip;
    out[j] = (std::popcount(b & phase) & 1) ? -pref * in[b] : pref * in[b];
  }
}

}  // namespace detail

// exp(-i * angle * P / 2). Identity at angle 0, unitary for any angle.
inline void apply_pauli_rotation(StateVector& psi, const PauliString& p, double angle) {
  detail::pauli_rotation_kernel(psi.amp.data(), psi.dim(), p, angle);
}

inline void apply_hadamard(StateVector& psi, int q) {
  if (q < 0 || q >= psi.n_qubits) throw std::invalid_argument("apply_hadamard: qubit out of range");
  detail::hadamard_kernel(psi.amp.data(), psi.dim(), q);
}

// amp[i] *= exp(c * E_i); no normalization. c = -i*dt gives real-time phase
// evolution under a diagonal Hamiltonian, real negative c imaginary-time decay.
inline void apply_diagonal_phase(StateVector& psi, std::span<const double> energy, cplx c) {
  if (energy.size() != psi.dim())
    throw std::invalid_argument("apply_diagonal_phase: table length mismatch");
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(psi.dim()); ++i)
    psi.amp[i] *= std::exp(c * energy[i]);
}

inline void check_normalized(const StateVector& psi, double tol = 1e-8) {
  if (std::abs(psi.norm() - 1.0) > tol)
    throw std::invalid_argument("state is not normalized");
}

// <psi| diag(E) |psi> for a normalized state.
inline double expectation_diagonal(const StateVector& psi, std::span<const double> energy) {
  if (energy.size() != psi.dim())
    throw std::invalid_argument("expectation_diagonal: table length mismatch");
  check_normalized(psi);
  return deterministic_sum(psi.dim(), [&](std::size_t i) { return std::norm(psi.amp[i]) * energy[i]; });
}

// sum_q h_q <X_q> for a normalized state.
inline double expectation_transverse(const StateVector& psi, std::span<const double> intensities) {
  if (intensities.size() != static_cast<std::size_t>(psi.n_qubits))
    throw std::invalid_argument("expectation_transverse: one intensity per site required");
  check_normalized(psi);
  double total = 0.0;
  for (int q = 0; q < psi.n_qubits; ++q) {
    if (intensities[q] == 0.0) continue;
    const std::uint32_t bit = 1u << q;
    const double x = deterministic_sum(psi.dim(), [&](std::size_t i) {
      if (i & bit) return 0.0;
      const cplx a = psi.amp[i], b = psi.amp[i | bit];
      return 2.0 * (a.real() * b.real() + a.imag() * b.imag());
    });
    total += intensities[q] * x;
  }
  return total;
}

}  // namespace sectorlab
