#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "sectorlab/variational.hpp"

using namespace sectorlab;

namespace {

// central finite difference of the output state
std::vector<std::vector<cplx>> fd_tangents(const Circuit& c, std::span<const double> theta,
                                           const StateVector& in, double delta = 1e-5) {
  std::vector<std::vector<cplx>> out;
  std::vector<double> th(theta.begin(), theta.end());
  for (std::size_t k = 0; k < th.size(); ++k) {
    th[k] = theta[k] + delta;
    const StateVector plus = run_circuit(c, th, in);
    th[k] = theta[k] - delta;
    const StateVector minus = run_circuit(c, th, in);
    th[k] = theta[k];
    std::vector<cplx> d(in.dim());
    for (std::size_t i = 0; i < in.dim(); ++i) d[i] = (plus.amp[i] - minus.amp[i]) / (2 * delta);
    out.push_back(std::move(d));
  }
  return out;
}

double fd_energy_derivative(const Circuit& c, std::span<const double> theta, const StateVector& in,
                            std::span<const double> table, std::size_t k, double delta = 1e-5) {
  std::vector<double> th(theta.begin(), theta.end());
  th[k] = theta[k] + delta;
  const double ep = expectation_diagonal(run_circuit(c, th, in), table);
  th[k] = theta[k] - delta;
  const double em = expectation_diagonal(run_circuit(c, th, in), table);
  return (ep - em) / (2 * delta);
}

}  // namespace

TEST_CASE("ansatz structure matches the parameter counting") {
  const IsingModel tri = build_model(ModelKind::tri, 4, 4);
  const Ansatz a = build_ansatz(tri);
  REQUIRE(a.n_params() == 144);  // 3*16 + 2*48
  const IsingModel sq = build_model(ModelKind::sq, 4, 4);
  const Ansatz b = build_ansatz(sq);
  REQUIRE(b.n_params() == 112);  // 3*16 + 2*32
  REQUIRE_NOTHROW(a.circuit.validate());
  REQUIRE_NOTHROW(b.circuit.validate());
  // each qubit: Rz, Rx, Rz in application order; each bond: ZY then YZ
  REQUIRE(a.circuit.gates[16].generator.flip == 0u);        // Rz on qubit 0
  REQUIRE(a.circuit.gates[17].generator.flip == 1u);        // Rx on qubit 0
  REQUIRE(a.circuit.gates[17].generator.phase == 0u);
  REQUIRE(a.circuit.gates[18].generator.flip == 0u);        // Rz on qubit 0
  const Gate& zy = a.circuit.gates[16 + 48];
  REQUIRE(zy.slot == 48);
  REQUIRE((zy.generator.phase & zy.generator.flip) != 0u);  // has a Y
}

TEST_CASE("circuit validation catches unbound and duplicated slots") {
  Circuit c(2);
  c.add_rotation(PauliString({{0, 'X'}}, 2), 0);
  c.add_rotation(PauliString({{1, 'X'}}, 2), 2);  // slot 1 never bound
  REQUIRE_THROWS_AS(c.validate(), std::logic_error);
  Circuit d(2);
  d.add_rotation(PauliString({{0, 'X'}}, 2), 0);
  d.add_rotation(PauliString({{1, 'X'}}, 2), 0);  // slot 0 bound twice
  REQUIRE_THROWS_AS(d.validate(), std::logic_error);
}

TEST_CASE("single-gate tangent at theta = 0") {
  Circuit c(1);
  c.add_rotation(PauliString({{0, 'X'}}, 1), 0);
  const std::vector<double> theta{0.0};
  const auto tangents = tangent_states(c, theta, StateVector::zero_state(1));
  REQUIRE(tangents.size() == 1);
  REQUIRE(std::abs(tangents[0][0]) < 1e-15);
  REQUIRE(std::abs(tangents[0][1] - cplx{0.0, -0.5}) < 1e-15);  // (-i/2)|1>
}

TEST_CASE("tangent norms are bounded by 1/2") {
  const IsingModel m = build_model(ModelKind::tri, 2, 2);
  const Ansatz a = build_ansatz(m);
  const auto theta = gaussian_init(a.n_params(), 7);
  const TangentBank bank = tangent_bank(a.circuit, theta, StateVector::zero_state(4));
  for (int k = 0; k < a.n_params(); ++k) {
    const double n = bank.tangents.col(k).norm();
    REQUIRE(n <= 0.5 + 1e-12);
    REQUIRE(n == Catch::Approx(0.5).margin(1e-12));  // exactly 1/2 for single-use parameters
  }
}

TEST_CASE("tangents match central finite differences") {
  const IsingModel m = build_model(ModelKind::tri, 2, 2);
  const Ansatz a = build_ansatz(m);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto theta = gaussian_init(a.n_params(), seed);
    const StateVector in = StateVector::zero_state(4);
    const auto exact = tangent_states(a.circuit, theta, in);
    const auto fd = fd_tangents(a.circuit, theta, in);
    double max_dev = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k)
      for (std::size_t i = 0; i < exact[k].size(); ++i)
        max_dev = std::max(max_dev, std::abs(exact[k][i] - fd[k][i]));
    REQUIRE(max_dev < 1e-7);
  }
}

TEST_CASE("A is 1/4 for the one-parameter ansatz") {
  Circuit c(1);
  c.add_hadamard(0);
  c.add_rotation(PauliString({{0, 'X'}}, 1), 0);
  Ansatz a;
  a.circuit = c;
  a.n_qubits = 1;
  const std::vector<double> theta{0.0};
  const Eigen::MatrixXd A = assemble_A(a, theta);
  REQUIRE(A.rows() == 1);
  REQUIRE(A(0, 0) == Catch::Approx(0.25).margin(1e-14));
}

TEST_CASE("A is symmetric PSD with diagonal 1/4 and matches FD tangents") {
  const IsingModel m = build_model(ModelKind::sq, 2, 2);
  const Ansatz a = build_ansatz(m);
  const auto theta = gaussian_init(a.n_params(), 12);
  const StateVector in = StateVector::zero_state(4);
  const TangentBank bank = tangent_bank(a.circuit, theta, in);
  const Eigen::MatrixXd A = assemble_A(bank);
  REQUIRE((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  REQUIRE(es.eigenvalues().minCoeff() > -1e-12);
  for (int j = 0; j < A.rows(); ++j) {
    REQUIRE(A(j, j) >= -1e-14);
    REQUIRE(A(j, j) <= 0.25 + 1e-12);
  }
  const auto fd = fd_tangents(a.circuit, theta, in);
  for (int j = 0; j < A.rows(); ++j)
    for (int k = 0; k < A.cols(); ++k) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < in.dim(); ++i)
        acc += std::conj(fd[static_cast<std::size_t>(j)][i]) * fd[static_cast<std::size_t>(k)][i];
      REQUIRE(A(j, k) == Catch::Approx(acc.real()).margin(1e-6));
    }
}

TEST_CASE("C obeys the gradient identity and the uniform-energy special case") {
  const IsingModel m = build_model(ModelKind::tri, 2, 2);
  const Ansatz a = build_ansatz(m);
  const EnergyTable t = energy_table(m);
  const auto theta = gaussian_init(a.n_params(), 21);
  const StateVector in = StateVector::zero_state(4);
  const TangentBank bank = tangent_bank(a.circuit, theta, in);
  const Eigen::VectorXd C = assemble_C(bank, t.span());

  SECTION("d<H>/dtheta_j = -2 C_j + 2 Re<d_j phi|phi> <H>") {
    const double energy = expectation_diagonal(bank.state, t.span());
    for (std::size_t j = 0; j < 8; ++j) {  // spot-check a subset
      cplx overlap = 0.0;
      for (std::size_t i = 0; i < in.dim(); ++i)
        overlap += std::conj(bank.tangents.col(static_cast<int>(j))(static_cast<Eigen::Index>(i))) *
                   bank.state.amp[i];
      const double identity = -2.0 * C(static_cast<int>(j)) + 2.0 * overlap.real() * energy;
      REQUIRE(fd_energy_derivative(a.circuit, theta, in, t.span(), j) ==
              Catch::Approx(identity).margin(1e-8));
      // unitary circuits keep the norm stationary
      REQUIRE(overlap.real() == Catch::Approx(0.0).margin(1e-12));
    }
  }
  SECTION("uniform table gives C = 0") {
    std::vector<double> uniform(t.size(), 1.7);
    const Eigen::VectorXd Cu = assemble_C(bank, uniform);
    REQUIRE(Cu.cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("adjoint gradient equals -2C and the FD gradient") {
    std::vector<double> grad;
    energy_and_gradient(a.circuit, theta, in, t.span(), grad);
    for (int j = 0; j < C.size(); ++j)
      REQUIRE(grad[static_cast<std::size_t>(j)] == Catch::Approx(-2.0 * C(j)).margin(1e-11));
    for (std::size_t j = 0; j < 6; ++j)
      REQUIRE(grad[j] ==
              Catch::Approx(fd_energy_derivative(a.circuit, theta, in, t.span(), j)).margin(1e-6));
  }
}

TEST_CASE("vqite_step fixed points and mode agreement") {
  SECTION("C = 0 leaves theta unchanged") {
    VqiteConfig cfg;
    const std::vector<double> theta{0.3, -0.2};
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2) * 0.25;
    Eigen::VectorXd C = Eigen::VectorXd::Zero(2);
    const auto next = vqite_step(theta, A, C, cfg);
    REQUIRE(next == theta);
  }
  SECTION("diagonal mode equals full mode for a one-parameter ansatz") {
    VqiteConfig full;
    VqiteConfig diag = VqiteConfig::diagonal_defaults();
    diag.delta_t = full.delta_t;
    const std::vector<double> theta{0.1};
    Eigen::MatrixXd A(1, 1);
    A << 0.25;
    Eigen::VectorXd C(1);
    C << 0.4;
    REQUIRE(vqite_step(theta, A, C, full)[0] == Catch::Approx(vqite_step(theta, A, C, diag)[0]));
  }
}

TEST_CASE("one vqite step from Gaussian init lowers the energy") {
  const IsingModel m = build_model(ModelKind::tri, 4, 4);
  const Ansatz a = build_ansatz(m);
  const EnergyTable t = energy_table(m);
  const StateVector in = StateVector::zero_state(16);
  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    const auto theta = gaussian_init(a.n_params(), seed_stream(seed, "vqite-init"));
    const TangentBank bank = tangent_bank(a.circuit, theta, in);
    const double e_before = expectation_diagonal(bank.state, t.span());
    VqiteConfig cfg;
    const auto theta_next = vqite_step(theta, assemble_A(bank), assemble_C(bank, t.span()), cfg);
    const double e_after = expectation_diagonal(run_circuit(a.circuit, theta_next, in), t.span());
    REQUIRE(e_after < e_before);
  }
}

TEST_CASE("vqe zero-gradient start is a fixed point") {
  // <H> = <phi|Z|phi> with phi = Rx(theta) H |0>: gradient vanishes at theta = 0
  IsingModel toy;
  toy.kind = ModelKind::chain;
  toy.Lx = 1;
  toy.Ly = 1;
  toy.n_sites = 1;
  Ansatz a;
  a.n_qubits = 1;
  a.circuit = Circuit(1);
  a.circuit.add_hadamard(0);
  a.circuit.add_rotation(PauliString({{0, 'X'}}, 1), 0);
  std::vector<double> table{1.0, -1.0};  // Z
  std::vector<double> grad;
  const std::vector<double> theta{0.0};
  energy_and_gradient(a.circuit, theta, StateVector::zero_state(1), table, grad);
  REQUIRE(std::abs(grad[0]) < 1e-14);
}

TEST_CASE("vqite runs are reproducible for a fixed seed") {
  const IsingModel m = build_model(ModelKind::tri, 2, 2);
  const Ansatz a = build_ansatz(m);
  VqiteConfig cfg;
  cfg.total_t = 0.5;
  const VqiteResult r1 = vqite_run(m, a, cfg, 42);
  const VqiteResult r2 = vqite_run(m, a, cfg, 42);
  REQUIRE(r1.traj.records.size() == r2.traj.records.size());
  for (std::size_t i = 0; i < r1.traj.records.size(); ++i)
    REQUIRE(r1.traj.records[i].energy == r2.traj.records[i].energy);  // bit-identical
  REQUIRE(r1.theta == r2.theta);
}

TEST_CASE("small-lattice vqite and vqe reach the ground state") {
  const IsingModel m = build_model(ModelKind::tri, 2, 2);
  const Ansatz a = build_ansatz(m);
  SECTION("full vqite") {
    VqiteConfig cfg;
    cfg.total_t = 15.0;
    const VqiteResult res = vqite_run(m, a, cfg, 5);
    REQUIRE(std::abs(res.final_energy - res.reference_e0) < 5e-2);
    REQUIRE(res.converged);
  }
  SECTION("vqe") {
    VqeConfig cfg;
    cfg.eta = 0.05;
    cfg.max_iters = 3000;
    cfg.stop_on_convergence = true;
    const VqeResult res = vqe_run(m, a, cfg, 5);
    REQUIRE(std::abs(res.final_energy - res.reference_e0) < 5e-2);
  }
}

TEST_CASE("parameter snapshot file format") {
  const IsingModel m = build_model(ModelKind::tri, 2, 2);
  const Ansatz a = build_ansatz(m);
  VqiteConfig cfg;
  cfg.total_t = 0.3;
  cfg.snapshot_every = 1;
  const auto path = std::filesystem::temp_directory_path() / "sectorlab_snap_test.bin";
  cfg.snapshot_path = path.string();
  vqite_run(m, a, cfg, 3);
  std::ifstream is(path, std::ios::binary);
  char magic[8];
  is.read(magic, 8);
  REQUIRE(std::string(magic, 8) == "SLABPRM1");
  std::uint64_t p = 0;
  is.read(reinterpret_cast<char*>(&p), 8);
  REQUIRE(p == static_cast<std::uint64_t>(a.n_params()));
  std::uint64_t step = 0;
  is.read(reinterpret_cast<char*>(&step), 8);
  REQUIRE(step == 0);
  std::vector<double> theta(p);
  is.read(reinterpret_cast<char*>(theta.data()), static_cast<std::streamsize>(8 * p));
  REQUIRE(is.good());
  REQUIRE(theta == gaussian_init(a.n_params(), seed_stream(3, "vqite-init")));
  std::filesystem::remove(path);
}
