#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>

#include "sectorlab/lattice.hpp"

using namespace sectorlab;

namespace {

std::map<double, int> coupling_multiset(const IsingModel& m) {
  std::map<double, int> out;
  for (const Bond& b : m.bonds) ++out[b.coupling];
  return out;
}

}  // namespace

TEST_CASE("chain of 16 has 16 unit bonds and ground energy -16") {
  const IsingModel m = build_model(ModelKind::chain, 16, 1);
  REQUIRE(m.bonds.size() == 16);
  for (const Bond& b : m.bonds) REQUIRE(b.coupling == 1.0);
  const auto spec = brute_force_spectrum(m);
  REQUIRE(spec.front().energy == Catch::Approx(-16.0));
  REQUIRE(spec.front().degeneracy == 2);  // the two alternating rings
}

TEST_CASE("triangular 4x4 bond structure") {
  const IsingModel m = build_model(ModelKind::tri, 4, 4);
  REQUIRE(m.bonds.size() == 48);
  const auto mult = coupling_multiset(m);
  REQUIRE(mult.at(0.9) == 16);
  REQUIRE(mult.at(1.0) == 32);
  int jx = 0, jw = 0;
  for (const Bond& b : m.bonds) {
    if (b.cls == BondClass::Jx) ++jx;
    if (b.cls == BondClass::Jwedge) ++jw;
  }
  REQUIRE(jx == 16);
  REQUIRE(jw == 32);
}

TEST_CASE("triangular 4x4 ground energy from brute force") {
  const IsingModel m = build_model(ModelKind::tri, 4, 4);
  const auto spec = brute_force_spectrum(m);
  // 32 satisfied Jwedge bonds and 16 frustrated Jx bonds: 32*(-1) + 16*0.9
  REQUIRE(spec.front().energy == Catch::Approx(-17.6).margin(1e-12));
  REQUIRE(spec.front().degeneracy == 2);
  REQUIRE(spec.at(1).energy == Catch::Approx(-16.0).margin(1e-12));
}

TEST_CASE("square 4x4 bond structure and ground energy") {
  const IsingModel m = build_model(ModelKind::sq, 4, 4);
  REQUIRE(m.bonds.size() == 32);
  const auto mult = coupling_multiset(m);
  REQUIRE(mult.at(-1.0) == 20);
  REQUIRE(mult.at(1.0) == 4);
  REQUIRE(mult.at(0.9) == 4);
  REQUIRE(mult.at(-0.9) == 4);
  int kp = 0;
  for (const Bond& b : m.bonds)
    if (b.cls == BondClass::Kp) ++kp;
  REQUIRE(kp == 8);  // one weakened bond per plaquette
  const auto spec = brute_force_spectrum(m);
  REQUIRE(spec.front().energy == Catch::Approx(-16.8).margin(1e-12));
  REQUIRE(spec.front().degeneracy == 2);
}

TEST_CASE("2d Ising control model") {
  const IsingModel m = build_model(ModelKind::ising2d, 4, 4, Couplings{});
  REQUIRE(m.bonds.size() == 32);
  const auto spec = brute_force_spectrum(m);
  REQUIRE(spec.front().energy == Catch::Approx(-3.2).margin(1e-12));  // Neel satisfies all bonds
}

TEST_CASE("build_model rejects bad dimensions") {
  REQUIRE_THROWS_AS(build_model(ModelKind::chain, 0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(build_model(ModelKind::tri, 3, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(build_model(ModelKind::sq, 4, 5), std::invalid_argument);
  REQUIRE_THROWS_AS(build_model(ModelKind::ising2d, 4, -2), std::invalid_argument);
}

TEST_CASE("energy table symmetry under global spin flip", "[property]") {
  for (ModelKind kind : {ModelKind::chain, ModelKind::tri, ModelKind::sq, ModelKind::ising2d}) {
    const IsingModel m = (kind == ModelKind::chain) ? build_model(kind, 12, 1)
                                                    : build_model(kind, 4, 4);
    const EnergyTable t = energy_table(m);
    const std::size_t mask = t.size() - 1;
    for (std::size_t i = 0; i < t.size(); i += 37)
      REQUIRE(t.values[i] == t.values[~i & mask]);
  }
}

TEST_CASE("energy table level index is consistent") {
  const IsingModel m = build_model(ModelKind::tri, 4, 4);
  const EnergyTable t = energy_table(m);
  REQUIRE(t.min_value() == Catch::Approx(-17.6).margin(1e-12));
  for (std::size_t i = 0; i < t.size(); i += 101)
    REQUIRE(t.distinct[t.level[i]] == t.values[i]);
  // degeneracies over levels account for all configurations
  const auto spec = brute_force_spectrum(m);
  std::uint64_t total = 0;
  for (const auto& l : spec) total += l.degeneracy;
  REQUIRE(total == t.size());
}

TEST_CASE("exhaustive-size guard") {
  IsingModel big;
  big.kind = ModelKind::chain;
  big.Lx = 25;
  big.Ly = 1;
  big.n_sites = 25;
  REQUIRE_THROWS_AS(energy_table(big), std::invalid_argument);
  REQUIRE_THROWS_AS(brute_force_spectrum(big), std::invalid_argument);
}

TEST_CASE("bond fixture round trip") {
  const IsingModel m = build_model(ModelKind::sq, 4, 4);
  std::stringstream ss;
  write_bond_fixture(m, ss);
  const auto bonds = read_bond_fixture(ss);
  REQUIRE(bonds.size() == m.bonds.size());
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    REQUIRE(bonds[i].j == m.bonds[i].j);
    REQUIRE(bonds[i].k == m.bonds[i].k);
    REQUIRE(bonds[i].coupling == m.bonds[i].coupling);  // bit-exact via %.17g
    REQUIRE(bonds[i].cls == m.bonds[i].cls);
  }
}

TEST_CASE("shipped fixtures match the builders") {
  for (auto [kind, name] : {std::pair{ModelKind::tri, "tri_4x4.bonds"},
                            std::pair{ModelKind::sq, "sq_4x4.bonds"}}) {
    const IsingModel m = build_model(kind, 4, 4);
    const std::string path = std::string(SECTORLAB_FIXTURE_DIR) + "/" + name;
    const auto bonds = read_bond_fixture(path);
    REQUIRE(bonds.size() == m.bonds.size());
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      REQUIRE(bonds[i].j == m.bonds[i].j);
      REQUIRE(bonds[i].k == m.bonds[i].k);
      REQUIRE(bonds[i].coupling == m.bonds[i].coupling);
      REQUIRE(bonds[i].cls == m.bonds[i].cls);
    }
  }
}
