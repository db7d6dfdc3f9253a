#pragma once

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "sectorlab/common.hpp"

namespace sectorlab {

enum class ModelKind { chain, tri, sq, ising2d };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::chain: return "chain";
    case ModelKind::tri: return "tri";
    case ModelKind::sq: return "sq";
    case ModelKind::ising2d: return "ising2d";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "chain") return ModelKind::chain;
  if (s == "tri") return ModelKind::tri;
  if (s == "sq") return ModelKind::sq;
  if (s == "ising2d") return ModelKind::ising2d;
  throw std::invalid_argument("unknown model kind: " + s);
}

enum class BondClass { Jx, Jwedge, J, K, Kp, chain, ising2d };

inline std::string to_string(BondClass c) {
  switch (c) {
    case BondClass::Jx: return "Jx";
    case BondClass::Jwedge: return "Jwedge";
    case BondClass::J: return "J";
    case BondClass::K: return "K";
    case BondClass::Kp: return "Kp";
    case BondClass::chain: return "chain";
    case BondClass::ising2d: return "ising2d";
  }
  return "?";
}

inline BondClass bond_class_from_string(const std::string& s) {
  if (s == "Jx") return BondClass::Jx;
  if (s == "Jwedge") return BondClass::Jwedge;
  if (s == "J") return BondClass::J;
  if (s == "K") return BondClass::K;
  if (s == "Kp") return BondClass::Kp;
  if (s == "chain") return BondClass::chain;
  if (s == "ising2d") return BondClass::ising2d;
  throw std::invalid_argument("unknown bond class: " + s);
}

struct Bond {
  int j = 0;
  int k = 0;
  double coupling = 0.0;
  BondClass cls = BondClass::chain;
};

struct Couplings {
  double jx = 0.9;      // tri: x-axis coupling
  double jwedge = 1.0;  // tri: the two diagonal directions
  double j = 1.0;       // sq AFM / chain
  double k = -1.0;      // sq FM
  double kp = 0.9;      // sq weak-bond magnitude (sign follows the bond)
  double j2d = 0.1;     // ising2d
};

// Lattice geometry plus classified bond list. Site indexing is row-major:
// site(x, y) = y*Lx + x, with periodic wrapping in both directions.
struct IsingModel {
  ModelKind kind = ModelKind::chain;
  int Lx = 0, Ly = 1;
  int n_sites = 0;
  Couplings couplings;
  std::vector<Bond> bonds;

  int site(int x, int y) const {
    x = ((x % Lx) + Lx) % Lx;
    y = ((y % Ly) + Ly) % Ly;
    return y * Lx + x;
  }
  int site_x(int s) const { return s % Lx; }
  int site_y(int s) const { return s / Lx; }
};

inline int model_kind_id(ModelKind k) {
  switch (k) {
    case ModelKind::chain: return 0;
    case ModelKind::tri: return 1;
    case ModelKind::sq: return 2;
    case ModelKind::ising2d: return 3;
  }
  return -1;
}

inline IsingModel build_model(ModelKind kind, int Lx, int Ly, Couplings c = {}) {
  if (Lx <= 0 || Ly <= 0) throw std::invalid_argument("build_model: non-positive dimensions");
  IsingModel m;
  m.kind = kind;
  m.Lx = Lx;
  m.Ly = Ly;
  m.couplings = c;
  switch (kind) {
    case ModelKind::chain: {
      if (Ly != 1) throw std::invalid_argument("build_model: chain requires Ly = 1");
      m.Ly = 1;
      m.n_sites = Lx;
      for (int x = 0; x < Lx; ++x)
        m.bonds.push_back({m.site(x, 0), m.site(x + 1, 0), c.j, BondClass::chain});
      break;
    }
    case ModelKind::tri: {
      if (Lx % 2 || Ly % 2)
        throw std::invalid_argument(
            "build_model: tri requires even Lx, Ly (the sector structure assumes even wrapping)");
      m.n_sites = Lx * Ly;
      for (int y = 0; y < Ly; ++y)
        for (int x = 0; x < Lx; ++x) {
          m.bonds.push_back({m.site(x, y), m.site(x + 1, y), c.jx, BondClass::Jx});
          m.bonds.push_back({m.site(x, y), m.site(x, y + 1), c.jwedge, BondClass::Jwedge});
          m.bonds.push_back({m.site(x, y), m.site(x + 1, y + 1), c.jwedge, BondClass::Jwedge});
        }
      break;
    }
    case ModelKind::sq: {
      if (Lx % 2 || Ly % 2)
        throw std::invalid_argument(
            "build_model: sq requires even Lx, Ly (the sector structure assumes even wrapping)");
      m.n_sites = Lx * Ly;
      // Fully frustrated: horizontal bonds alternate AFM/FM by row, verticals
      // are FM, so every plaquette has an odd number of AFM bonds. The weak
      // bonds (|coupling| scaled by kp) sit on the staggered covering
      // (x+y even), one per plaquette; they are the bonds the ground state
      // leaves excited.
      for (int y = 0; y < Ly; ++y)
        for (int x = 0; x < Lx; ++x) {
          const double sgn = (y % 2 == 0) ? 1.0 : -1.0;
          const bool weak = ((x + y) % 2 == 0);
          const double coupling = sgn * (weak ? c.kp : 1.0);
          const BondClass cls = weak ? BondClass::Kp : (sgn > 0 ? BondClass::J : BondClass::K);
          m.bonds.push_back({m.site(x, y), m.site(x + 1, y), coupling, cls});
          m.bonds.push_back({m.site(x, y), m.site(x, y + 1), c.k, BondClass::K});
        }
      break;
    }
    case ModelKind::ising2d: {
      m.n_sites = Lx * Ly;
      for (int y = 0; y < Ly; ++y)
        for (int x = 0; x < Lx; ++x) {
          m.bonds.push_back({m.site(x, y), m.site(x + 1, y), c.j2d, BondClass::ising2d});
          m.bonds.push_back({m.site(x, y), m.site(x, y + 1), c.j2d, BondClass::ising2d});
        }
      break;
    }
  }
  return m;
}

constexpr int kExhaustiveSiteLimit = 24;  // 2^24 table is the desk-scale memory limit

// Classical energies of all 2^n configurations, plus a deduplicated level
// index so repeated diagonal-phase applications need one exp per level.
struct EnergyTable {
  std::vector<double> values;
  std::vector<std::uint32_t> level;
  std::vector<double> distinct;

  double min_value() const { return distinct.front(); }
  double max_value() const { return distinct.back(); }
  std::size_t size() const { return values.size(); }
  std::span<const double> span() const { return values; }
};

inline EnergyTable energy_table(const IsingModel& m) {
  if (m.n_sites > kExhaustiveSiteLimit)
    throw std::invalid_argument("energy_table: site count exceeds exhaustive-enumeration guard");
  const std::size_t n = std::size_t{1} << m.n_sites;
  EnergyTable t;
  t.values.assign(n, 0.0);
  for (const Bond& b : m.bonds) {
    const std::uint32_t mask = (1u << b.j) | (1u << b.k);
    const double J = b.coupling;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const double zz = (std::popcount(static_cast<std::uint32_t>(i) & mask) & 1) ? -1.0 : 1.0;
      t.values[i] += J * zz;
    }
  }
  // level ids by exact value
  std::map<double, std::uint32_t> ids;
  for (double v : t.values) ids.emplace(v, 0);
  t.distinct.reserve(ids.size());
  for (auto& [v, id] : ids) {
    id = static_cast<std::uint32_t>(t.distinct.size());
    t.distinct.push_back(v);
  }
  t.level.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    t.level[i] = ids.find(t.values[i])->second;
  return t;
}

struct SpectrumLevel {
  double energy = 0.0;
  std::uint64_t degeneracy = 0;
};

// Exhaustive classical spectrum, grouped with an absolute tolerance that is
// far below the level spacings of these models.
inline std::vector<SpectrumLevel> brute_force_spectrum(const IsingModel& m, double group_tol = 1e-8) {
  if (m.n_sites > kExhaustiveSiteLimit)
    throw std::invalid_argument("brute_force_spectrum: site count exceeds guard");
  EnergyTable t = energy_table(m);
  std::vector<double> v = t.values;
  std::sort(v.begin(), v.end());
  std::vector<SpectrumLevel> out;
  for (double e : v) {
    if (out.empty() || e - out.back().energy > group_tol)
      out.push_back({e, 1});
    else
      ++out.back().degeneracy;
  }
  return out;
}

// Fixture format: one `j k coupling class` row per bond.
inline void write_bond_fixture(const IsingModel& m, std::ostream& os) {
  char buf[128];
  for (const Bond& b : m.bonds) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g %s\n", b.j, b.k, b.coupling, to_string(b.cls).c_str());
    os << buf;
  }
}

inline void write_bond_fixture(const IsingModel& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_bond_fixture: cannot open " + path);
  write_bond_fixture(m, os);
}

inline std::vector<Bond> read_bond_fixture(std::istream& is) {
  std::vector<Bond> bonds;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Bond b;
    std::string cls;
    if (!(ss >> b.j >> b.k >> b.coupling >> cls))
      throw std::runtime_error("read_bond_fixture: malformed row: " + line);
    b.cls = bond_class_from_string(cls);
    bonds.push_back(b);
  }
  return bonds;
}

inline std::vector<Bond> read_bond_fixture(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_bond_fixture: cannot open " + path);
  return read_bond_fixture(is);
}

}  // namespace sectorlab
