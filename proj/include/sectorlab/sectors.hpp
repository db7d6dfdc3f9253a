#pragma once

#include <cstring>
#include <fstream>
#include <map>

#include "sectorlab/lattice.hpp"
#include "sectorlab/statevector.hpp"

namespace sectorlab {

struct SectorLabel {
  bool valid = false;
  int defect_count = 0;  // meaningful only when valid
};

// Topological-sector classifier for the tri and sq models.
//
// tri: a configuration is valid iff every elementary triangle has exactly one
// parallel-spin bond (triangle rule); N_D counts antiparallel x-bonds in a
// row, which is the same in every row for valid configurations (checked).
//
// sq: valid iff every plaquette has exactly one excited bond (square rule,
// excited = coupling * z_j * z_k > 0). N_D is the winding of the excited-bond
// covering relative to the weak-bond reference covering, measured as the
// divergence-free-flow flux through one horizontal and one vertical cut:
//   I_y = (-1)^y sum_x (-1)^x [h-bond (x, y+1) excited]
//   J_x = (-1)^x sum_y (-1)^y [v-bond (x+1, y) excited]
// Both are cut-independent for valid configurations (checked), and
// N_D = |I - I_ref| + |J - J_ref| is constant on every component of the
// single-flip connectivity graph of the valid set.
class SectorClassifier {
 public:
  explicit SectorClassifier(const IsingModel& m) : model_(m) {
    if (m.kind != ModelKind::tri && m.kind != ModelKind::sq)
      throw std::invalid_argument("SectorClassifier: only tri and sq models have sectors");
    if (m.kind == ModelKind::sq) {
      h_coupling_.assign(static_cast<std::size_t>(m.Lx) * m.Ly, 0.0);
      v_coupling_.assign(static_cast<std::size_t>(m.Lx) * m.Ly, 0.0);
      for (const Bond& b : m.bonds) {
        const int x = m.site_x(b.j), y = m.site_y(b.j);
        if (b.k == m.site(x + 1, y))
          h_coupling_[static_cast<std::size_t>(y) * m.Lx + x] = b.coupling;
        else if (b.k == m.site(x, y + 1))
          v_coupling_[static_cast<std::size_t>(y) * m.Lx + x] = b.coupling;
        else
          throw std::invalid_argument("SectorClassifier: unexpected sq bond geometry");
      }
      // reference fluxes from the weak covering (horizontal bonds, x+y even)
      i_ref_ = 0;
      for (int x = 0; x < m.Lx; ++x)
        if ((x + 1) % 2 == 0) i_ref_ += parity_sign(x);
      j_ref_ = 0;
    }
  }

  const IsingModel& model() const { return model_; }

  SectorLabel label(std::uint32_t config) const {
    return model_.kind == ModelKind::tri ? label_tri(config) : label_sq(config);
  }

  // Labels for all 2^n configurations; -1 marks invalid.
  const std::vector<std::int8_t>& table() const {
    if (table_.empty()) {
      const std::size_t n = std::size_t{1} << model_.n_sites;
      table_.resize(n);
      for (std::size_t c = 0; c < n; ++c) {
        const SectorLabel l = label(static_cast<std::uint32_t>(c));
        table_[c] = l.valid ? static_cast<std::int8_t>(l.defect_count) : std::int8_t{-1};
      }
    }
    return table_;
  }

  std::map<int, std::uint64_t> populations() const {
    std::map<int, std::uint64_t> pops;
    for (std::int8_t l : table())
      if (l >= 0) ++pops[l];
    return pops;
  }

 private:
  static int parity_sign(int v) { return (v % 2 == 0) ? 1 : -1; }

  int spin(std::uint32_t config, int site) const { return (config >> site) & 1u ? -1 : 1; }

  SectorLabel label_tri(std::uint32_t c) const {
    const IsingModel& m = model_;
    for (int y = 0; y < m.Ly; ++y)
      for (int x = 0; x < m.Lx; ++x) {
        const int a = spin(c, m.site(x, y));
        const int b = spin(c, m.site(x + 1, y));
        const int d = spin(c, m.site(x + 1, y + 1));
        const int e = spin(c, m.site(x, y + 1));
        if (a == b && b == d) return {false, 0};  // up triangle fully aligned
        if (a == e && e == d) return {false, 0};  // down triangle fully aligned
      }
    int nd = -1;
    for (int y = 0; y < m.Ly; ++y) {
      int cnt = 0;
      for (int x = 0; x < m.Lx; ++x)
        if (spin(c, m.site(x, y)) != spin(c, m.site(x + 1, y))) ++cnt;
      if (nd < 0)
        nd = cnt;
      else if (cnt != nd)
        throw std::logic_error("SectorClassifier: tri row invariance violated");
    }
    return {true, nd};
  }

  bool sq_excited_h(std::uint32_t c, int x, int y) const {
    const IsingModel& m = model_;
    const double J = h_coupling_[static_cast<std::size_t>((y % m.Ly + m.Ly) % m.Ly) * m.Lx + ((x % m.Lx + m.Lx) % m.Lx)];
    return J * spin(c, m.site(x, y)) * spin(c, m.site(x + 1, y)) > 0;
  }
  bool sq_excited_v(std::uint32_t c, int x, int y) const {
    const IsingModel& m = model_;
    const double J = v_coupling_[static_cast<std::size_t>((y % m.Ly + m.Ly) % m.Ly) * m.Lx + ((x % m.Lx + m.Lx) % m.Lx)];
    return J * spin(c, m.site(x, y)) * spin(c, m.site(x, y + 1)) > 0;
  }

  SectorLabel label_sq(std::uint32_t c) const {
    const IsingModel& m = model_;
    for (int y = 0; y < m.Ly; ++y)
      for (int x = 0; x < m.Lx; ++x) {
        const int cnt = sq_excited_h(c, x, y) + sq_excited_h(c, x, y + 1) +
                        sq_excited_v(c, x, y) + sq_excited_v(c, x + 1, y);
        if (cnt != 1) return {false, 0};
      }
    int i_flux = 0;
    for (int y = 0; y < m.Ly; ++y) {
      int f = 0;
      for (int x = 0; x < m.Lx; ++x)
        if (sq_excited_h(c, x, y + 1)) f += parity_sign(x);
      f *= parity_sign(y);
      if (y == 0)
        i_flux = f;
      else if (f != i_flux)
        throw std::logic_error("SectorClassifier: sq horizontal-cut flux not cut-invariant");
    }
    int j_flux = 0;
    for (int x = 0; x < m.Lx; ++x) {
      int f = 0;
      for (int y = 0; y < m.Ly; ++y)
        if (sq_excited_v(c, x + 1, y)) f += parity_sign(y);
      f *= parity_sign(x);
      if (x == 0)
        j_flux = f;
      else if (f != j_flux)
        throw std::logic_error("SectorClassifier: sq vertical-cut flux not cut-invariant");
    }
    return {true, std::abs(i_flux - i_ref_) + std::abs(j_flux - j_ref_)};
  }

  IsingModel model_;
  std::vector<double> h_coupling_, v_coupling_;
  int i_ref_ = 0, j_ref_ = 0;
  mutable std::vector<std::int8_t> table_;
};

struct SectorDistribution {
  std::map<int, double> probability;  // N_D -> probability
  double invalid = 0.0;

  double total() const {
    double t = invalid;
    for (auto& [nd, p] : probability) t += p;
    return t;
  }
  double p(int nd) const {
    auto it = probability.find(nd);
    return it == probability.end() ? 0.0 : it->second;
  }
};

inline SectorDistribution sector_distribution(const StateVector& psi, const SectorClassifier& cls) {
  if (psi.dim() != (std::size_t{1} << cls.model().n_sites))
    throw std::invalid_argument("sector_distribution: state/model size mismatch");
  const auto& table = cls.table();
  SectorDistribution d;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    const double w = std::norm(psi.amp[i]);
    if (table[i] < 0)
      d.invalid += w;
    else
      d.probability[table[i]] += w;
  }
  return d;
}

// Binary table export: 8-byte header (uint32 n_sites, uint32 kind id),
// then one int8 label per configuration (-1 = invalid).
inline void write_sector_table(const SectorClassifier& cls, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_sector_table: cannot open " + path);
  const std::uint32_t n = static_cast<std::uint32_t>(cls.model().n_sites);
  const std::uint32_t kind = static_cast<std::uint32_t>(model_kind_id(cls.model().kind));
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&kind), 4);
  const auto& t = cls.table();
  os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size()));
}

struct SectorTableFile {
  std::uint32_t n_sites = 0;
  std::uint32_t kind_id = 0;
  std::vector<std::int8_t> labels;
};

inline SectorTableFile read_sector_table(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_sector_table: cannot open " + path);
  SectorTableFile f;
  is.read(reinterpret_cast<char*>(&f.n_sites), 4);
  is.read(reinterpret_cast<char*>(&f.kind_id), 4);
  if (!is || f.n_sites > 28) throw std::runtime_error("read_sector_table: bad header");
  f.labels.resize(std::size_t{1} << f.n_sites);
  is.read(reinterpret_cast<char*>(f.labels.data()), static_cast<std::streamsize>(f.labels.size()));
  if (!is) throw std::runtime_error("read_sector_table: truncated file");
  return f;
}

}  // namespace sectorlab
