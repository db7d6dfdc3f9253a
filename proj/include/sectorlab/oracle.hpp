#pragma once

#include <json.hpp>

#include "sectorlab/lattice.hpp"
#include "sectorlab/sectors.hpp"

namespace sectorlab {

// Brute-force reference constants: the single source of truth the acceptance
// tests consume (ground energy/degeneracy, first excitation, and for the TSO
// models the per-sector structure).
struct OracleData {
  ModelKind kind = ModelKind::chain;
  int Lx = 0, Ly = 0;
  double e0 = 0.0, e1 = 0.0;
  std::uint64_t deg0 = 0, deg1 = 0;
  std::vector<SpectrumLevel> low_levels;              // first few classical levels
  std::uint64_t valid_count = 0;                      // rule-satisfying configs (tri/sq)
  std::map<int, std::uint64_t> sector_population;     // N_D -> config count
  std::map<int, double> sector_min_energy;            // N_D -> lowest energy
};

inline OracleData oracle_run(const IsingModel& model, int keep_levels = 8) {
  if (model.n_sites > kExhaustiveSiteLimit)
    throw std::invalid_argument("oracle_run: site count exceeds guard");
  OracleData d;
  d.kind = model.kind;
  d.Lx = model.Lx;
  d.Ly = model.Ly;
  const auto spectrum = brute_force_spectrum(model);
  d.e0 = spectrum.at(0).energy;
  d.deg0 = spectrum.at(0).degeneracy;
  d.e1 = spectrum.at(1).energy;
  d.deg1 = spectrum.at(1).degeneracy;
  for (std::size_t i = 0; i < spectrum.size() && i < static_cast<std::size_t>(keep_levels); ++i)
    d.low_levels.push_back(spectrum[i]);
  if (model.kind == ModelKind::tri || model.kind == ModelKind::sq) {
    const SectorClassifier cls(model);
    const EnergyTable table = energy_table(model);
    const auto& labels = cls.table();
    for (std::size_t c = 0; c < labels.size(); ++c) {
      if (labels[c] < 0) continue;
      ++d.valid_count;
      const int nd = labels[c];
      ++d.sector_population[nd];
      auto [it, fresh] = d.sector_min_energy.emplace(nd, table.values[c]);
      if (!fresh) it->second = std::min(it->second, table.values[c]);
    }
  }
  return d;
}

inline nlohmann::json to_json(const OracleData& d) {
  nlohmann::json j;
  j["model"] = to_string(d.kind);
  j["Lx"] = d.Lx;
  j["Ly"] = d.Ly;
  j["E0"] = d.e0;
  j["E1"] = d.e1;
  j["deg0"] = d.deg0;
  j["deg1"] = d.deg1;
  j["levels"] = nlohmann::json::array();
  for (const auto& l : d.low_levels)
    j["levels"].push_back({{"energy", l.energy}, {"degeneracy", l.degeneracy}});
  if (!d.sector_population.empty()) {
    j["valid_count"] = d.valid_count;
    for (const auto& [nd, count] : d.sector_population)
      j["sector_population"][std::to_string(nd)] = count;
    for (const auto& [nd, e] : d.sector_min_energy)
      j["sector_min_energy"][std::to_string(nd)] = e;
  }
  return j;
}

inline void write_oracle(const OracleData& d, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_oracle: cannot open " + path);
  os << to_json(d).dump(2) << "\n";
}

}  // namespace sectorlab
