#pragma once

#include <chrono>
#include <filesystem>
#include <json.hpp>

#include "sectorlab/anneal.hpp"
#include "sectorlab/oracle.hpp"
#include "sectorlab/qite.hpp"
#include "sectorlab/spectra.hpp"
#include "sectorlab/variational.hpp"

namespace sectorlab {

// One run: model + algorithm + algorithm-specific block + seed + output.
// Serialized as a [name] section of key = value rows; unknown keys are
// rejected so presets stay auditable.
struct ExperimentConfig {
  std::string name = "run";
  std::string algorithm = "qa";  // qa|sqa|qite|vqite|diag-vqite|vqe|spectrum|oracle
  ModelKind model = ModelKind::tri;
  int Lx = 4, Ly = 4;
  Couplings couplings;
  std::uint64_t seed = 1;

  AnnealConfig anneal;
  SweepConfig sweep;
  QiteConfig qite;
  VqiteConfig vqite;
  VqeConfig vqe;
  int k_levels = 8;
  int s_points = 101;
  int refine = 10;
  double eig_tol = 1e-8;
};

inline bool operator==(const AnnealConfig& a, const AnnealConfig& b) {
  return a.delta_t == b.delta_t && a.delta_s == b.delta_s && a.record_every == b.record_every &&
         a.step_tol == b.step_tol && a.step_order == b.step_order &&
         a.recheck_interval == b.recheck_interval;
}
inline bool operator==(const SweepConfig& a, const SweepConfig& b) {
  return a.h_max == b.h_max && a.s_max == b.s_max && a.edge_axis == b.edge_axis &&
         a.edge_count == b.edge_count;
}
inline bool operator==(const QiteConfig& a, const QiteConfig& b) {
  return a.delta_tau == b.delta_tau && a.total_tau == b.total_tau &&
         a.record_every == b.record_every;
}
inline bool operator==(const VqiteConfig& a, const VqiteConfig& b) {
  return a.delta_t == b.delta_t && a.epsilon == b.epsilon && a.total_t == b.total_t &&
         a.mode == b.mode && a.record_every == b.record_every &&
         a.stop_on_convergence == b.stop_on_convergence && a.snapshot_every == b.snapshot_every;
}
inline bool operator==(const VqeConfig& a, const VqeConfig& b) {
  return a.eta == b.eta && a.max_iters == b.max_iters && a.record_every == b.record_every &&
         a.stop_on_convergence == b.stop_on_convergence;
}
inline bool operator==(const Couplings& a, const Couplings& b) {
  return a.jx == b.jx && a.jwedge == b.jwedge && a.j == b.j && a.k == b.k && a.kp == b.kp &&
         a.j2d == b.j2d;
}
inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.name == b.name && a.algorithm == b.algorithm && a.model == b.model && a.Lx == b.Lx &&
         a.Ly == b.Ly && a.couplings == b.couplings && a.seed == b.seed && a.anneal == b.anneal &&
         a.sweep == b.sweep && a.qite == b.qite && a.vqite == b.vqite && a.vqe == b.vqe &&
         a.k_levels == b.k_levels && a.s_points == b.s_points && a.refine == b.refine &&
         a.eig_tol == b.eig_tol;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void apply_config_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto as_double = [&] { return std::stod(value); };
  auto as_long = [&] { return std::stol(value); };
  auto as_bool = [&] {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: boolean expected for " + key);
  };
  if (key == "algorithm") {
    c.algorithm = value;
    if (value == "diag-vqite") c.vqite = VqiteConfig::diagonal_defaults();
    return;
  }
  if (key == "model") { c.model = model_kind_from_string(value); return; }
  if (key == "Lx") { c.Lx = static_cast<int>(as_long()); return; }
  if (key == "Ly") { c.Ly = static_cast<int>(as_long()); return; }
  if (key == "seed") { c.seed = static_cast<std::uint64_t>(std::stoull(value)); return; }
  if (key == "jx") { c.couplings.jx = as_double(); return; }
  if (key == "jwedge") { c.couplings.jwedge = as_double(); return; }
  if (key == "j") { c.couplings.j = as_double(); return; }
  if (key == "k") { c.couplings.k = as_double(); return; }
  if (key == "kp") { c.couplings.kp = as_double(); return; }
  if (key == "j2d") { c.couplings.j2d = as_double(); return; }

  const std::string& alg = c.algorithm;
  const bool anneal_alg = (alg == "qa" || alg == "sqa");
  const bool vqite_alg = (alg == "vqite" || alg == "diag-vqite");
  if (anneal_alg) {
    if (key == "delta_t") { c.anneal.delta_t = as_double(); return; }
    if (key == "delta_s") { c.anneal.delta_s = as_double(); return; }
    if (key == "record_every") { c.anneal.record_every = as_long(); return; }
    if (key == "step_tol") { c.anneal.step_tol = as_double(); return; }
    if (key == "step_order") { c.anneal.step_order = static_cast<int>(as_long()); return; }
    if (key == "recheck_interval") { c.anneal.recheck_interval = as_long(); return; }
  }
  if (alg == "sqa") {
    if (key == "h_max") { c.sweep.h_max = as_double(); return; }
    if (key == "s_max") { c.sweep.s_max = as_double(); return; }
    if (key == "edge_count") { c.sweep.edge_count = static_cast<int>(as_long()); return; }
    if (key == "edge_axis") {
      if (value == "columns") c.sweep.edge_axis = SweepConfig::Axis::columns;
      else if (value == "rows") c.sweep.edge_axis = SweepConfig::Axis::rows;
      else throw std::invalid_argument("config: edge_axis must be columns or rows");
      return;
    }
  }
  if (alg == "qite") {
    if (key == "delta_tau") { c.qite.delta_tau = as_double(); return; }
    if (key == "total_tau") { c.qite.total_tau = as_double(); return; }
    if (key == "record_every") { c.qite.record_every = as_long(); return; }
  }
  if (vqite_alg) {
    if (key == "delta_t") { c.vqite.delta_t = as_double(); return; }
    if (key == "epsilon") { c.vqite.epsilon = as_double(); return; }
    if (key == "total_t") { c.vqite.total_t = as_double(); return; }
    if (key == "record_every") { c.vqite.record_every = as_long(); return; }
    if (key == "stop_on_convergence") { c.vqite.stop_on_convergence = as_bool(); return; }
    if (key == "snapshot_every") { c.vqite.snapshot_every = as_long(); return; }
  }
  if (alg == "vqe") {
    if (key == "eta") { c.vqe.eta = as_double(); return; }
    if (key == "max_iters") { c.vqe.max_iters = as_long(); return; }
    if (key == "record_every") { c.vqe.record_every = as_long(); return; }
    if (key == "stop_on_convergence") { c.vqe.stop_on_convergence = as_bool(); return; }
  }
  if (alg == "spectrum") {
    if (key == "k_levels") { c.k_levels = static_cast<int>(as_long()); return; }
    if (key == "s_points") { c.s_points = static_cast<int>(as_long()); return; }
    if (key == "refine") { c.refine = static_cast<int>(as_long()); return; }
    if (key == "eig_tol") { c.eig_tol = as_double(); return; }
  }
  throw std::invalid_argument("config: unknown key '" + key + "' for algorithm '" + alg + "'");
}

inline void serialize_config(const ExperimentConfig& c, std::ostream& os) {
  using detail::fmt_double;
  os << "[" << c.name << "]\n";
  os << "algorithm = " << c.algorithm << "\n";
  os << "model = " << to_string(c.model) << "\n";
  os << "Lx = " << c.Lx << "\n";
  os << "Ly = " << c.Ly << "\n";
  os << "seed = " << c.seed << "\n";
  switch (c.model) {
    case ModelKind::tri:
      os << "jx = " << fmt_double(c.couplings.jx) << "\n";
      os << "jwedge = " << fmt_double(c.couplings.jwedge) << "\n";
      break;
    case ModelKind::sq:
      os << "j = " << fmt_double(c.couplings.j) << "\n";
      os << "k = " << fmt_double(c.couplings.k) << "\n";
      os << "kp = " << fmt_double(c.couplings.kp) << "\n";
      break;
    case ModelKind::chain: os << "j = " << fmt_double(c.couplings.j) << "\n"; break;
    case ModelKind::ising2d: os << "j2d = " << fmt_double(c.couplings.j2d) << "\n"; break;
  }
  const std::string& alg = c.algorithm;
  if (alg == "qa" || alg == "sqa") {
    os << "delta_t = " << fmt_double(c.anneal.delta_t) << "\n";
    os << "delta_s = " << fmt_double(c.anneal.delta_s) << "\n";
    os << "record_every = " << c.anneal.record_every << "\n";
    os << "step_tol = " << fmt_double(c.anneal.step_tol) << "\n";
    os << "step_order = " << c.anneal.step_order << "\n";
    os << "recheck_interval = " << c.anneal.recheck_interval << "\n";
  }
  if (alg == "sqa") {
    os << "h_max = " << fmt_double(c.sweep.h_max) << "\n";
    os << "s_max = " << fmt_double(c.sweep.s_max) << "\n";
    os << "edge_count = " << c.sweep.edge_count << "\n";
    os << "edge_axis = "
       << (c.sweep.edge_axis == SweepConfig::Axis::columns ? "columns" : "rows") << "\n";
  }
  if (alg == "qite") {
    os << "delta_tau = " << fmt_double(c.qite.delta_tau) << "\n";
    os << "total_tau = " << fmt_double(c.qite.total_tau) << "\n";
    os << "record_every = " << c.qite.record_every << "\n";
  }
  if (alg == "vqite" || alg == "diag-vqite") {
    os << "delta_t = " << fmt_double(c.vqite.delta_t) << "\n";
    os << "epsilon = " << fmt_double(c.vqite.epsilon) << "\n";
    os << "total_t = " << fmt_double(c.vqite.total_t) << "\n";
    os << "record_every = " << c.vqite.record_every << "\n";
    os << "stop_on_convergence = " << (c.vqite.stop_on_convergence ? "true" : "false") << "\n";
  }
  if (alg == "vqe") {
    os << "eta = " << fmt_double(c.vqe.eta) << "\n";
    os << "max_iters = " << c.vqe.max_iters << "\n";
    os << "record_every = " << c.vqe.record_every << "\n";
    os << "stop_on_convergence = " << (c.vqe.stop_on_convergence ? "true" : "false") << "\n";
  }
  if (alg == "spectrum") {
    os << "k_levels = " << c.k_levels << "\n";
    os << "s_points = " << c.s_points << "\n";
    os << "refine = " << c.refine << "\n";
    os << "eig_tol = " << fmt_double(c.eig_tol) << "\n";
  }
}

// Parses one or more [section] blocks. Keys must appear after `algorithm`
// resolves their meaning; `algorithm` and `model` therefore come first in
// serialized files.
inline std::vector<ExperimentConfig> parse_configs(std::istream& is) {
  std::vector<ExperimentConfig> out;
  std::string line;
  int lineno = 0;
  std::vector<std::pair<std::string, std::string>> pending;
  std::string section;
  auto flush = [&]() {
    if (section.empty()) return;
    ExperimentConfig c;
    c.name = section;
    // apply algorithm and model first so later keys validate against them
    for (auto& [k, v] : pending)
      if (k == "algorithm") apply_config_key(c, k, v);
    for (auto& [k, v] : pending)
      if (k == "model") apply_config_key(c, k, v);
    for (auto& [k, v] : pending)
      if (k != "algorithm" && k != "model") apply_config_key(c, k, v);
    out.push_back(std::move(c));
    pending.clear();
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config: malformed section header");
      flush();
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw std::invalid_argument("config: empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw std::invalid_argument("config: key before any [section]");
    pending.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  flush();
  return out;
}

inline std::vector<ExperimentConfig> parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  return parse_configs(is);
}

struct ExperimentSummary {
  std::string name;
  std::string algorithm;
  nlohmann::json json;
};

inline IsingModel model_from_config(const ExperimentConfig& c) {
  return build_model(c.model, c.Lx, c.Ly, c.couplings);
}

// Executes one run, writes <out>/<name>.csv and <out>/<name>.json, and
// returns the summary. Identical config + seed give identical bytes.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string base = (fs::path(out_dir) / cfg.name).string();
  const auto t_start = std::chrono::steady_clock::now();

  ExperimentSummary summary;
  summary.name = cfg.name;
  summary.algorithm = cfg.algorithm;
  nlohmann::json& j = summary.json;
  j["name"] = cfg.name;
  j["algorithm"] = cfg.algorithm;
  j["model"] = to_string(cfg.model);
  j["Lx"] = cfg.Lx;
  j["Ly"] = cfg.Ly;
  j["seed"] = cfg.seed;

  const IsingModel model = model_from_config(cfg);

  auto finish_traj = [&](const Trajectory& traj, double total_time) {
    traj.write_csv(base + ".csv");
    const TrajectoryRecord& last = traj.records.back();
    const double e0 = energy_table(model).min_value();
    j["final_energy"] = last.energy_h0;
    j["reference_E0"] = e0;
    j["converged"] = std::abs(last.energy_h0 - e0) < 5e-2;
    j["total_time"] = total_time;
    if (last.has_sector) {
      j["sector"] = {{"p0", last.sector_p[0]},
                     {"p2", last.sector_p[1]},
                     {"p4", last.sector_p[2]},
                     {"invalid", last.sector_invalid}};
    }
    if (!traj.phases.empty()) {
      j["phases"] = nlohmann::json::array();
      for (const auto& p : traj.phases) j["phases"].push_back({{"step", p.step}, {"phase", p.phase}});
    }
  };

  if (cfg.algorithm == "qa") {
    const Trajectory traj = qa_run(model, cfg.anneal);
    finish_traj(traj, cfg.anneal.total_time());
  } else if (cfg.algorithm == "sqa") {
    const Trajectory traj = sqa_run(model, cfg.anneal, cfg.sweep);
    finish_traj(traj, static_cast<double>(traj.records.back().step) * cfg.anneal.delta_t);
  } else if (cfg.algorithm == "qite") {
    const QiteResult res = qite_run(model, cfg.qite);
    finish_traj(res.traj, cfg.qite.total_tau);
  } else if (cfg.algorithm == "vqite" || cfg.algorithm == "diag-vqite") {
    VqiteConfig vc = cfg.vqite;
    if (cfg.algorithm == "diag-vqite") vc.mode = VqiteMode::diagonal;
    const Ansatz ansatz = build_ansatz(model);
    const VqiteResult res = vqite_run(model, ansatz, vc, cfg.seed);
    res.traj.write_csv(base + ".csv");
    j["final_energy"] = res.final_energy;
    j["reference_E0"] = res.reference_e0;
    j["converged"] = res.converged;
    j["first_convergence_t"] = res.first_convergence_t;
    j["fallback_events"] = res.fallback_events;
    if (vc.mode == VqiteMode::full) j["min_A_eigenvalue"] = res.min_A_eigenvalue;
    if (model.kind == ModelKind::tri || model.kind == ModelKind::sq) {
      const SectorClassifier cls(model);
      const SectorDistribution d = sector_distribution(res.final_state, cls);
      j["sector"] = {{"p0", d.p(0)}, {"p2", d.p(2)}, {"p4", d.p(4)}, {"invalid", d.invalid}};
    }
  } else if (cfg.algorithm == "vqe") {
    const Ansatz ansatz = build_ansatz(model);
    const VqeResult res = vqe_run(model, ansatz, cfg.vqe, cfg.seed);
    res.traj.write_csv(base + ".csv");
    j["final_energy"] = res.final_energy;
    j["reference_E0"] = res.reference_e0;
    j["converged"] = res.converged;
    j["plateaued"] = res.plateaued;
    j["iterations"] = res.iterations;
    j["final_grad_norm"] = res.final_grad_norm;
    if (model.kind == ModelKind::tri || model.kind == ModelKind::sq) {
      const SectorClassifier cls(model);
      const SectorDistribution d = sector_distribution(res.final_state, cls);
      j["sector"] = {{"p0", d.p(0)}, {"p2", d.p(2)}, {"p4", d.p(4)}, {"invalid", d.invalid}};
    }
  } else if (cfg.algorithm == "spectrum") {
    std::vector<double> grid(static_cast<std::size_t>(cfg.s_points));
    for (int i = 0; i < cfg.s_points; ++i)
      grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (cfg.s_points - 1);
    const GapCurve curve = gap_curve(model, grid, cfg.k_levels, cfg.eig_tol, cfg.refine, cfg.seed);
    std::ofstream os(base + ".csv");
    write_gap_curve_csv(curve, os);
    j["g_min"] = curve.g_min;
    j["s_star"] = curve.s_star;
    j["ground_degeneracy"] = curve.ground_degeneracy;
    j["adiabatic_timescale"] = 1.0 / (curve.g_min * curve.g_min);
    j["E0_at_s1"] = curve.samples.back().levels.front();
    j["reference_E0"] = energy_table(model).min_value();
  } else if (cfg.algorithm == "oracle") {
    const OracleData d = oracle_run(model);
    write_oracle(d, base + ".json");
    summary.json = to_json(d);
    summary.json["name"] = cfg.name;
    summary.json["algorithm"] = "oracle";
    const auto t_end = std::chrono::steady_clock::now();
    summary.json["wall_seconds"] = std::chrono::duration<double>(t_end - t_start).count();
    return summary;
  } else {
    throw std::invalid_argument("run_experiment: unknown algorithm " + cfg.algorithm);
  }

  const auto t_end = std::chrono::steady_clock::now();
  j["wall_seconds"] = std::chrono::duration<double>(t_end - t_start).count();
  std::ofstream os(base + ".json");
  os << j.dump(2) << "\n";
  return summary;
}

}  // namespace sectorlab
