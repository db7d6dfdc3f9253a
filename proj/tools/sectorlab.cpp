// Command-line driver: one subcommand per algorithm, plus batch execution of
// config files and the shipped figure presets.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sectorlab/experiment.hpp"
#include "sectorlab/sectors.hpp"

namespace {

using namespace sectorlab;

std::string default_out_dir() {
  if (const char* env = std::getenv("SECTORLAB_OUT")) return env;
  return "results";
}

std::string preset_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SECTORLAB_PRESETS")) return env;
  return SECTORLAB_PRESET_DIR;
}

void add_model_flags(CLI::App* cmd, ExperimentConfig& cfg, std::string& model_name) {
  cmd->add_option("--model", model_name, "model kind: chain|tri|sq|ising2d");
  cmd->add_option("--Lx", cfg.Lx, "lattice extent in x");
  cmd->add_option("--Ly", cfg.Ly, "lattice extent in y");
  cmd->add_option("--seed", cfg.seed, "64-bit master seed");
  cmd->add_option("--name", cfg.name, "run name (output file stem)");
  cmd->add_option("--jx", cfg.couplings.jx, "tri x-axis coupling");
  cmd->add_option("--jwedge", cfg.couplings.jwedge, "tri diagonal coupling");
  cmd->add_option("--j", cfg.couplings.j, "chain / sq AFM coupling");
  cmd->add_option("--k", cfg.couplings.k, "sq FM coupling");
  cmd->add_option("--kp", cfg.couplings.kp, "sq weak-bond magnitude");
  cmd->add_option("--j2d", cfg.couplings.j2d, "ising2d coupling");
}

void run_and_report(ExperimentConfig cfg, const std::string& model_name, const std::string& out) {
  if (!model_name.empty()) cfg.model = model_kind_from_string(model_name);
  const ExperimentSummary summary = run_experiment(cfg, out);
  std::cout << summary.json.dump(2) << "\n";
}

int run_batch(const std::vector<ExperimentConfig>& configs, const std::string& out,
              const std::string& only) {
  nlohmann::json index = nlohmann::json::array();
  for (const ExperimentConfig& cfg : configs) {
    if (!only.empty() && cfg.name.find(only) == std::string::npos) continue;
    std::cerr << "== " << cfg.name << " (" << cfg.algorithm << ")\n";
    const ExperimentSummary summary = run_experiment(cfg, out);
    index.push_back({{"name", summary.name},
                     {"algorithm", summary.algorithm},
                     {"csv", summary.name + ".csv"},
                     {"json", summary.name + ".json"}});
  }
  if (index.empty()) {
    std::cerr << "no runs matched\n";
    return 1;
  }
  std::ofstream os(std::filesystem::path(out) / "index.json");
  os << index.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ground-state search laboratory for frustrated Ising models"};
  app.require_subcommand(1);
  app.fallthrough();  // --out/--threads may appear after the subcommand

  std::string out = default_out_dir();
  int threads = 0;
  app.add_option("--out", out, "output directory (default $SECTORLAB_OUT or ./results)");
  app.add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");

  ExperimentConfig cfg;
  std::string model_name;

  auto* qa = app.add_subcommand("qa", "real-time quantum annealing");
  add_model_flags(qa, cfg, model_name);
  qa->add_option("--delta-t", cfg.anneal.delta_t, "time step");
  qa->add_option("--delta-s", cfg.anneal.delta_s, "annealing increment (T = delta_t/delta_s)");
  qa->add_option("--record-every", cfg.anneal.record_every, "record cadence in steps");
  qa->add_option("--step-tol", cfg.anneal.step_tol, "run-level splitting tolerance");
  qa->add_option("--step-order", cfg.anneal.step_order, "composition order (2 or 4)");
  qa->add_option("--recheck-interval", cfg.anneal.recheck_interval, "verification cadence");

  auto* sqa = app.add_subcommand("sqa", "sweeping quantum annealing with virtual edges");
  add_model_flags(sqa, cfg, model_name);
  sqa->add_option("--delta-t", cfg.anneal.delta_t, "time step");
  sqa->add_option("--delta-s", cfg.anneal.delta_s, "annealing increment");
  sqa->add_option("--record-every", cfg.anneal.record_every, "record cadence in steps");
  sqa->add_option("--step-tol", cfg.anneal.step_tol, "run-level splitting tolerance");
  sqa->add_option("--step-order", cfg.anneal.step_order, "composition order (2 or 4)");
  sqa->add_option("--recheck-interval", cfg.anneal.recheck_interval, "verification cadence");
  sqa->add_option("--h-max", cfg.sweep.h_max, "virtual-edge peak intensity");
  sqa->add_option("--s-max", cfg.sweep.s_max, "progress at which all edges are glued");
  sqa->add_option("--edge-count", cfg.sweep.edge_count, "number of virtual edges");

  auto* qite = app.add_subcommand("qite", "exact imaginary-time evolution");
  add_model_flags(qite, cfg, model_name);
  qite->add_option("--delta-tau", cfg.qite.delta_tau, "imaginary-time step");
  qite->add_option("--total-tau", cfg.qite.total_tau, "total imaginary time");
  qite->add_option("--record-every", cfg.qite.record_every, "record cadence in steps");

  auto* vqite = app.add_subcommand("vqite", "variational imaginary-time evolution (full A)");
  auto* dvqite = app.add_subcommand("diag-vqite", "variational imaginary time, diagonal A");
  for (CLI::App* cmd : {vqite, dvqite}) {
    add_model_flags(cmd, cfg, model_name);
    cmd->add_option("--delta-t", cfg.vqite.delta_t, "parameter-update step");
    cmd->add_option("--epsilon", cfg.vqite.epsilon, "diagonal regularization");
    cmd->add_option("--total-t", cfg.vqite.total_t, "total evolution time");
    cmd->add_option("--record-every", cfg.vqite.record_every, "record cadence in steps");
    cmd->add_flag("--stop-on-convergence", cfg.vqite.stop_on_convergence,
                  "stop once |E-E0| < 5e-2 holds for 10 records");
  }

  auto* vqe = app.add_subcommand("vqe", "gradient-descent variational eigensolver");
  add_model_flags(vqe, cfg, model_name);
  vqe->add_option("--eta", cfg.vqe.eta, "learning rate");
  vqe->add_option("--max-iters", cfg.vqe.max_iters, "iteration budget");
  vqe->add_option("--record-every", cfg.vqe.record_every, "record cadence");
  vqe->add_flag("--stop-on-convergence", cfg.vqe.stop_on_convergence,
                "stop once |E-E0| < 5e-2 holds for 10 records");

  auto* spectrum = app.add_subcommand("spectrum", "low-lying levels of H(s) and the gap curve");
  add_model_flags(spectrum, cfg, model_name);
  spectrum->add_option("--levels", cfg.k_levels, "number of levels");
  spectrum->add_option("--points", cfg.s_points, "uniform s-grid size");
  spectrum->add_option("--refine", cfg.refine, "refinement factor around the minimum");
  spectrum->add_option("--eig-tol", cfg.eig_tol, "eigenvalue tolerance");

  auto* oracle = app.add_subcommand("oracle", "brute-force reference constants");
  add_model_flags(oracle, cfg, model_name);

  auto* fixtures = app.add_subcommand("fixtures", "export bond lists and sector tables");
  add_model_flags(fixtures, cfg, model_name);

  std::string cfg_path, only;
  auto* run = app.add_subcommand("run", "execute every section of a config file");
  run->add_option("file", cfg_path, "config file")->required();
  run->add_option("--only", only, "run only sections whose name contains this substring");

  std::string preset_name, presets_flag;
  auto* preset = app.add_subcommand("preset", "run a shipped figure preset");
  preset->add_option("name", preset_name, "preset name, e.g. fig2, fig5, fig7, fig8, fig9")
      ->required();
  preset->add_option("--presets-dir", presets_flag, "preset directory override");
  preset->add_option("--only", only, "run only sections whose name contains this substring");

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    for (auto [cmd, alg] : std::initializer_list<std::pair<CLI::App*, const char*>>{
             {qa, "qa"}, {sqa, "sqa"}, {qite, "qite"}, {vqite, "vqite"},
             {dvqite, "diag-vqite"}, {vqe, "vqe"}, {spectrum, "spectrum"}, {oracle, "oracle"}}) {
      if (cmd->parsed()) {
        cfg.algorithm = alg;
        if (cfg.algorithm == "diag-vqite") cfg.vqite.mode = VqiteMode::diagonal;
        if (cfg.name == "run") cfg.name = cfg.algorithm;
        run_and_report(cfg, model_name, out);
        return 0;
      }
    }
    if (fixtures->parsed()) {
      if (!model_name.empty()) cfg.model = model_kind_from_string(model_name);
      const IsingModel model = model_from_config(cfg);
      std::filesystem::create_directories(out);
      const std::string stem = to_string(model.kind) + "_" + std::to_string(model.Lx) + "x" +
                               std::to_string(model.Ly);
      write_bond_fixture(model, (std::filesystem::path(out) / (stem + ".bonds")).string());
      if (model.kind == ModelKind::tri || model.kind == ModelKind::sq) {
        const SectorClassifier cls(model);
        write_sector_table(cls, (std::filesystem::path(out) / (stem + ".sectors")).string());
      }
      std::cout << "fixtures written to " << out << "\n";
      return 0;
    }
    if (run->parsed()) return run_batch(parse_config_file(cfg_path), out, only);
    if (preset->parsed()) {
      const auto path = std::filesystem::path(preset_dir(presets_flag)) / (preset_name + ".cfg");
      if (!std::filesystem::exists(path)) {
        std::cerr << "preset not found: " << path << "\n";
        return 1;
      }
      return run_batch(parse_config_file(path.string()), out, only);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
