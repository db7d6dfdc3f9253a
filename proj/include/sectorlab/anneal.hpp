#pragma once

#include <cmath>
#include <optional>

#include "sectorlab/krylov.hpp"
#include "sectorlab/lattice.hpp"
#include "sectorlab/sectors.hpp"
#include "sectorlab/statevector.hpp"
#include "sectorlab/trajectory.hpp"

namespace sectorlab {

struct AnnealConfig {
  double delta_t = 0.1;
  double delta_s = 1.0 / 400;  // N = 1/delta_s advancing steps, T = delta_t/delta_s
  long record_every = 10;
  // integrator knobs for long runs; the standalone evolve_step op defaults
  // to tol 1e-8 with per-call verification
  double step_tol = 1e-6;
  int step_order = 4;
  long recheck_interval = 64;

  long steps() const {
    const double n = 1.0 / delta_s;
    const long ln = std::lround(n);
    if (ln <= 0 || std::abs(n - static_cast<double>(ln)) > 1e-6 * n)
      throw std::invalid_argument("AnnealConfig: 1/delta_s must be a positive integer");
    return ln;
  }
  double total_time() const { return static_cast<double>(steps()) * delta_t; }
};

namespace detail {

// exp(c * E_i) elementwise through the deduplicated level table
inline void apply_level_phase(StateVector& psi, const EnergyTable& table, cplx c) {
  std::vector<cplx> ph(table.distinct.size());
  for (std::size_t l = 0; l < ph.size(); ++l) ph[l] = std::exp(c * table.distinct[l]);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(psi.dim()); ++i)
    psi.amp[i] *= ph[table.level[i]];
}

// exp(-i w X_q)
inline void apply_x_rotation(StateVector& psi, int q, double w) {
  const double c = std::cos(w), s = std::sin(w);
  const cplx mis{0.0, -s};
  const std::size_t bit = std::size_t{1} << q;
  const std::size_t low_mask = bit - 1;
  const std::size_t half = psi.dim() / 2;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(half); ++j) {
    const std::size_t u = static_cast<std::size_t>(j);
    const std::size_t lo = ((u & ~low_mask) << 1) | (u & low_mask);
    const std::size_t hi = lo | bit;
    const cplx a = psi.amp[lo], b = psi.amp[hi];
    psi.amp[lo] = c * a + mis * b;
    psi.amp[hi] = mis * a + c * b;
  }
}

}  // namespace detail

// Splitting propagator for H = s*H0 + sum_q h_q X_q with diagonal H0.
// The base stage is the symmetric (Strang) splitting
//   exp(-i s H0 w/2) * prod_q exp(-i h_q w X_q) * exp(-i s H0 w/2);
// order 4 composes stages with Yoshida triple-jump coefficients. Either way
// the step is a product of unitaries, so the norm is preserved exactly.
class SplittingStepper {
 public:
  SplittingStepper(const EnergyTable& table, std::span<const double> intensities, double s)
      : table_(&table), h_(intensities.begin(), intensities.end()), s_(s) {}

  void set_field(std::span<const double> intensities, double s) {
    h_.assign(intensities.begin(), intensities.end());
    s_ = s;
  }

  void strang_stage(StateVector& psi, double w) const {
    detail::apply_level_phase(psi, *table_, cplx{0.0, -s_ * w / 2});
    for (std::size_t q = 0; q < h_.size(); ++q)
      if (h_[q] != 0.0) detail::apply_x_rotation(psi, static_cast<int>(q), h_[q] * w);
    detail::apply_level_phase(psi, *table_, cplx{0.0, -s_ * w / 2});
  }

  void composed_step(StateVector& psi, double dt, long m, int order) const {
    const double h = dt / static_cast<double>(m);
    if (order == 2) {
      for (long i = 0; i < m; ++i) strang_stage(psi, h);
    } else if (order == 4) {
      const double g1 = 1.0 / (2.0 - std::cbrt(2.0));
      const double g2 = 1.0 - 2.0 * g1;
      for (long i = 0; i < m; ++i) {
        strang_stage(psi, g1 * h);
        strang_stage(psi, g2 * h);
        strang_stage(psi, g1 * h);
      }
    } else {
      throw std::invalid_argument("SplittingStepper: order must be 2 or 4");
    }
  }

 private:
  const EnergyTable* table_;
  std::vector<double> h_;
  double s_;
};

// One verified step of exp(-i [s*H0 + sum_q h_q X_q] dt): the substep count is
// doubled until the halved-step Richardson comparison falls below tol, and the
// finer result is returned. `intensities` are the total per-site transverse
// coefficients (a plain QA step at progress s uses h_q = 1-s).
inline StateVector evolve_step(const StateVector& psi, const EnergyTable& table,
                               std::span<const double> intensities, double s, double delta_t,
                               double tol = 1e-8, int order = 4, long* m_hint = nullptr,
                               long m_budget = 4096) {
  check_normalized(psi, 1e-6);
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("evolve_step: s must be in [0, 1]");
  SplittingStepper stepper(table, intensities, s);
  long m = (m_hint && *m_hint > 0) ? *m_hint : 1;
  StateVector coarse = psi;
  stepper.composed_step(coarse, delta_t, m, order);
  while (true) {
    StateVector fine = psi;
    stepper.composed_step(fine, delta_t, 2 * m, order);
    const double est = distance(coarse, fine);
    if (est < tol) {
      if (m_hint) {
        const double shrink = (order == 4) ? 24.0 : 6.0;
        *m_hint = (m > 1 && est < tol / shrink) ? m / 2 : m;
      }
      return fine;
    }
    m *= 2;
    if (m > m_budget)
      throw std::runtime_error("evolve_step: tolerance not reached within substep budget");
    coarse = std::move(fine);
  }
}

namespace detail {

struct RunRecorder {
  const EnergyTable* table;
  std::optional<SectorClassifier> classifier;
  Trajectory traj;

  explicit RunRecorder(const IsingModel& model, const EnergyTable& t) : table(&t) {
    if (model.kind == ModelKind::tri || model.kind == ModelKind::sq)
      classifier.emplace(model);
  }

  void record(const StateVector& psi, long step, double t, double s,
              std::span<const double> intensities) {
    TrajectoryRecord r;
    r.step = step;
    r.t = t;
    r.s = s;
    r.norm = psi.norm();
    StateVector tmp = psi;
    if (std::abs(r.norm - 1.0) > 1e-12) {
      tmp.normalize();
    }
    r.energy_h0 = expectation_diagonal(tmp, table->span());
    r.energy_hs = s * r.energy_h0 + expectation_transverse(tmp, intensities);
    if (classifier) {
      r.has_sector = true;
      const SectorDistribution d = sector_distribution(tmp, *classifier);
      r.sector_p = {d.p(0), d.p(2), d.p(4)};
      r.sector_invalid = 1.0 - (d.p(0) + d.p(2) + d.p(4));
    }
    traj.records.push_back(r);
  }
};

// shared stepping engine: verified evolve_step at the start, at every
// recheck_interval steps and whenever the schedule switches segments;
// the accepted substep count is reused in between
class SteppedEvolver {
 public:
  SteppedEvolver(const EnergyTable& table, const AnnealConfig& cfg)
      : table_(&table), cfg_(&cfg), stepper_(table, std::vector<double>{}, 0.0) {}

  void step(StateVector& psi, double s, std::span<const double> h, bool force_verify) {
    if (force_verify || steps_since_check_ >= cfg_->recheck_interval) {
      psi = evolve_step(psi, *table_, h, s, cfg_->delta_t, cfg_->step_tol, cfg_->step_order, &m_);
      steps_since_check_ = 0;
    } else {
      stepper_.set_field(h, s);
      stepper_.composed_step(psi, cfg_->delta_t, m_, cfg_->step_order);
      ++steps_since_check_;
    }
  }

 private:
  const EnergyTable* table_;
  const AnnealConfig* cfg_;
  SplittingStepper stepper_;
  long m_ = 1;
  long steps_since_check_ = 0;
};

}  // namespace detail

// Real-time QA from |Psi-> under H(s) = s*H0 + (1-s) sum_q X_q, with the
// progress s = t/T swept 0 -> 1 in N = 1/delta_s uniform increments (step k
// evolves under s_k = k*delta_s, so the final step acts at s = 1).
inline Trajectory qa_run(const IsingModel& model, const AnnealConfig& cfg) {
  const EnergyTable table = energy_table(model);
  const long n_steps = cfg.steps();
  StateVector psi = StateVector::minus_state(model.n_sites);
  detail::RunRecorder rec(model, table);
  detail::SteppedEvolver evolver(table, cfg);
  std::vector<double> h(static_cast<std::size_t>(model.n_sites), 1.0);
  rec.record(psi, 0, 0.0, 0.0, h);
  for (long k = 1; k <= n_steps; ++k) {
    const double s = static_cast<double>(k) * cfg.delta_s;
    std::fill(h.begin(), h.end(), 1.0 - s);
    evolver.step(psi, s, h, k == 1);
    if (k % cfg.record_every == 0 || k == n_steps)
      rec.record(psi, k, static_cast<double>(k) * cfg.delta_t, s, h);
  }
  return std::move(rec.traj);
}

struct SweepConfig {
  double h_max = 2.0;
  double s_max = 0.8;
  enum class Axis { columns, rows };
  Axis edge_axis = Axis::columns;  // virtual edges parallel to the expected defect lines
  int edge_count = 4;

  void validate() const {
    // h_max = 1 collapses every special segment to zero length (plain QA)
    if (!(h_max >= 1.0)) throw std::invalid_argument("SweepConfig: h_max must be at least 1");
    if (!(s_max > 0.0 && s_max < 1.0)) throw std::invalid_argument("SweepConfig: s_max in (0,1)");
    if (edge_count < 1) throw std::invalid_argument("SweepConfig: edge_count must be positive");
  }
};

// Field intensity on the gluing line of edge j: starts at h_max when the edge
// finished its creation ramp at s = s_start and falls with slope -4 h_max/s_max.
inline double sqa_gluing_intensity(const SweepConfig& sw, double s_start, double s) {
  return sw.h_max - (4.0 * sw.h_max / sw.s_max) * (s - s_start);
}

// Where the gluing line of an edge started at s_start rejoins the ambient 1-s.
inline double sqa_rejoin_s(const SweepConfig& sw, double s_start) {
  const double slope = 4.0 * sw.h_max / sw.s_max;
  return (s_start * slope + sw.h_max - 1.0) / (slope - 1.0);
}

// Step-indexed SQA schedule. Phases per edge j = 1..E: (creation) the edge
// ramps from ambient to h_max while s pauses — skipped for edge 1, which is
// created at h_max at s = 0; (gluing) the edge follows its linear schedule
// while s advances; (qa) all sites ambient until s = j*s_max/E. After the
// last edge, plain QA continues to s = 1. Creation blocks take as many steps
// as the corresponding gluing segment and are counted in T_sweeping.
class SqaSchedule {
 public:
  enum class Phase { creation, gluing, qa };

  struct Segment {
    Phase phase = Phase::qa;
    int edge = 0;       // 1-based; 0 for plain qa
    long n_steps = 0;
    long k_start = 0;   // advancing-step counter at segment start
    double s_start = 0; // s at segment start
  };

  SqaSchedule(const IsingModel& model, const AnnealConfig& cfg, const SweepConfig& sweep)
      : model_(model), cfg_(cfg), sweep_(sweep) {
    sweep_.validate();
    const long n = cfg.steps();
    const int E = sweep_.edge_count;
    long k_cursor = 0;
    for (int j = 1; j <= E; ++j) {
      const double s_start = (j - 1) * sweep_.s_max / E;
      const long k_start = std::lround(s_start / cfg.delta_s);
      const long k_rejoin = std::lround(sqa_rejoin_s(sweep_, s_start) / cfg.delta_s);
      const long glue_steps = std::max<long>(0, k_rejoin - k_start);
      if (j > 1 && glue_steps > 0)
        segments_.push_back({Phase::creation, j, glue_steps, k_start, s_start});
      if (glue_steps > 0)
        segments_.push_back({Phase::gluing, j, glue_steps, k_start, s_start});
      const long k_end = std::lround(j * sweep_.s_max / (E * cfg.delta_s));
      if (k_end > k_rejoin)
        segments_.push_back({Phase::qa, j, k_end - k_rejoin, k_rejoin,
                             static_cast<double>(k_rejoin) * cfg.delta_s});
      k_cursor = k_end;
    }
    if (n > k_cursor)
      segments_.push_back({Phase::qa, 0, n - k_cursor, k_cursor,
                           static_cast<double>(k_cursor) * cfg.delta_s});
    total_steps_ = 0;
    for (const Segment& seg : segments_) total_steps_ += seg.n_steps;
  }

  const std::vector<Segment>& segments() const { return segments_; }
  long total_steps() const { return total_steps_; }
  double total_time() const { return static_cast<double>(total_steps_) * cfg_.delta_t; }

  bool on_edge(int site, int edge) const {
    if (edge < 1) return false;
    const int coord = (sweep_.edge_axis == SweepConfig::Axis::columns) ? model_.site_x(site)
                                                                       : model_.site_y(site);
    return coord == edge - 1;
  }

  // total transverse coefficient of `site` within a segment
  double intensity(int site, const Segment& seg, long step_in_segment, double s) const {
    if (seg.phase == Phase::creation) {
      if (on_edge(site, seg.edge)) {
        const double ambient = 1.0 - seg.s_start;
        const double f = static_cast<double>(step_in_segment + 1) / static_cast<double>(seg.n_steps);
        return ambient + (sweep_.h_max - ambient) * f;
      }
      return 1.0 - seg.s_start;
    }
    if (seg.phase == Phase::gluing && on_edge(site, seg.edge))
      return sqa_gluing_intensity(sweep_, seg.s_start, s);
    return 1.0 - s;
  }

  static std::string phase_name(const Segment& seg) {
    switch (seg.phase) {
      case Phase::creation: return "creation-edge-" + std::to_string(seg.edge);
      case Phase::gluing: return "gluing-edge-" + std::to_string(seg.edge);
      case Phase::qa: return "qa";
    }
    return "?";
  }

 private:
  IsingModel model_;
  AnnealConfig cfg_;
  SweepConfig sweep_;
  std::vector<Segment> segments_;
  long total_steps_ = 0;
};

// SQA: QA augmented with the sweeping virtual-edge schedule. Wall-clock time
// advances every step; s advances only outside creation blocks, so the total
// time is T_evo + T_sweeping.
inline Trajectory sqa_run(const IsingModel& model, const AnnealConfig& cfg, const SweepConfig& sweep) {
  const EnergyTable table = energy_table(model);
  const SqaSchedule schedule(model, cfg, sweep);
  StateVector psi = StateVector::minus_state(model.n_sites);
  detail::RunRecorder rec(model, table);
  detail::SteppedEvolver evolver(table, cfg);
  std::vector<double> h(static_cast<std::size_t>(model.n_sites), 1.0);
  rec.record(psi, 0, 0.0, 0.0, h);

  long wall_step = 0;
  long k_advance = 0;  // advancing-step counter (s = k_advance * delta_s)
  for (const auto& seg : schedule.segments()) {
    rec.traj.phases.push_back({wall_step, SqaSchedule::phase_name(seg)});
    for (long i = 0; i < seg.n_steps; ++i) {
      double s;
      if (seg.phase == SqaSchedule::Phase::creation) {
        s = seg.s_start;
      } else {
        ++k_advance;
        s = static_cast<double>(k_advance) * cfg.delta_s;
      }
      for (int q = 0; q < model.n_sites; ++q) h[q] = schedule.intensity(q, seg, i, s);
      evolver.step(psi, s, h, i == 0);
      ++wall_step;
      if (wall_step % cfg.record_every == 0)
        rec.record(psi, wall_step, static_cast<double>(wall_step) * cfg.delta_t, s, h);
    }
  }
  const double s_final = static_cast<double>(k_advance) * cfg.delta_s;
  std::fill(h.begin(), h.end(), 1.0 - s_final);
  if (rec.traj.records.back().step != wall_step)
    rec.record(psi, wall_step, static_cast<double>(wall_step) * cfg.delta_t, s_final, h);
  return std::move(rec.traj);
}

}  // namespace sectorlab
