#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include "sectorlab/common.hpp"

namespace sectorlab {

struct TrajectoryRecord {
  long step = 0;
  double t = 0.0;
  double s = 0.0;
  double energy_h0 = 0.0;
  double energy_hs = 0.0;
  double norm = 1.0;
  bool has_sector = false;
  std::array<double, 3> sector_p{0.0, 0.0, 0.0};  // N_D = 0, 2, 4
  double sector_invalid = 0.0;
};

struct PhaseAnnotation {
  long step = 0;
  std::string phase;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<PhaseAnnotation> phases;  // SQA schedule segments

  const TrajectoryRecord& back() const { return records.back(); }

  // columns: step, t, s, energy_H0, energy_Hs, norm, sector_p0, sector_p2,
  // sector_p4, sector_invalid; 12 significant digits
  void write_csv(std::ostream& os) const {
    os << "step,t,s,energy_H0,energy_Hs,norm,sector_p0,sector_p2,sector_p4,sector_invalid\n";
    char buf[256];
    for (const auto& r : records) {
      std::snprintf(buf, sizeof buf,
                    "%ld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                    r.step, r.t, r.s, r.energy_h0, r.energy_hs, r.norm,
                    r.sector_p[0], r.sector_p[1], r.sector_p[2], r.sector_invalid);
      os << buf;
    }
  }

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("Trajectory::write_csv: cannot open " + path);
    write_csv(os);
  }
};

// variational trajectories use their own schema
struct VariationalRecord {
  long step = 0;
  double t = 0.0;
  double energy = 0.0;
  double update_norm = 0.0;  // grad_norm (vqe) or thetadot_norm (vqite)
};

struct VariationalTrajectory {
  std::vector<VariationalRecord> records;
  std::string mode;  // "full", "diagonal", "vqe"

  void write_csv(std::ostream& os) const {
    const char* col = (mode == "vqe") ? "grad_norm" : "thetadot_norm";
    os << "step,t,energy," << col << ",mode\n";
    char buf[192];
    for (const auto& r : records) {
      std::snprintf(buf, sizeof buf, "%ld,%.12g,%.12g,%.12g,%s\n", r.step, r.t, r.energy,
                    r.update_norm, mode.c_str());
      os << buf;
    }
  }

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("VariationalTrajectory::write_csv: cannot open " + path);
    write_csv(os);
  }
};

}  // namespace sectorlab
