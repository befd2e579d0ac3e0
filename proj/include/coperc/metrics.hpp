#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "coperc/channel.hpp"

namespace coperc {

struct OverheadConfig {
  double rho_det = 0.5;             // points/m^2 for a grid to count as one detected object
  double bytes_per_detection = 1024.0;
};

struct OverheadBits {
  double early = 0.0;
  double late = 0.0;
  double total() const { return early + late; }
};

/// Early-fusion bits are sum_{i,j,k} s_ijk. When `broadcast` is set, every
/// CAV additionally broadcasts one detection message per grid with fused
/// density >= rho_det.
OverheadBits comm_overhead(const Schedule& schedule, const DensityMatrix& rho,
                           const DensityMatrix& fused, const ChannelConfig& channel,
                           const OverheadConfig& cfg, bool broadcast);

double overhead_mbps(double bits, int cycles, double cycle_duration);

struct CycleReport {
  int cycle = 0;
  double system_utility = 0.0;
  double utility_ratio = 0.0;  // system utility / sum of requirement-region sizes
  std::vector<double> cav_utilities;
  double early_bits = 0.0;
  double late_bits = 0.0;
  double overhead_mbps = 0.0;
  double max_leader_delay = 0.0;
  int n_coalitions = 0;
  std::vector<int> coalition_sizes;
  bool reformed = false;
  int formation_rounds = 0;
  bool formation_converged = true;
  int pdpg_rounds = 0;
  bool pdpg_converged = true;
  std::vector<double> potential_trace;
  int n_links = 0;
  int n_uploads = 0;
  int schedule_violations = 0;
  int deadline_failures = 0;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
};

Stat describe(const std::vector<double>& xs);

struct RunSummary {
  int cycles = 0;
  std::map<std::string, Stat> scalars;
  int formation_failures = 0;  // cycles whose formation hit max_rounds
  int pdpg_failures = 0;
  int schedule_violations = 0;
  int deadline_failures = 0;
  int potential_decreases = 0;  // trace steps that went down
};

RunSummary aggregate_run(const std::vector<CycleReport>& reports);

// Stable column order; the header line documents it.
extern const std::vector<std::string> kCycleCsvColumns;
void write_cycle_csv(std::ostream& os, const std::vector<CycleReport>& reports);

std::string summary_json(const RunSummary& summary, const std::string& scheduler,
                         std::uint64_t seed);

}  // namespace coperc
