#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coperc/config.hpp"

namespace coperc {

enum class SchedulerKind { kOurs, kNc, kRs, kMug };

std::string to_string(SchedulerKind kind);
SchedulerKind parse_scheduler(const std::string& name);

struct CycleOutcome {
  Partition partition;
  Schedule schedule;
  CycleReport report;
};

/// Mutable state of one seeded run.
class Simulation {
 public:
  Simulation(const SimConfig& cfg, SchedulerKind kind, std::uint64_t seed);

  /// One collaboration cycle: (1) re-form clusters when triggered,
  /// (2) schedule, (3) intra-cluster fusion and delay checks, (4) late
  /// fusion and metrics. Mobility then advances to the next cycle.
  CycleOutcome step();

  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const GridWorld& grids() const { return grids_; }
  const std::optional<Partition>& partition() const { return partition_; }
  int cycle() const { return cycle_; }

 private:
  SimConfig cfg_;
  SchedulerKind kind_;
  std::uint64_t seed_;
  GridWorld grids_;
  Rng mobility_rng_;
  Rng random_schedule_rng_;
  std::vector<VehicleState> vehicles_;
  std::optional<Partition> partition_;
  int cycle_ = 0;
};

CycleOutcome run_cycle(const WorldSnapshot& world, const GridWorld& grids,
                       const std::optional<Partition>& prev, const SimConfig& cfg,
                       SchedulerKind kind, std::uint64_t seed, Rng& random_schedule_rng);

struct RunResult {
  std::vector<CycleReport> reports;
  RunSummary summary;
  bool flagged = false;  // invariant violation or non-convergence seen
};

RunResult run_simulation(const SimConfig& cfg, SchedulerKind kind, std::uint64_t seed, int cycles);

struct RunSpec {
  std::string config_path;  // empty: defaults
  std::vector<SchedulerKind> schedulers{SchedulerKind::kOurs};
  int cycles = 100;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "runs";
  int jobs = 1;

  void validate() const;
};

// "seed<seed>_<scheduler>"
std::string run_directory_name(std::uint64_t seed, SchedulerKind kind);

/// Runs every (seed, scheduler) pair, writing cycles.csv and summary.json per
/// run plus comparison.csv across runs. Returns 0 unless some run was flagged.
int run_batch(const RunSpec& spec, const SimConfig& cfg);

}  // namespace coperc
