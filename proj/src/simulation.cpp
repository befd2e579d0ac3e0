#include "coperc/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "coperc/baselines.hpp"

namespace coperc {

std::string to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kOurs: return "ours";
    case SchedulerKind::kNc: return "nc";
    case SchedulerKind::kRs: return "rs";
    case SchedulerKind::kMug: return "mug";
  }
  return "?";
}

SchedulerKind parse_scheduler(const std::string& name) {
  for (auto k : {SchedulerKind::kOurs, SchedulerKind::kNc, SchedulerKind::kRs, SchedulerKind::kMug}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown scheduler '" + name + "' (expected ours, nc, rs or mug)");
}

Simulation::Simulation(const SimConfig& cfg, SchedulerKind kind, std::uint64_t seed)
    : cfg_(cfg),
      kind_(kind),
      seed_(seed),
      grids_(cfg.scenario),
      mobility_rng_(make_stream(seed_, Stream::kMobility)),
      random_schedule_rng_(make_stream(seed_, Stream::kRandomSchedule)) {
  cfg_.validate();
  vehicles_ = spawn_fleet(cfg_.scenario, mobility_rng_);
}

CycleOutcome Simulation::step() {
  WorldSnapshot world = make_snapshot(vehicles_, grids_, cfg_.scenario, cycle_);
  CycleOutcome out = run_cycle(world, grids_, partition_, cfg_, kind_, seed_, random_schedule_rng_);
  if (kind_ == SchedulerKind::kOurs) partition_ = out.partition;
  step_mobility(vehicles_, cfg_.scenario.cycle_duration, cfg_.scenario, mobility_rng_);
  ++cycle_;
  return out;
}

CycleOutcome run_cycle(const WorldSnapshot& world, const GridWorld& grids,
                       const std::optional<Partition>& prev, const SimConfig& cfg,
                       SchedulerKind kind, std::uint64_t seed, Rng& random_schedule_rng) {
  CycleOutcome out;
  CycleReport& rep = out.report;
  rep.cycle = world.cycle;

  const ChannelState channel = ChannelState::build(cfg.channel, world.cavs(), seed, world.cycle);

  DensityMatrix fused;
  if (kind == SchedulerKind::kOurs) {
    if (!prev || should_reform(*prev, world, cfg.coalition)) {
      FormationTrace trace;
      out.partition = form_clusters(world, grids, cfg.curve, cfg.coalition, &trace);
      rep.reformed = true;
      rep.formation_rounds = out.partition.rounds;
      rep.formation_converged = out.partition.converged;
    } else {
      out.partition = *prev;
    }
    GameContext ctx(world, out.partition, channel, cfg.curve,
                    assign_subchannels(out.partition, cfg.channel.n_subchannels, cfg.scheduler.budget_rule));
    if (cfg.scheduler.budget_rule == BudgetRule::kSpatialReuse) ctx.occupancy_radius = world.r_comm;
    PdpgResult game = run_pdpg(ctx, cfg.scheduler);
    out.schedule = std::move(game.schedule);
    rep.pdpg_rounds = game.rounds;
    rep.pdpg_converged = game.converged;
    rep.potential_trace = std::move(game.potential_trace);
    fused = fuse_effective_density(out.schedule, world.rho, out.partition);
    rep.schedule_violations = static_cast<int>(validate_schedule(out.schedule, &out.partition).size());
  } else {
    out.partition = singleton_partition(world.n_cavs);
    switch (kind) {
      case SchedulerKind::kNc: out.schedule = baseline_nc(world); break;
      case SchedulerKind::kRs: out.schedule = baseline_rs(world, channel, random_schedule_rng); break;
      case SchedulerKind::kMug: out.schedule = baseline_mug(world, channel, cfg.curve); break;
      case SchedulerKind::kOurs: break;
    }
    fused = fuse_uploads(out.schedule, world.rho);
    rep.schedule_violations = static_cast<int>(validate_schedule(out.schedule, nullptr).size());
  }
  rep.deadline_failures = static_cast<int>(
      deadline_violations(out.schedule, world.rho, channel, world.cycle_duration).size());

  const Eigen::VectorXd utilities = kind == SchedulerKind::kNc
                                        ? isolated_utilities(world.rho, world.req, cfg.curve)
                                        : cav_utilities(fused, world.req, cfg.curve);
  rep.cav_utilities.assign(utilities.data(), utilities.data() + utilities.size());
  rep.system_utility = utilities.sum();
  double req_total = 0.0;
  for (const auto& r : world.req) req_total += static_cast<double>(r.size());
  rep.utility_ratio = req_total > 0.0 ? rep.system_utility / (cfg.curve.f_max * req_total) : 0.0;

  const OverheadBits bits = comm_overhead(out.schedule, world.rho, fused, cfg.channel, cfg.overhead,
                                          kind != SchedulerKind::kNc);
  rep.early_bits = bits.early;
  rep.late_bits = bits.late;
  rep.overhead_mbps = overhead_mbps(bits.total(), 1, world.cycle_duration);

  const auto links = out.schedule.links();
  rep.n_links = static_cast<int>(links.size());
  rep.n_uploads = static_cast<int>(out.schedule.size());
  std::vector<int> receivers;
  for (const auto& l : links) receivers.push_back(l.receiver);
  std::sort(receivers.begin(), receivers.end());
  receivers.erase(std::unique(receivers.begin(), receivers.end()), receivers.end());
  for (int r : receivers) {
    rep.max_leader_delay = std::max(rep.max_leader_delay, fusion_delay(r, out.schedule, world.rho, channel));
  }

  rep.n_coalitions = static_cast<int>(out.partition.coalitions.size());
  for (const auto& c : out.partition.coalitions) rep.coalition_sizes.push_back(static_cast<int>(c.members.size()));
  return out;
}

RunResult run_simulation(const SimConfig& cfg, SchedulerKind kind, std::uint64_t seed, int cycles) {
  if (cycles < 1) throw std::invalid_argument("cycles must be >= 1");
  Simulation sim(cfg, kind, seed);
  RunResult res;
  for (int c = 0; c < cycles; ++c) res.reports.push_back(sim.step().report);
  res.summary = aggregate_run(res.reports);
  const auto& s = res.summary;
  res.flagged = s.formation_failures > 0 || s.pdpg_failures > 0 || s.schedule_violations > 0 ||
                s.deadline_failures > 0 || s.potential_decreases > 0;
  return res;
}

void RunSpec::validate() const {
  if (schedulers.empty()) throw std::invalid_argument("at least one scheduler required");
  if (seeds.empty()) throw std::invalid_argument("at least one seed required");
  if (cycles < 1) throw std::invalid_argument("cycles must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

std::string run_directory_name(std::uint64_t seed, SchedulerKind kind) {
  return "seed" + std::to_string(seed) + "_" + to_string(kind);
}

int run_batch(const RunSpec& spec, const SimConfig& cfg) {
  spec.validate();
  namespace fs = std::filesystem;
  struct Job {
    std::uint64_t seed;
    SchedulerKind kind;
    RunSummary summary;
    bool flagged = false;
  };
  std::vector<Job> jobs;
  for (auto seed : spec.seeds) {
    for (auto kind : spec.schedulers) jobs.push_back({seed, kind, {}, false});
  }

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      auto& job = jobs[i];
      try {
        const RunResult res = run_simulation(cfg, job.kind, job.seed, spec.cycles);
        const fs::path dir = fs::path(spec.output_dir) / run_directory_name(job.seed, job.kind);
        fs::create_directories(dir);
        std::ofstream csv(dir / "cycles.csv");
        write_cycle_csv(csv, res.reports);
        std::ofstream(dir / "summary.json") << summary_json(res.summary, to_string(job.kind), job.seed);
        job.summary = res.summary;
        job.flagged = res.flagged;
        std::lock_guard lock(log_mutex);
        std::cerr << run_directory_name(job.seed, job.kind) << ": utility "
                  << res.summary.scalars.at("system_utility").mean << (res.flagged ? " [flagged]" : "")
                  << '\n';
      } catch (...) {
        std::lock_guard lock(log_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::min<int>(spec.jobs, static_cast<int>(jobs.size()));
  std::vector<std::thread> threads;
  for (int t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);

  fs::create_directories(spec.output_dir);
  std::ofstream cmp(fs::path(spec.output_dir) / "comparison.csv");
  cmp << "seed,scheduler,utility_mean,utility_std,utility_ratio_mean,overhead_mbps_mean,"
         "max_leader_delay_max,pdpg_rounds_mean,schedule_violations,deadline_failures,flagged\n";
  cmp << std::setprecision(10);
  bool any_flagged = false;
  for (const auto& job : jobs) {
    const auto& s = job.summary.scalars;
    cmp << job.seed << ',' << to_string(job.kind) << ',' << s.at("system_utility").mean << ','
        << s.at("system_utility").std << ',' << s.at("utility_ratio").mean << ','
        << s.at("overhead_mbps").mean << ',' << s.at("max_leader_delay").max << ','
        << s.at("pdpg_rounds").mean << ',' << job.summary.schedule_violations << ','
        << job.summary.deadline_failures << ',' << int(job.flagged) << '\n';
    any_flagged |= job.flagged;
  }
  return any_flagged ? 1 : 0;
}

}  // namespace coperc
