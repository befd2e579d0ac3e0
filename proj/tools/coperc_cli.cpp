#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coperc/simulation.hpp"

using namespace coperc;

namespace {

SimConfig config_from(const std::string& path) { return path.empty() ? SimConfig{} : load_config(path); }

void apply_mode(SimConfig& cfg, const std::string& mode) {
  if (mode.empty()) return;
  if (mode == "sequential") cfg.scheduler.update_mode = UpdateMode::kSequential;
  else if (mode == "synchronous") cfg.scheduler.update_mode = UpdateMode::kSynchronous;
  else throw std::invalid_argument("--mode must be sequential or synchronous");
}

std::vector<SchedulerKind> parse_schedulers(const std::vector<std::string>& names) {
  std::vector<SchedulerKind> out;
  for (const auto& n : names) {
    if (n == "all") return {SchedulerKind::kNc, SchedulerKind::kRs, SchedulerKind::kMug, SchedulerKind::kOurs};
    out.push_back(parse_scheduler(n));
  }
  return out;
}

void print_curve(const Curve& curve, double rho_max, int steps) {
  std::cout << "rho,f\n" << std::setprecision(10);
  for (int s = 0; s <= steps; ++s) {
    const double rho = rho_max * s / steps;
    std::cout << rho << ',' << curve(rho) << '\n';
  }
}

// Rate of a lone link versus distance, fading and shadowing off.
void print_rate_table(const SimConfig& cfg, double d_min, double d_max, double step) {
  ChannelConfig ch = cfg.channel;
  ch.shadowing = false;
  ch.rayleigh = false;
  std::cout << "distance_m,pathloss_db,snr_db,rate_mbps\n" << std::setprecision(10);
  for (double d = d_min; d <= d_max + 1e-9; d += step) {
    std::vector<VehicleState> pair(2);
    for (int i = 0; i < 2; ++i) {
      pair[i].id = i;
      pair[i].is_cav = true;
      pair[i].tx_power_dbm = cfg.scenario.tx_power_dbm;
      pair[i].compute_flops = cfg.scenario.compute_flops;
    }
    pair[1].position = Vec2(d, 0.0);
    const ChannelState state = ChannelState::build(ch, pair, 0, 0);
    const Link link{0, 1, 0};
    const Schedule lone({Upload{0, 1, 0, 0}});
    std::cout << d << ',' << pathloss_db(d, ch.carrier_ghz) << ',' << link_sinr_db(link, lone, state) << ','
              << link_rate(link, lone, state) / 1e6 << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coalition-based collaborative perception simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> schedulers{"ours"};
  int cycles = 100;
  std::vector<std::uint64_t> seeds;
  std::string mode;
  std::string out_dir = "runs";
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run one seed with one scheduler");
  run->add_option("config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
  run->add_option("--scheduler,-s", schedulers, "ours | nc | rs | mug")->expected(1);
  run->add_option("--cycles,-c", cycles, "Collaboration cycles")->check(CLI::PositiveNumber);
  run->add_option("--seed", seeds, "Run seed")->expected(1)->required();
  run->add_option("--mode", mode, "PDPG update mode: sequential | synchronous");
  run->add_option("--out,-o", out_dir, "Output directory");

  auto* batch = app.add_subcommand("batch", "Run every (seed, scheduler) pair");
  batch->add_option("config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
  batch->add_option("--scheduler,-s", schedulers, "Schedulers, or 'all'")->delimiter(',');
  batch->add_option("--cycles,-c", cycles, "Collaboration cycles")->check(CLI::PositiveNumber);
  batch->add_option("--seeds", seeds, "Run seeds")->delimiter(',')->required();
  batch->add_option("--mode", mode, "PDPG update mode: sequential | synchronous");
  batch->add_option("--out,-o", out_dir, "Output directory");
  batch->add_option("--jobs,-j", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  double rho_max = 10.0;
  int steps = 100;
  auto* curve = app.add_subcommand("curve", "Dump the utility curve as rho,f CSV");
  curve->add_option("config", config_path, "Config file")->check(CLI::ExistingFile);
  curve->add_option("--rho-max", rho_max, "Largest density")->check(CLI::PositiveNumber);
  curve->add_option("--steps", steps, "Samples minus one")->check(CLI::PositiveNumber);

  double d_min = 10.0, d_max = 300.0, d_step = 10.0;
  auto* rate = app.add_subcommand("rate-table", "Dump lone-link rate versus distance as CSV");
  rate->add_option("config", config_path, "Config file")->check(CLI::ExistingFile);
  rate->add_option("--min", d_min, "Smallest distance [m]")->check(CLI::PositiveNumber);
  rate->add_option("--max", d_max, "Largest distance [m]")->check(CLI::PositiveNumber);
  rate->add_option("--step", d_step, "Distance step [m]")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    SimConfig cfg = config_from(config_path);
    apply_mode(cfg, mode);
    if (*curve) {
      print_curve(cfg.curve, rho_max, steps);
      return 0;
    }
    if (*rate) {
      print_rate_table(cfg, d_min, d_max, d_step);
      return 0;
    }
    RunSpec spec;
    spec.config_path = config_path;
    spec.schedulers = parse_schedulers(schedulers);
    spec.cycles = cycles;
    spec.seeds = seeds;
    spec.output_dir = out_dir;
    spec.jobs = jobs;
    return run_batch(spec, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
