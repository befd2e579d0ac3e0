#include "coperc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace coperc {

OverheadBits comm_overhead(const Schedule& schedule, const DensityMatrix& rho, const DensityMatrix& fused,
                           const ChannelConfig& channel, const OverheadConfig& cfg, bool broadcast) {
  OverheadBits bits;
  for (const auto& u : schedule.uploads()) bits.early += rho(u.sender, u.grid) * channel.c0;
  if (broadcast && fused.size() > 0) {
    const auto objects = (fused.array() >= cfg.rho_det).count();
    bits.late = static_cast<double>(objects) * cfg.bytes_per_detection * 8.0;
  }
  return bits;
}

double overhead_mbps(double bits, int cycles, double cycle_duration) {
  if (cycles <= 0) return 0.0;
  return bits / (cycles * cycle_duration) / 1e6;
}

Stat describe(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  const Eigen::Map<const Eigen::ArrayXd> a(xs.data(), static_cast<Eigen::Index>(xs.size()));
  s.mean = a.mean();
  s.std = std::sqrt((a - s.mean).square().mean());
  s.min = a.minCoeff();
  s.max = a.maxCoeff();
  return s;
}

RunSummary aggregate_run(const std::vector<CycleReport>& reports) {
  RunSummary sum;
  sum.cycles = static_cast<int>(reports.size());
  std::map<std::string, std::vector<double>> series;
  for (const auto& r : reports) {
    series["system_utility"].push_back(r.system_utility);
    series["utility_ratio"].push_back(r.utility_ratio);
    series["early_bits"].push_back(r.early_bits);
    series["late_bits"].push_back(r.late_bits);
    series["overhead_mbps"].push_back(r.overhead_mbps);
    series["max_leader_delay"].push_back(r.max_leader_delay);
    series["n_coalitions"].push_back(r.n_coalitions);
    series["formation_rounds"].push_back(r.formation_rounds);
    series["pdpg_rounds"].push_back(r.pdpg_rounds);
    series["n_links"].push_back(r.n_links);
    series["n_uploads"].push_back(r.n_uploads);
    series["reformed"].push_back(r.reformed ? 1.0 : 0.0);

    if (!r.formation_converged) ++sum.formation_failures;
    if (!r.pdpg_converged) ++sum.pdpg_failures;
    sum.schedule_violations += r.schedule_violations;
    sum.deadline_failures += r.deadline_failures;
    for (std::size_t t = 1; t < r.potential_trace.size(); ++t) {
      if (r.potential_trace[t] < r.potential_trace[t - 1] - 1e-9) ++sum.potential_decreases;
    }
  }
  for (const auto& [name, xs] : series) sum.scalars[name] = describe(xs);
  return sum;
}

const std::vector<std::string> kCycleCsvColumns = {
    "cycle",          "system_utility",   "utility_ratio",       "early_bits",
    "late_bits",      "overhead_mbps",    "max_leader_delay",    "n_coalitions",
    "coalition_sizes", "reformed",        "formation_rounds",    "formation_converged",
    "pdpg_rounds",    "pdpg_converged",   "n_links",             "n_uploads",
    "schedule_violations", "deadline_failures", "potential_trace", "cav_utilities"};

namespace {

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? ";" : "") << xs[i];
  return os.str();
}

}  // namespace

void write_cycle_csv(std::ostream& os, const std::vector<CycleReport>& reports) {
  for (std::size_t c = 0; c < kCycleCsvColumns.size(); ++c) os << (c ? "," : "") << kCycleCsvColumns[c];
  os << '\n';
  os << std::setprecision(10);
  for (const auto& r : reports) {
    os << r.cycle << ',' << r.system_utility << ',' << r.utility_ratio << ',' << r.early_bits << ','
       << r.late_bits << ',' << r.overhead_mbps << ',' << r.max_leader_delay << ',' << r.n_coalitions << ','
       << join(r.coalition_sizes) << ',' << int(r.reformed) << ',' << r.formation_rounds << ','
       << int(r.formation_converged) << ',' << r.pdpg_rounds << ',' << int(r.pdpg_converged) << ','
       << r.n_links << ',' << r.n_uploads << ',' << r.schedule_violations << ',' << r.deadline_failures << ','
       << join(r.potential_trace) << ',' << join(r.cav_utilities) << '\n';
  }
}

std::string summary_json(const RunSummary& summary, const std::string& scheduler, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["scheduler"] = scheduler;
  j["seed"] = seed;
  j["cycles"] = summary.cycles;
  auto& scalars = j["scalars"];
  for (const auto& [name, s] : summary.scalars) {
    scalars[name] = {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
  }
  j["formation_failures"] = summary.formation_failures;
  j["pdpg_failures"] = summary.pdpg_failures;
  j["schedule_violations"] = summary.schedule_violations;
  j["deadline_failures"] = summary.deadline_failures;
  j["potential_decreases"] = summary.potential_decreases;
  return j.dump(2) + "\n";
}

}  // namespace coperc
