#include "coperc/baselines.hpp"

#include <algorithm>
#include <set>

namespace coperc {

Schedule baseline_nc(const WorldSnapshot&) { return {}; }

bool conflicts(const Link& candidate, const Schedule& schedule) {
  if (candidate.sender == candidate.receiver) return true;
  for (const auto& l : schedule.links()) {
    if (l.sender == candidate.sender && l.receiver == candidate.receiver) return true;
    if (l.subchannel != candidate.subchannel) continue;
    if (l.receiver == candidate.sender || l.sender == candidate.receiver) return true;
  }
  return false;
}

namespace {

// SINR floor for every link on the subchannel and deadline for every
// receiver listening on it.
bool admissible(const Schedule& schedule, int subchannel, const WorldSnapshot& world,
                const ChannelState& channel) {
  const auto tx = schedule.transmitters_on(subchannel);
  std::set<int> receivers;
  for (const auto& l : schedule.links()) {
    if (l.subchannel != subchannel) continue;
    if (link_sinr_db(l, schedule, channel) < channel.cfg.sinr_min_db) return false;
    receivers.insert(l.receiver);
  }
  for (int r : receivers) {
    if (!check_deadline(r, schedule, world.rho, channel, world.cycle_duration)) return false;
  }
  return true;
}

bool in_range(int i, int j, const WorldSnapshot& world) {
  const auto cavs = world.cavs();
  return (cavs[static_cast<std::size_t>(i)].position - cavs[static_cast<std::size_t>(j)].position).norm() <=
         world.r_comm;
}

}  // namespace

Schedule baseline_rs(const WorldSnapshot& world, const ChannelState& channel, Rng& rng) {
  Schedule schedule;
  const int n = world.n_cavs;
  const int k_total = channel.cfg.n_subchannels;
  if (n < 2 || k_total <= 0) return schedule;

  std::uniform_int_distribution<int> pick_sender(0, n - 1);
  std::uniform_int_distribution<int> pick_other(0, n - 2);
  std::uniform_int_distribution<int> pick_subchannel(0, k_total - 1);
  const int attempts = k_total * n;
  for (int a = 0; a < attempts; ++a) {
    const int i = pick_sender(rng);
    int j = pick_other(rng);
    if (j >= i) ++j;
    const int k = pick_subchannel(rng);
    const Link link{i, j, k};
    if (!in_range(i, j, world) || conflicts(link, schedule)) continue;

    Schedule trial = schedule;
    for (int g : world.sens[static_cast<std::size_t>(i)]) {
      if (world.rho(i, g) > 0.0) trial.add(Upload{i, j, g, k});
    }
    if (trial.size() == schedule.size()) continue;
    if (admissible(trial, k, world, channel)) schedule = std::move(trial);
  }
  return schedule;
}

Schedule baseline_mug(const WorldSnapshot& world, const ChannelState& channel, const Curve& curve) {
  Schedule schedule;
  const int n = world.n_cavs;
  const int k_total = channel.cfg.n_subchannels;
  if (n < 2 || k_total <= 0) return schedule;

  // Multiplicity of each grid in the requirement regions: the system
  // utility is sum_g weight_g * F_g.
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(world.n_grids());
  for (const auto& region : world.req) {
    for (int g : region) weight[g] += 1.0;
  }

  struct Candidate {
    double gain;
    int sender;
    int receiver;
    GridSet grids;
  };

  while (true) {
    const DensityMatrix fused = fuse_uploads(schedule, world.rho);
    const Eigen::VectorXd field = late_fusion_field(fused, curve);
    const Eigen::RowVectorXd densest = fused.colwise().maxCoeff();
    const auto links = schedule.links();

    std::vector<Candidate> cands;
    for (int i = 0; i < n; ++i) {
      GridSet grids;
      for (int g : world.sens[static_cast<std::size_t>(i)]) {
        if (world.rho(i, g) > 0.0 && densest[g] < curve.rho_th) grids.push_back(g);
      }
      if (grids.empty()) continue;
      for (int j = 0; j < n; ++j) {
        if (j == i || !in_range(i, j, world)) continue;
        const bool linked = std::any_of(links.begin(), links.end(), [&](const Link& l) {
          return l.sender == i && l.receiver == j;
        });
        if (linked) continue;
        double gain = 0.0;
        for (int g : grids) {
          const double upgraded = curve(fused(j, g) + world.rho(i, g));
          if (upgraded > field[g]) gain += weight[g] * (upgraded - field[g]);
        }
        if (gain > 1e-12) cands.push_back({gain, i, j, grids});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.gain != b.gain) return a.gain > b.gain;
      if (a.sender != b.sender) return a.sender < b.sender;
      return a.receiver < b.receiver;
    });

    bool added = false;
    for (const auto& c : cands) {
      for (int k = 0; k < k_total && !added; ++k) {
        const Link link{c.sender, c.receiver, k};
        if (conflicts(link, schedule)) continue;
        Schedule trial = schedule;
        for (int g : c.grids) trial.add(Upload{c.sender, c.receiver, g, k});
        if (admissible(trial, k, world, channel)) {
          schedule = std::move(trial);
          added = true;
        }
      }
      if (added) break;
    }
    if (!added) break;
  }
  return schedule;
}

}  // namespace coperc
