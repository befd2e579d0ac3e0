#include "coperc/scheduling.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <stdexcept>

namespace coperc {

void SchedulerConfig::validate() const {
  if (max_game_iterations < 1) throw std::invalid_argument("scheduler: max_game_iterations must be >= 1");
}

Schedule merge_profile(const Profile& profile) {
  std::vector<Upload> all;
  for (const auto& s : profile) all.insert(all.end(), s.begin(), s.end());
  return Schedule(std::move(all));
}

std::vector<std::vector<int>> assign_subchannels(const Partition& partition, int n_subchannels,
                                                 BudgetRule rule) {
  std::vector<std::vector<int>> pools(partition.coalitions.size());
  std::vector<int> players;
  for (std::size_t c = 0; c < partition.coalitions.size(); ++c) {
    if (partition.coalitions[c].members.size() > 1) players.push_back(static_cast<int>(c));
  }
  if (players.empty()) return pools;
  if (rule == BudgetRule::kSpatialReuse) {
    std::vector<int> band(static_cast<std::size_t>(n_subchannels));
    std::iota(band.begin(), band.end(), 0);
    for (int p : players) pools[static_cast<std::size_t>(p)] = band;
    return pools;
  }
  std::sort(players.begin(), players.end(), [&](int a, int b) {
    return partition.coalitions[static_cast<std::size_t>(a)].leader <
           partition.coalitions[static_cast<std::size_t>(b)].leader;
  });
  const int n = static_cast<int>(players.size());
  const int base = n_subchannels / n;
  const int extra = n_subchannels % n;
  int next = 0;
  for (int rank = 0; rank < n; ++rank) {
    const int budget = base + (rank < extra ? 1 : 0);
    auto& pool = pools[static_cast<std::size_t>(players[static_cast<std::size_t>(rank)])];
    for (int b = 0; b < budget; ++b) pool.push_back(next++);
  }
  return pools;
}

GameContext::GameContext(const WorldSnapshot& world, const Partition& partition,
                         const ChannelState& channel, const Curve& curve)
    : GameContext(world, partition, channel, curve,
                  assign_subchannels(partition, channel.cfg.n_subchannels)) {}

GameContext::GameContext(const WorldSnapshot& world, const Partition& partition,
                         const ChannelState& channel, const Curve& curve,
                         std::vector<std::vector<int>> pools_in)
    : world(world), partition(partition), channel(channel), curve(curve), pools(std::move(pools_in)) {
  if (pools.size() != partition.coalitions.size())
    throw std::invalid_argument("GameContext: one subchannel pool per coalition required");
  for (const auto& c : partition.coalitions) {
    GridSet region;
    for (int m : c.members) region = set_union(region, world.req[static_cast<std::size_t>(m)]);
    cluster_req.push_back(std::move(region));
  }
}

DensityMatrix profile_density(const Profile& profile, const GameContext& ctx) {
  return fuse_uploads(merge_profile(profile), ctx.world.rho);
}

double leader_utility(int player, const Profile& profile, const GameContext& ctx) {
  const Eigen::VectorXd field = late_fusion_field(profile_density(profile, ctx), ctx.curve);
  return region_utility(ctx.cluster_req[static_cast<std::size_t>(player)], field);
}

double potential(const Profile& profile, const GameContext& ctx) {
  return late_fusion_field(profile_density(profile, ctx), ctx.curve).sum();
}

Profile with_strategy(Profile profile, int player, Strategy strategy) {
  std::sort(strategy.begin(), strategy.end());
  profile[static_cast<std::size_t>(player)] = std::move(strategy);
  return profile;
}

namespace {

struct ScoredMember {
  int member;
  double score;
  GridSet grids;
};

// Members of `player` with their relevant candidate grids and perception
// score against the leader's fused density in `others`.
std::vector<ScoredMember> score_members(int player, const DensityMatrix& others_fused,
                                        const GameContext& ctx) {
  const auto& coalition = ctx.partition.coalitions[static_cast<std::size_t>(player)];
  const int h = coalition.leader;
  const auto& rho = ctx.world.rho;

  GridSet cand;
  for (int g : ctx.cluster_req[static_cast<std::size_t>(player)]) {
    if (others_fused.col(g).maxCoeff() < ctx.curve.rho_th) cand.push_back(g);
  }

  std::vector<ScoredMember> out;
  for (int m : coalition.members) {
    if (m == h) continue;
    ScoredMember sm{m, 0.0, {}};
    for (int g : set_intersection(ctx.world.sens[static_cast<std::size_t>(m)], cand)) {
      if (!(rho(m, g) > 0.0)) continue;
      sm.grids.push_back(g);
      sm.score += ctx.curve(rho(m, g) + others_fused(h, g)) - ctx.curve(others_fused(h, g));
    }
    out.push_back(std::move(sm));
  }
  std::stable_sort(out.begin(), out.end(), [](const ScoredMember& a, const ScoredMember& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.member < b.member;
  });
  return out;
}

Profile without(const Profile& profile, int player) {
  Profile out = profile;
  out[static_cast<std::size_t>(player)].clear();
  return out;
}

}  // namespace

Strategy pps_best_response(int player, const Profile& profile, const GameContext& ctx, PpsStats* stats) {
  const Profile others = without(profile, player);
  const DensityMatrix others_fused = profile_density(others, ctx);
  const int h = ctx.leader(player);
  std::vector<int> pool = ctx.pools[static_cast<std::size_t>(player)];
  if (ctx.occupancy_radius > 0.0) {
    const auto cavs = ctx.world.cavs();
    const Vec2& xh = cavs[static_cast<std::size_t>(h)].position;
    auto near = [&](int v) { return (cavs[static_cast<std::size_t>(v)].position - xh).norm() <= ctx.occupancy_radius; };
    std::vector<int> busy;
    for (const auto& s : others) {
      for (const auto& u : s) {
        if (near(u.sender) || near(u.receiver)) busy.push_back(u.subchannel);
      }
    }
    std::erase_if(pool, [&](int k) { return std::find(busy.begin(), busy.end(), k) != busy.end(); });
  }

  const auto& req = ctx.cluster_req[static_cast<std::size_t>(player)];
  const bool any_candidate = std::any_of(req.begin(), req.end(), [&](int g) {
    return others_fused.col(g).maxCoeff() < ctx.curve.rho_th;
  });
  if (!any_candidate) return {};

  const auto ranked = score_members(player, others_fused, ctx);
  std::vector<std::pair<int, Strategy>> scheduled;  // in rank order
  std::size_t used = 0;
  for (const auto& sm : ranked) {
    if (!(sm.score > 0.0)) continue;
    if (used >= pool.size()) {
      if (stats) ++stats->starved_members;
      continue;
    }
    Strategy uploads;
    for (int g : sm.grids) uploads.push_back({sm.member, h, g, pool[used]});
    scheduled.emplace_back(sm.member, std::move(uploads));
    ++used;
  }

  const Schedule base = merge_profile(others);
  auto assemble = [&] {
    Strategy s;
    for (const auto& [m, ups] : scheduled) s.insert(s.end(), ups.begin(), ups.end());
    std::sort(s.begin(), s.end());
    return s;
  };
  Strategy strategy = assemble();
  while (!scheduled.empty()) {
    Schedule joint = base;
    joint.add(strategy);
    if (check_deadline(h, joint, ctx.world.rho, ctx.channel, ctx.world.cycle_duration)) break;
    scheduled.pop_back();
    if (stats) ++stats->deadline_drops;
    strategy = assemble();
  }
  return strategy;
}

PdpgResult run_pdpg(const GameContext& ctx, const SchedulerConfig& cfg, const BestResponse& respond_in) {
  cfg.validate();
  PdpgResult res;
  const int n = ctx.n_players();
  res.profile.assign(static_cast<std::size_t>(n), {});
  res.potential_trace.push_back(potential(res.profile, ctx));

  BestResponse respond = respond_in;
  if (!respond) {
    respond = [&res](int player, const Profile& profile, const GameContext& c) {
      return pps_best_response(player, profile, c, &res.stats);
    };
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ctx.leader(a) < ctx.leader(b); });

  for (int round = 1; round <= cfg.max_game_iterations; ++round) {
    bool changed = false;
    if (cfg.update_mode == UpdateMode::kSequential) {
      for (int p : order) {
        Strategy proposal = respond(p, res.profile, ctx);
        std::sort(proposal.begin(), proposal.end());
        if (proposal != res.profile[static_cast<std::size_t>(p)]) {
          Profile candidate = with_strategy(res.profile, p, proposal);
          if (leader_utility(p, candidate, ctx) > leader_utility(p, res.profile, ctx) + 1e-12) {
            res.profile = std::move(candidate);
            changed = true;
          }
        }
        res.potential_trace.push_back(potential(res.profile, ctx));
      }
    } else {
      const Profile frozen = res.profile;
      for (int p : order) {
        Strategy proposal = respond(p, frozen, ctx);
        std::sort(proposal.begin(), proposal.end());
        if (proposal == frozen[static_cast<std::size_t>(p)]) continue;
        const Profile candidate = with_strategy(frozen, p, proposal);
        if (leader_utility(p, candidate, ctx) > leader_utility(p, frozen, ctx) + 1e-12) {
          res.profile[static_cast<std::size_t>(p)] = std::move(proposal);
          changed = true;
        }
      }
      res.potential_trace.push_back(potential(res.profile, ctx));
    }
    res.rounds = round;
    if (!changed) {
      res.converged = true;
      break;
    }
  }

  // Post-hoc deadline enforcement on the merged schedule: drop the member
  // whose removal costs its leader the least.
  for (int p : order) {
    auto& strat = res.profile[static_cast<std::size_t>(p)];
    const int h = ctx.leader(p);
    while (!strat.empty()) {
      const Schedule joint = merge_profile(res.profile);
      if (check_deadline(h, joint, ctx.world.rho, ctx.channel, ctx.world.cycle_duration)) break;
      const double full = leader_utility(p, res.profile, ctx);
      int victim = -1;
      double least = 0.0;
      std::vector<int> senders;
      for (const auto& u : strat) senders.push_back(u.sender);
      senders.erase(std::unique(senders.begin(), senders.end()), senders.end());
      for (int m : senders) {
        Strategy reduced;
        std::copy_if(strat.begin(), strat.end(), std::back_inserter(reduced),
                     [m](const Upload& u) { return u.sender != m; });
        const double loss = full - leader_utility(p, with_strategy(res.profile, p, reduced), ctx);
        if (victim < 0 || loss < least) {
          victim = m;
          least = loss;
        }
      }
      std::erase_if(strat, [victim](const Upload& u) { return u.sender == victim; });
      ++res.deadline_drops;
    }
  }

  res.schedule = merge_profile(res.profile);
  return res;
}

}  // namespace coperc
