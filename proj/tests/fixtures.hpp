#pragma once

// Random instance generators shared by the unit tests and the acceptance
// harness.

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "coperc/simulation.hpp"

namespace fixture {

using namespace coperc;

struct TinySpec {
  int min_clusters = 1;
  int max_clusters = 3;
  int min_members = 1;
  int max_members = 4;  // per cluster, leader included
  int nx = 5;
  int ny = 4;           // nx * ny grids
  int max_subchannels = 4;
  double grid_size = 10.0;
  double r_sens = 15.0;
  double r_req = 20.0;
  double max_density = 2.5;
};

/// One scheduling game on a small grid. The context holds references, so
/// the instance lives on the heap and is never moved.
struct TinyGame {
  WorldSnapshot world;
  Partition partition;
  ChannelState channel;
  Curve curve;
  std::unique_ptr<GameContext> ctx;
};

inline std::unique_ptr<TinyGame> random_game(Rng& rng, const TinySpec& spec = {}) {
  auto game = std::make_unique<TinyGame>();
  std::uniform_int_distribution<int> n_clusters_d(spec.min_clusters, spec.max_clusters);
  std::uniform_int_distribution<int> size_d(spec.min_members, spec.max_members);
  std::uniform_int_distribution<int> k_d(1, spec.max_subchannels);
  std::uniform_real_distribution<double> ux(0.0, spec.nx * spec.grid_size);
  std::uniform_real_distribution<double> uy(0.0, spec.ny * spec.grid_size);
  std::uniform_real_distribution<double> dens(0.0, spec.max_density);
  std::uniform_real_distribution<double> vel(-3.0, 3.0);
  std::bernoulli_distribution sparse(0.25);

  const int n_clusters = n_clusters_d(rng);
  std::vector<int> sizes(static_cast<std::size_t>(n_clusters));
  for (auto& s : sizes) s = size_d(rng);
  const int n = std::accumulate(sizes.begin(), sizes.end(), 0);

  const GridWorld grids(spec.nx * spec.grid_size, spec.ny * spec.grid_size, spec.grid_size);
  auto& w = game->world;
  w.n_cavs = n;
  w.r_sens = spec.r_sens;
  w.r_req = spec.r_req;
  w.r_comm = 100.0;
  w.cycle_duration = 0.1;
  w.rho = DensityMatrix::Zero(n, grids.size());
  for (int i = 0; i < n; ++i) {
    VehicleState v;
    v.id = i;
    v.is_cav = true;
    v.position = Vec2(ux(rng), uy(rng));
    v.velocity = Vec2(vel(rng), vel(rng));
    w.vehicles.push_back(v);
    w.sens.push_back(grids.within(v.position, spec.r_sens));
    w.req.push_back(grids.within(v.position, spec.r_req));
    for (int g : w.sens.back()) w.rho(i, g) = sparse(rng) ? 0.0 : dens(rng);
  }

  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::size_t next = 0;
  for (int s : sizes) {
    Coalition c;
    c.members.assign(ids.begin() + static_cast<long>(next), ids.begin() + static_cast<long>(next + s));
    next += static_cast<std::size_t>(s);
    std::sort(c.members.begin(), c.members.end());
    c.leader = c.members[std::uniform_int_distribution<std::size_t>(0, c.members.size() - 1)(rng)];
    game->partition.coalitions.push_back(c);
  }
  std::sort(game->partition.coalitions.begin(), game->partition.coalitions.end(),
            [](const Coalition& a, const Coalition& b) { return a.members.front() < b.members.front(); });

  ChannelConfig ch;
  ch.n_subchannels = k_d(rng);
  game->channel = ChannelState::build(ch, w.cavs(), rng(), 0);
  game->ctx = std::make_unique<GameContext>(game->world, game->partition, game->channel, game->curve);
  return game;
}

// Random strategy for `player`: each member independently idles or takes a
// distinct pool slot and uploads a random non-empty subset of its relevant
// grids (cluster requirement region within its sensing region).
inline Strategy random_strategy(int player, const GameContext& ctx, Rng& rng) {
  const auto& co = ctx.partition.coalitions[static_cast<std::size_t>(player)];
  std::vector<int> pool = ctx.pools[static_cast<std::size_t>(player)];
  std::shuffle(pool.begin(), pool.end(), rng);
  const auto& req = ctx.cluster_req[static_cast<std::size_t>(player)];
  std::bernoulli_distribution coin(0.5);
  Strategy s;
  std::size_t used = 0;
  for (int m : co.members) {
    if (m == co.leader || used >= pool.size() || !coin(rng)) continue;
    const int k = pool[used++];
    for (int g : set_intersection(ctx.world.sens[static_cast<std::size_t>(m)], req)) {
      if (coin(rng)) s.push_back({m, co.leader, g, k});
    }
  }
  std::sort(s.begin(), s.end());
  return s;
}

inline Profile random_profile(const GameContext& ctx, Rng& rng) {
  Profile p(static_cast<std::size_t>(ctx.n_players()));
  for (int h = 0; h < ctx.n_players(); ++h) p[static_cast<std::size_t>(h)] = random_strategy(h, ctx, rng);
  return p;
}

// Snapshot of the default scenario with `n_cavs` CAVs after `warmup` cycles
// of mobility.
inline WorldSnapshot scenario_world(std::uint64_t seed, int n_cavs, int warmup, GridWorld& grids_out,
                                    ScenarioConfig cfg = {}) {
  cfg.n_cavs = n_cavs;
  cfg.n_vehicles = std::max(cfg.n_vehicles, n_cavs);
  grids_out = GridWorld(cfg);
  Rng rng = make_stream(seed, Stream::kMobility);
  auto vehicles = spawn_fleet(cfg, rng);
  for (int c = 0; c < warmup; ++c) step_mobility(vehicles, cfg.cycle_duration, cfg, rng);
  return make_snapshot(vehicles, grids_out, cfg, warmup);
}

}  // namespace fixture
