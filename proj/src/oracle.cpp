#include <algorithm>
#include <functional>
#include <limits>
#include <stdexcept>

#include "coperc/scheduling.hpp"

namespace coperc {

namespace {

struct MemberOptions {
  int member;
  GridSet grids;  // relevant grids, bit b of a mask selects grids[b]
};

// Enumerates injective member -> subchannel assignments; -1 means idle.
void for_each_assignment(std::size_t n_members, const std::vector<int>& pool,
                         const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> assign(n_members, -1);
  std::vector<char> taken(pool.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n_members) {
      visit(assign);
      return;
    }
    assign[i] = -1;
    rec(i + 1);
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (taken[k]) continue;
      taken[k] = 1;
      assign[i] = static_cast<int>(k);
      rec(i + 1);
      taken[k] = 0;
    }
    assign[i] = -1;
  };
  rec(0);
}

}  // namespace

Strategy exact_best_response_oracle(int player, const Profile& profile, const GameContext& ctx,
                                    double max_evaluations) {
  const auto& coalition = ctx.partition.coalitions[static_cast<std::size_t>(player)];
  const int h = coalition.leader;
  const auto& pool = ctx.pools[static_cast<std::size_t>(player)];
  const auto& rho = ctx.world.rho;
  const auto& req = ctx.cluster_req[static_cast<std::size_t>(player)];

  Profile others = profile;
  others[static_cast<std::size_t>(player)].clear();
  const Schedule others_schedule = merge_profile(others);
  const DensityMatrix others_fused = fuse_uploads(others_schedule, rho);
  const Eigen::VectorXd field = late_fusion_field(others_fused, ctx.curve);

  std::vector<MemberOptions> members;
  GridSet touched;
  for (int m : coalition.members) {
    if (m == h) continue;
    MemberOptions mo{m, {}};
    for (int g : set_intersection(ctx.world.sens[static_cast<std::size_t>(m)], req)) {
      if (rho(m, g) > 0.0) mo.grids.push_back(g);
    }
    if (mo.grids.size() > 20) throw std::invalid_argument("oracle: too many relevant grids");
    touched = set_union(touched, mo.grids);
    members.push_back(std::move(mo));
  }
  if (members.size() > 8) throw std::invalid_argument("oracle: too many members");
  const std::size_t nm = members.size();
  const std::size_t nt = touched.size();

  // Best competing utility on each touched grid, from everyone except h.
  std::vector<double> rival(nt, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    const int g = touched[t];
    for (Eigen::Index k = 0; k < others_fused.rows(); ++k) {
      if (k == h) continue;
      rival[t] = std::max(rival[t], ctx.curve(others_fused(k, g)));
    }
  }
  // table[t][uploaders] = F_g when exactly `uploaders` (bitmask over
  // members) send grid touched[t].
  std::vector<std::vector<double>> table(nt, std::vector<double>(std::size_t{1} << nm));
  std::vector<std::vector<int>> bit_of(nm);  // member grid bit -> touched index
  for (std::size_t i = 0; i < nm; ++i) {
    for (int g : members[i].grids) {
      bit_of[i].push_back(static_cast<int>(std::lower_bound(touched.begin(), touched.end(), g) - touched.begin()));
    }
  }
  for (std::size_t t = 0; t < nt; ++t) {
    const int g = touched[t];
    for (std::size_t mask = 0; mask < (std::size_t{1} << nm); ++mask) {
      double fused = rho(h, g);
      for (std::size_t i = 0; i < nm; ++i) {
        if (mask & (std::size_t{1} << i)) fused += rho(members[i].member, g);
      }
      table[t][mask] = std::max(rival[t], ctx.curve(fused));
    }
  }
  double untouched = 0.0;
  for (int g : req) {
    if (!std::binary_search(touched.begin(), touched.end(), g)) untouched += field[g];
  }

  // Size check before enumerating.
  double total = 0.0;
  for_each_assignment(nm, pool, [&](const std::vector<int>& assign) {
    double combos = 1.0;
    for (std::size_t i = 0; i < nm; ++i) {
      if (assign[i] >= 0) combos *= static_cast<double>((std::size_t{1} << members[i].grids.size()) - 1);
    }
    total += combos;
  });
  if (total > max_evaluations) throw std::invalid_argument("oracle: instance too large for enumeration");

  // Per (member, pool slot) rates against the other leaders' transmitters.
  std::vector<std::vector<double>> rate(nm, std::vector<double>(pool.size(), 0.0));
  for (std::size_t i = 0; i < nm; ++i) {
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const auto tx = others_schedule.transmitters_on(pool[k]);
      rate[i][k] = link_rate(Link{members[i].member, h, pool[k]}, tx, ctx.channel);
    }
  }

  auto utility_of = [&](const std::vector<std::size_t>& masks) {
    std::vector<std::size_t> uploaders(nt, 0);
    for (std::size_t i = 0; i < nm; ++i) {
      for (std::size_t b = 0; b < members[i].grids.size(); ++b) {
        if (masks[i] & (std::size_t{1} << b)) uploaders[static_cast<std::size_t>(bit_of[i][b])] |= std::size_t{1} << i;
      }
    }
    double u = untouched;
    for (std::size_t t = 0; t < nt; ++t) u += table[t][uploaders[t]];
    return u;
  };

  const double deadline = ctx.world.cycle_duration;
  const double flops = ctx.channel.compute_flops[h];
  auto feasible = [&](const std::vector<int>& assign, const std::vector<std::size_t>& masks) {
    double slowest = 0.0;
    double inbound = 0.0;
    for (std::size_t i = 0; i < nm; ++i) {
      if (assign[i] < 0) continue;
      double bits = 0.0;
      for (std::size_t b = 0; b < members[i].grids.size(); ++b) {
        if (masks[i] & (std::size_t{1} << b)) bits += rho(members[i].member, members[i].grids[b]) * ctx.channel.cfg.c0;
      }
      inbound += bits;
      const double r = rate[i][static_cast<std::size_t>(assign[i])];
      if (bits > 0.0) slowest = std::max(slowest, r > 0.0 ? bits / r : std::numeric_limits<double>::infinity());
    }
    return slowest + inbound * ctx.channel.cfg.flops_per_bit / flops <= deadline;
  };

  std::vector<std::size_t> none(nm, 0);
  double best = utility_of(none);
  std::vector<int> best_assign(nm, -1);
  std::vector<std::size_t> best_masks = none;

  for_each_assignment(nm, pool, [&](const std::vector<int>& assign) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < nm; ++i) {
      if (assign[i] >= 0 && !members[i].grids.empty()) active.push_back(i);
    }
    if (active.empty()) return;
    std::vector<std::size_t> masks(nm, 0);
    for (std::size_t i : active) masks[i] = 1;
    // Odometer over the non-empty masks of the active members.
    while (true) {
      if (feasible(assign, masks)) {
        const double u = utility_of(masks);
        if (u > best + 1e-12) {
          best = u;
          best_assign = assign;
          best_masks = masks;
        }
      }
      std::size_t a = 0;
      for (; a < active.size(); ++a) {
        const std::size_t i = active[a];
        const std::size_t limit = std::size_t{1} << members[i].grids.size();
        if (++masks[i] < limit) break;
        masks[i] = 1;
      }
      if (a == active.size()) break;
    }
  });

  Strategy out;
  for (std::size_t i = 0; i < nm; ++i) {
    if (best_assign[i] < 0) continue;
    for (std::size_t b = 0; b < members[i].grids.size(); ++b) {
      if (best_masks[i] & (std::size_t{1} << b)) {
        out.push_back({members[i].member, h, members[i].grids[b], pool[static_cast<std::size_t>(best_assign[i])]});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace coperc
