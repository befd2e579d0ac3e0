#include "coperc/coalition.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace coperc {

void CoalitionConfig::validate() const {
  if (n_max < 1) throw std::invalid_argument("coalition: n_max must be >= 1");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("coalition: alpha must lie in [0, 1]");
  if (max_rounds < 1) throw std::invalid_argument("coalition: max_rounds must be >= 1");
  if (t_stab < 0.0) throw std::invalid_argument("coalition: t_stab must be >= 0");
}

int Partition::coalition_of(int cav) const {
  for (std::size_t c = 0; c < coalitions.size(); ++c) {
    const auto& m = coalitions[c].members;
    if (std::binary_search(m.begin(), m.end(), cav)) return static_cast<int>(c);
  }
  return -1;
}

bool Partition::is_leader(int cav) const {
  return std::any_of(coalitions.begin(), coalitions.end(),
                     [&](const Coalition& c) { return c.leader == cav; });
}

std::vector<int> Partition::leaders() const {
  std::vector<int> out;
  for (const auto& c : coalitions) out.push_back(c.leader);
  return out;
}

std::size_t Partition::n_cavs() const {
  std::size_t n = 0;
  for (const auto& c : coalitions) n += c.members.size();
  return n;
}

bool Partition::valid(int n_cavs, int n_max) const {
  std::vector<int> seen(static_cast<std::size_t>(n_cavs), 0);
  for (const auto& c : coalitions) {
    if (c.members.empty() || static_cast<int>(c.members.size()) > n_max) return false;
    if (!std::is_sorted(c.members.begin(), c.members.end())) return false;
    if (!std::binary_search(c.members.begin(), c.members.end(), c.leader)) return false;
    for (int m : c.members) {
      if (m < 0 || m >= n_cavs || seen[static_cast<std::size_t>(m)]++) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

Partition singleton_partition(int n_cavs) {
  Partition p;
  for (int i = 0; i < n_cavs; ++i) p.coalitions.push_back({{i}, i});
  return p;
}

Vec2 mean_position(std::span<const int> members, std::span<const VehicleState> cavs) {
  Vec2 sum = Vec2::Zero();
  for (int m : members) sum += cavs[static_cast<std::size_t>(m)].position;
  return members.empty() ? sum : Vec2(sum / static_cast<double>(members.size()));
}

Vec2 mean_velocity(std::span<const int> members, std::span<const VehicleState> cavs) {
  Vec2 sum = Vec2::Zero();
  for (int m : members) sum += cavs[static_cast<std::size_t>(m)].velocity;
  return members.empty() ? sum : Vec2(sum / static_cast<double>(members.size()));
}

double coalition_value(std::span<const int> members, const DensityMatrix& rho, const Curve& curve) {
  if (members.empty()) throw std::invalid_argument("coalition_value: empty coalition");
  DensityMatrix rows(static_cast<Eigen::Index>(members.size()), rho.cols());
  for (std::size_t r = 0; r < members.size(); ++r) rows.row(static_cast<Eigen::Index>(r)) = rho.row(members[r]);
  const Eigen::ArrayXd fused = curve.apply(rows.colwise().sum().transpose().array());
  const Eigen::ArrayXd best_single = curve.apply(rows.array()).colwise().maxCoeff().transpose();
  return (fused - best_single).sum();
}

Vec2 predicted_position(const VehicleState& vehicle, std::span<const int> context,
                        std::span<const VehicleState> cavs, double t_stab) {
  return vehicle.position + (vehicle.velocity - mean_velocity(context, cavs)) * t_stab;
}

namespace {

GridSet requirement_union(std::span<const int> members, const WorldSnapshot& world) {
  GridSet out;
  for (int m : members) out = set_union(out, world.req[static_cast<std::size_t>(m)]);
  return out;
}

std::vector<int> with_member(std::span<const int> members, int cav) {
  std::vector<int> out(members.begin(), members.end());
  out.insert(std::upper_bound(out.begin(), out.end(), cav), cav);
  return out;
}

}  // namespace

double stability_coefficient(int cav, std::span<const int> target, const WorldSnapshot& world,
                             const GridWorld& grids, double t_stab) {
  const auto cavs = world.cavs();
  const auto context = with_member(target, cav);
  const Vec2 pred = predicted_position(cavs[static_cast<std::size_t>(cav)], context, cavs, t_stab);
  const GridSet predicted = grids.within(pred, world.r_sens);
  if (predicted.empty()) return 0.0;
  const GridSet overlap = set_intersection(predicted, requirement_union(target, world));
  return static_cast<double>(overlap.size()) / static_cast<double>(predicted.size());
}

double early_gain(int cav, std::span<const int> target, const WorldSnapshot& world,
                  const Curve& curve) {
  const GridSet region =
      set_intersection(world.sens[static_cast<std::size_t>(cav)], requirement_union(target, world));
  double gain = 0.0;
  for (int g : region) {
    double fused = 0.0;
    for (int m : target) fused += world.rho(m, g);
    gain += curve(fused + world.rho(cav, g)) - curve(fused);
  }
  return gain;
}

double marginal_contribution(int cav, std::span<const int> target, const WorldSnapshot& world,
                             const GridWorld& grids, const Curve& curve, const CoalitionConfig& cfg) {
  if (target.empty()) return 0.0;
  const double beta = stability_coefficient(cav, target, world, grids, cfg.t_stab);
  if (beta <= 0.0) return 0.0;
  return beta * early_gain(cav, target, world, curve);
}

int elect_leader(std::span<const int> members, std::span<const VehicleState> cavs, double alpha) {
  if (members.empty()) throw std::invalid_argument("elect_leader: empty coalition");
  const Vec2 xbar = mean_position(members, cavs);
  const Vec2 vbar = mean_velocity(members, cavs);
  int best = -1;
  double best_score = 0.0;
  for (int m : members) {
    const auto& v = cavs[static_cast<std::size_t>(m)];
    const double score = alpha * (v.position - xbar).norm() + (1.0 - alpha) * (v.velocity - vbar).norm();
    // Members ascend, so ties within rounding keep the lower id.
    if (best < 0 || score < best_score - 1e-12) {
      best = m;
      best_score = score;
    }
  }
  return best;
}

std::vector<int> neighbor_coalitions(int cav, const Partition& partition,
                                     std::span<const VehicleState> cavs, double neighbor_radius) {
  const int own = partition.coalition_of(cav);
  const Vec2& x = cavs[static_cast<std::size_t>(cav)].position;
  std::vector<int> out;
  for (std::size_t c = 0; c < partition.coalitions.size(); ++c) {
    if (static_cast<int>(c) == own) continue;
    const Vec2 centroid = mean_position(partition.coalitions[c].members, cavs);
    if ((centroid - x).norm() < neighbor_radius) out.push_back(static_cast<int>(c));
  }
  return out;
}

double partition_potential(const Partition& partition, const DensityMatrix& rho, const Curve& curve) {
  double total = 0.0;
  for (const auto& c : partition.coalitions) total += coalition_value(c.members, rho, curve);
  return total;
}

namespace {

void sort_coalitions(Partition& p) {
  std::sort(p.coalitions.begin(), p.coalitions.end(),
            [](const Coalition& a, const Coalition& b) { return a.members.front() < b.members.front(); });
}

}  // namespace

Partition form_clusters(const WorldSnapshot& world, const GridWorld& grids, const Curve& curve,
                        const CoalitionConfig& cfg, FormationTrace* trace, const SweepObserver& on_sweep) {
  cfg.validate();
  const auto cavs = world.cavs();
  Partition p = singleton_partition(world.n_cavs);
  p.converged = false;
  if (trace) {
    *trace = FormationTrace{};
    trace->potential.push_back(partition_potential(p, world.rho, curve));
  }

  std::set<std::vector<std::vector<int>>> visited;
  for (int round = 1; round <= cfg.max_rounds; ++round) {
    bool moved = false;
    for (int i = 0; i < world.n_cavs; ++i) {
      const int cur = p.coalition_of(i);
      std::vector<int> rest;
      for (int m : p.coalitions[static_cast<std::size_t>(cur)].members) {
        if (m != i) rest.push_back(m);
      }
      // Staying is worth i's contribution to the rest of its coalition.
      double best = marginal_contribution(i, rest, world, grids, curve, cfg);
      int target = cur;
      for (int c : neighbor_coalitions(i, p, cavs, cfg.neighbor_radius)) {
        const auto& members = p.coalitions[static_cast<std::size_t>(c)].members;
        if (static_cast<int>(members.size()) + 1 > cfg.n_max) continue;
        const double dv = marginal_contribution(i, members, world, grids, curve, cfg);
        if (dv > best * (1.0 + 1e-12) + 1e-15) {
          best = dv;
          target = c;
        }
      }
      if (target == cur || !(best > 0.0)) continue;
      if (p.guarded) {
        const auto& origin = p.coalitions[static_cast<std::size_t>(cur)].members;
        const auto& dest = p.coalitions[static_cast<std::size_t>(target)].members;
        const double before = coalition_value(origin, world.rho, curve) + coalition_value(dest, world.rho, curve);
        const double after = (rest.empty() ? 0.0 : coalition_value(rest, world.rho, curve)) +
                             coalition_value(with_member(dest, i), world.rho, curve);
        if (!(after > before + 1e-12)) continue;
      }

      auto& dest = p.coalitions[static_cast<std::size_t>(target)];
      dest.members = with_member(dest.members, i);
      dest.leader = elect_leader(dest.members, cavs, cfg.alpha);
      auto& origin = p.coalitions[static_cast<std::size_t>(cur)];
      origin.members = rest;
      if (rest.empty()) {
        p.coalitions.erase(p.coalitions.begin() + cur);
      } else {
        origin.leader = elect_leader(origin.members, cavs, cfg.alpha);
      }
      sort_coalitions(p);
      moved = true;
      if (trace) {
        const double phi = partition_potential(p, world.rho, curve);
        if (phi < trace->potential.back() - 1e-12) ++trace->potential_decreases;
        trace->potential.push_back(phi);
        ++trace->moves;
      }
    }
    p.rounds = round;
    if (on_sweep) on_sweep(p);
    if (!moved) {
      p.converged = true;
      break;
    }
    std::vector<std::vector<int>> key;
    for (const auto& c : p.coalitions) key.push_back(c.members);
    if (!visited.insert(std::move(key)).second) p.guarded = true;
  }

  p.formed_at = world.time;
  p.member_epochs.clear();
  for (const auto& v : cavs) p.member_epochs.push_back(v.epoch);
  p.relative_velocities.assign(cavs.size(), Vec2::Zero());
  for (const auto& c : p.coalitions) {
    const Vec2 vbar = mean_velocity(c.members, cavs);
    for (int m : c.members) p.relative_velocities[static_cast<std::size_t>(m)] = cavs[static_cast<std::size_t>(m)].velocity - vbar;
  }
  return p;
}

bool should_reform(const Partition& prev, const WorldSnapshot& world, const CoalitionConfig& cfg) {
  const auto cavs = world.cavs();
  if (prev.member_epochs.size() != cavs.size() || prev.relative_velocities.size() != cavs.size()) return true;
  if (prev.n_cavs() != cavs.size()) return true;
  for (const auto& v : cavs) {
    if (prev.member_epochs[static_cast<std::size_t>(v.id)] != v.epoch) return true;
  }
  for (const auto& c : prev.coalitions) {
    const Vec2 xbar = mean_position(c.members, cavs);
    const Vec2 vbar = mean_velocity(c.members, cavs);
    for (int m : c.members) {
      const auto& v = cavs[static_cast<std::size_t>(m)];
      if ((v.position - xbar).norm() > cfg.neighbor_radius) return true;
      const Vec2 drift = v.velocity - vbar - prev.relative_velocities[static_cast<std::size_t>(m)];
      if (drift.norm() > cfg.speed_deviation_threshold) return true;
    }
  }
  return world.time - prev.formed_at > cfg.t_stab + 1e-9;
}

}  // namespace coperc
