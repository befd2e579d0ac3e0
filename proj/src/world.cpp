#include "coperc/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coperc {

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("scenario: " + msg); };
  if (!(grid_size > 0.0)) fail("grid_size must be positive");
  if (!(r_sens > 0.0)) fail("r_sens must be positive");
  if (r_req < r_sens) fail("r_req must be >= r_sens");
  if (n_vehicles < 0 || n_cavs < 0) fail("vehicle counts must be non-negative");
  if (n_cavs > n_vehicles) fail("n_cavs must not exceed n_vehicles");
  if (!(scene_width > 0.0) || !(scene_height > 0.0)) fail("scene extent must be positive");
  auto divisible = [&](double extent) {
    double q = extent / grid_size;
    return std::abs(q - std::round(q)) < 1e-9;
  };
  if (!divisible(scene_width) || !divisible(scene_height))
    fail("scene extent must be divisible by grid_size");
  if (!(cycle_duration > 0.0)) fail("cycle_duration must be positive");
  if (points_per_frame < 0.0) fail("points_per_frame must be non-negative");
  if (speed_min < 0.0 || speed_max < speed_min) fail("invalid speed range");
}

GridWorld::GridWorld(double width, double height, double grid_size) : grid_size_(grid_size) {
  if (!(grid_size > 0.0)) throw std::invalid_argument("grid_size must be positive");
  nx_ = static_cast<int>(std::lround(width / grid_size));
  ny_ = static_cast<int>(std::lround(height / grid_size));
  centers_.resize(2, static_cast<Eigen::Index>(nx_) * ny_);
  for (int ix = 0; ix < nx_; ++ix) {
    for (int iy = 0; iy < ny_; ++iy) {
      centers_.col(ix * ny_ + iy) << (ix + 0.5) * grid_size, (iy + 0.5) * grid_size;
    }
  }
}

bool GridWorld::contains(const Vec2& p) const {
  return p.x() >= 0.0 && p.y() >= 0.0 && p.x() < width() && p.y() < height();
}

int GridWorld::locate(const Vec2& p) const {
  if (!contains(p)) return -1;
  int ix = std::min(nx_ - 1, static_cast<int>(p.x() / grid_size_));
  int iy = std::min(ny_ - 1, static_cast<int>(p.y() / grid_size_));
  return ix * ny_ + iy;
}

GridSet GridWorld::within(const Vec2& p, double radius) const {
  const Eigen::RowVectorXd dist = (centers_.colwise() - p).colwise().norm();
  GridSet out;
  for (Eigen::Index g = 0; g < dist.size(); ++g) {
    if (dist[g] <= radius) out.push_back(static_cast<int>(g));
  }
  return out;
}

GridSet sensing_region(const VehicleState& vehicle, const GridWorld& grids, double radius) {
  return grids.within(vehicle.position, radius);
}

GridSet cluster_requirement_region(std::span<const VehicleState> members, const GridWorld& grids,
                                   double r_req) {
  GridSet out;
  for (const auto& m : members) out = set_union(out, grids.within(m.position, r_req));
  return out;
}

namespace {

bool line_of_sight_blocked(const Vec2& from, int target, const GridWorld& grids,
                           const std::vector<char>& occupied) {
  const Vec2 to = grids.center(target);
  const int own = grids.locate(from);
  const double len = (to - from).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(4.0 * len / grids.grid_size())));
  for (int s = 1; s < steps; ++s) {
    int cell = grids.locate(from + (to - from) * (static_cast<double>(s) / steps));
    if (cell < 0 || cell == own || cell == target) continue;
    if (occupied[static_cast<std::size_t>(cell)]) return true;
  }
  return false;
}

}  // namespace

Eigen::VectorXd generate_density(const VehicleState& vehicle, const GridWorld& grids,
                                 const ScenarioConfig& cfg, std::span<const VehicleState> others) {
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(grids.size());
  if (!vehicle.is_cav) return rho;
  const GridSet region = sensing_region(vehicle, grids, cfg.r_sens);
  if (region.empty()) return rho;

  const double floor_dist = grids.grid_size() / 2.0;
  double weight_sum = 0.0;
  for (int g : region) {
    const double d = std::max((grids.center(g) - vehicle.position).norm(), floor_dist);
    rho[g] = 1.0 / (d * d);
    weight_sum += rho[g];
  }
  const double cell_area = grids.grid_size() * grids.grid_size();
  rho *= cfg.points_per_frame / (cell_area * weight_sum);

  if (cfg.occlusion) {
    std::vector<char> occupied(static_cast<std::size_t>(grids.size()), 0);
    for (const auto& o : others) {
      if (o.id == vehicle.id) continue;
      int cell = grids.locate(o.position);
      if (cell >= 0) occupied[static_cast<std::size_t>(cell)] = 1;
    }
    for (int g : region) {
      if (line_of_sight_blocked(vehicle.position, g, grids, occupied)) rho[g] = 0.0;
    }
  }
  return rho;
}

WorldSnapshot make_snapshot(std::vector<VehicleState> vehicles, const GridWorld& grids,
                            const ScenarioConfig& cfg, int cycle) {
  WorldSnapshot snap;
  snap.cycle = cycle;
  snap.time = cycle * cfg.cycle_duration;
  snap.r_sens = cfg.r_sens;
  snap.r_req = cfg.r_req;
  snap.r_comm = cfg.r_comm;
  snap.cycle_duration = cfg.cycle_duration;
  snap.vehicles = std::move(vehicles);
  snap.n_cavs = 0;
  while (snap.n_cavs < static_cast<int>(snap.vehicles.size()) &&
         snap.vehicles[static_cast<std::size_t>(snap.n_cavs)].is_cav) {
    ++snap.n_cavs;
  }
  for (int i = 0; i < static_cast<int>(snap.vehicles.size()); ++i) {
    const auto& v = snap.vehicles[static_cast<std::size_t>(i)];
    if (v.id != i) throw std::invalid_argument("vehicle ids must equal their index");
    if (v.is_cav && i >= snap.n_cavs) throw std::invalid_argument("CAVs must precede background vehicles");
  }

  snap.rho = DensityMatrix::Zero(snap.n_cavs, grids.size());
  snap.sens.reserve(static_cast<std::size_t>(snap.n_cavs));
  snap.req.reserve(static_cast<std::size_t>(snap.n_cavs));
  for (const auto& v : snap.cavs()) {
    snap.rho.row(v.id) = generate_density(v, grids, cfg, snap.vehicles).transpose();
    snap.sens.push_back(sensing_region(v, grids, cfg.r_sens));
    snap.req.push_back(sensing_region(v, grids, cfg.r_req));
  }
  return snap;
}

namespace {

struct Lane {
  Vec2 entry;
  Vec2 heading;
};

// Right-hand traffic, two lanes per direction on each road.
std::array<Lane, 8> make_lanes(const ScenarioConfig& cfg) {
  const double cx = cfg.scene_width / 2.0;
  const double cy = cfg.scene_height / 2.0;
  const double inner = cfg.lane_width / 2.0;
  const double outer = 1.5 * cfg.lane_width;
  return {{
      {{0.0, cy - inner}, {1.0, 0.0}},
      {{0.0, cy - outer}, {1.0, 0.0}},
      {{cfg.scene_width, cy + inner}, {-1.0, 0.0}},
      {{cfg.scene_width, cy + outer}, {-1.0, 0.0}},
      {{cx + inner, 0.0}, {0.0, 1.0}},
      {{cx + outer, 0.0}, {0.0, 1.0}},
      {{cx - inner, cfg.scene_height}, {0.0, -1.0}},
      {{cx - outer, cfg.scene_height}, {0.0, -1.0}},
  }};
}

bool inside_scene(const Vec2& p, const ScenarioConfig& cfg) {
  return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= cfg.scene_width && p.y() <= cfg.scene_height;
}

void place_on_lane(VehicleState& v, const Lane& lane, double along, double speed) {
  v.position = lane.entry + lane.heading * along;
  v.velocity = lane.heading * speed;
}

}  // namespace

std::vector<VehicleState> spawn_fleet(const ScenarioConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto lanes = make_lanes(cfg);
  std::uniform_int_distribution<int> pick_lane(0, static_cast<int>(lanes.size()) - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> speed(cfg.speed_min, cfg.speed_max);

  std::vector<VehicleState> fleet(static_cast<std::size_t>(cfg.n_vehicles));
  for (int i = 0; i < cfg.n_vehicles; ++i) {
    auto& v = fleet[static_cast<std::size_t>(i)];
    v.id = i;
    v.is_cav = i < cfg.n_cavs;
    v.tx_power_dbm = cfg.tx_power_dbm;
    v.compute_flops = cfg.compute_flops;
    const Lane& lane = lanes[static_cast<std::size_t>(pick_lane(rng))];
    const double length = lane.heading.x() != 0.0 ? cfg.scene_width : cfg.scene_height;
    const double along = unit(rng) * length;
    place_on_lane(v, lane, along, speed(rng));
  }
  return fleet;
}

void step_mobility(std::vector<VehicleState>& vehicles, double dt, const ScenarioConfig& cfg,
                   Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_mobility: dt must be positive");
  const auto lanes = make_lanes(cfg);
  std::uniform_int_distribution<int> pick_lane(0, static_cast<int>(lanes.size()) - 1);
  std::uniform_real_distribution<double> speed(cfg.speed_min, cfg.speed_max);

  for (auto& v : vehicles) {
    v.position += v.velocity * dt;
    if (inside_scene(v.position, cfg)) continue;
    const Lane& lane = lanes[static_cast<std::size_t>(pick_lane(rng))];
    place_on_lane(v, lane, 0.0, speed(rng));
    ++v.epoch;
  }
}

}  // namespace coperc
