#pragma once

#include <cstdint>
#include <vector>

#include "coperc/common.hpp"

namespace coperc {

struct ScenarioConfig {
  double scene_width = 400.0;   // m
  double scene_height = 400.0;  // m
  double grid_size = 10.0;      // m
  int n_vehicles = 100;
  int n_cavs = 20;
  double r_sens = 50.0;  // m
  double r_req = 75.0;   // m
  double r_comm = 100.0; // m
  double cycle_duration = 0.1;  // s
  double points_per_frame = 5600.0;
  double speed_min = 0.0;    // m/s
  double speed_max = 16.67;  // m/s
  double tx_power_dbm = 23.0;
  double compute_flops = 1e12;
  double lane_width = 3.5;  // m
  bool occlusion = false;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument on the first violated invariant.
  void validate() const;
};

struct VehicleState {
  int id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  bool is_cav = false;
  double tx_power_dbm = 23.0;
  double compute_flops = 1e12;
  // Incremented on every respawn; a CAV with a new epoch counts as a fresh
  // arrival for re-formation triggering.
  int epoch = 0;
};

/// Axis-aligned tiling of the scene into square grids.
///
/// Grid id g maps to (ix, iy) = (g / ny, g % ny) and its center is
/// origin + ((ix + 0.5), (iy + 0.5)) * grid_size.
class GridWorld {
 public:
  GridWorld(double width, double height, double grid_size);
  explicit GridWorld(const ScenarioConfig& cfg)
      : GridWorld(cfg.scene_width, cfg.scene_height, cfg.grid_size) {}

  int size() const { return static_cast<int>(centers_.cols()); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double grid_size() const { return grid_size_; }
  double width() const { return nx_ * grid_size_; }
  double height() const { return ny_ * grid_size_; }

  Vec2 center(int g) const { return centers_.col(g); }
  const Eigen::Matrix2Xd& centers() const { return centers_; }

  // Grid containing point p, or -1 outside the scene.
  int locate(const Vec2& p) const;
  bool contains(const Vec2& p) const;

  // { g : |c_g - p| <= radius }, ascending.
  GridSet within(const Vec2& p, double radius) const;

 private:
  int nx_ = 0;
  int ny_ = 0;
  double grid_size_ = 0.0;
  Eigen::Matrix2Xd centers_;
};

GridSet sensing_region(const VehicleState& vehicle, const GridWorld& grids, double radius);

GridSet cluster_requirement_region(std::span<const VehicleState> members,
                                   const GridWorld& grids, double r_req);

/// Per-CAV raw density over the whole grid. Truncated inverse square in
/// grid-center distance, normalized so the frame carries points_per_frame
/// points; zero outside the sensing region.
///
/// `others` is only consulted when cfg.occlusion is set: grids whose line of
/// sight crosses a cell occupied by another vehicle are zeroed after
/// normalization.
Eigen::VectorXd generate_density(const VehicleState& vehicle, const GridWorld& grids,
                                 const ScenarioConfig& cfg,
                                 std::span<const VehicleState> others = {});

/// Immutable per-cycle view consumed by every other module. CAVs are
/// vehicles[0 .. n_cavs) and their ids equal their row in `rho`.
struct WorldSnapshot {
  int cycle = 0;
  double time = 0.0;
  std::vector<VehicleState> vehicles;
  int n_cavs = 0;
  DensityMatrix rho;
  std::vector<GridSet> sens;  // per CAV
  std::vector<GridSet> req;   // per CAV
  double r_sens = 0.0;
  double r_req = 0.0;
  double r_comm = 0.0;
  double cycle_duration = 0.1;

  std::span<const VehicleState> cavs() const {
    return std::span<const VehicleState>(vehicles).first(static_cast<std::size_t>(n_cavs));
  }
  int n_grids() const { return static_cast<int>(rho.cols()); }
};

WorldSnapshot make_snapshot(std::vector<VehicleState> vehicles, const GridWorld& grids,
                            const ScenarioConfig& cfg, int cycle = 0);

/// Fleet on a two-road orthogonal intersection centered in the scene, two
/// lanes per direction. CAVs are the first cfg.n_cavs ids.
std::vector<VehicleState> spawn_fleet(const ScenarioConfig& cfg, Rng& rng);

/// Euler step; vehicles leaving the scene respawn at the entry of a random
/// approach lane with a freshly drawn speed.
void step_mobility(std::vector<VehicleState>& vehicles, double dt, const ScenarioConfig& cfg,
                   Rng& rng);

}  // namespace coperc
