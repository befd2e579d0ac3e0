#pragma once

#include <functional>
#include <span>
#include <vector>

#include "coperc/perception.hpp"
#include "coperc/world.hpp"

namespace coperc {

struct CoalitionConfig {
  int n_max = 4;
  double t_stab = 0.5;   // s
  double alpha = 0.7;
  double neighbor_radius = 100.0;  // m, 2 r_sens
  int max_rounds = 50;
  double speed_deviation_threshold = 5.0;  // m/s

  void validate() const;
};

struct Coalition {
  std::vector<int> members;  // ascending CAV ids
  int leader = -1;

  bool operator==(const Coalition&) const = default;
};

struct Partition {
  std::vector<Coalition> coalitions;  // ordered by smallest member id
  double formed_at = 0.0;
  std::vector<int> member_epochs;  // CAV epoch at formation, indexed by id
  std::vector<Vec2> relative_velocities;  // v_i - coalition mean at formation, indexed by id
  int rounds = 0;
  bool converged = true;
  // Set when the plain dynamics revisited a partition and migrations had to
  // raise Phi as well.
  bool guarded = false;

  // Coalition index of a CAV, -1 if absent.
  int coalition_of(int cav) const;
  bool is_leader(int cav) const;
  std::vector<int> leaders() const;
  std::size_t n_cavs() const;

  // Disjoint, covering ids [0, n_cavs), capacity, leader membership.
  bool valid(int n_cavs, int n_max) const;
};

Partition singleton_partition(int n_cavs);

Vec2 mean_position(std::span<const int> members, std::span<const VehicleState> cavs);
Vec2 mean_velocity(std::span<const int> members, std::span<const VehicleState> cavs);

/// V(S) = sum_g [ f(sum_{i in S} rho_ig) - max_{i in S} f(rho_ig) ].
double coalition_value(std::span<const int> members, const DensityMatrix& rho, const Curve& curve);

// x_i + (v_i - mean velocity of `context`) * t_stab.
Vec2 predicted_position(const VehicleState& vehicle, std::span<const int> context,
                        std::span<const VehicleState> cavs, double t_stab);

/// Fraction of the predicted sensing region of `cav` that falls in the
/// requirement region of `target`. The mean velocity is taken over the
/// prospective coalition target + {cav}. Empty predicted region gives 0.
double stability_coefficient(int cav, std::span<const int> target, const WorldSnapshot& world,
                             const GridWorld& grids, double t_stab);

// Immediate early-fusion gain of `cav` joining `target` (cav not in target).
double early_gain(int cav, std::span<const int> target, const WorldSnapshot& world,
                  const Curve& curve);

/// Delta V = beta * early gain. Zero for an empty target.
double marginal_contribution(int cav, std::span<const int> target, const WorldSnapshot& world,
                             const GridWorld& grids, const Curve& curve, const CoalitionConfig& cfg);

int elect_leader(std::span<const int> members, std::span<const VehicleState> cavs, double alpha);

struct FormationTrace {
  std::vector<double> potential;  // Phi after each executed move, first entry initial
  int moves = 0;
  int potential_decreases = 0;
};

using SweepObserver = std::function<void(const Partition&)>;

/// Hedonic-shift formation from singletons. CAVs sweep in ascending id and
/// move to the neighboring coalition with the largest Delta V when it
/// strictly beats the contribution to their current coalition. Delta V does
/// not track Phi, so the plain dynamics can cycle; once a sweep ends in an
/// already visited partition, a migration must also strictly raise Phi,
/// which bounds the remaining moves. Stops on a quiet sweep or after
/// cfg.max_rounds, in which case converged = false.
Partition form_clusters(const WorldSnapshot& world, const GridWorld& grids, const Curve& curve,
                        const CoalitionConfig& cfg, FormationTrace* trace = nullptr,
                        const SweepObserver& on_sweep = {});

// Coalitions considered by `cav` during formation: centroid strictly within
// neighbor_radius, excluding its own.
std::vector<int> neighbor_coalitions(int cav, const Partition& partition,
                                     std::span<const VehicleState> cavs, double neighbor_radius);

// Sum of V(S) over the partition.
double partition_potential(const Partition& partition, const DensityMatrix& rho, const Curve& curve);

/// Topology trigger: CAV arrival/departure, a member drifting farther than
/// neighbor_radius from its centroid, a member whose velocity relative to
/// the coalition mean changed by more than the threshold since formation, or
/// partition age beyond t_stab. Coalitions may span opposite lanes, so the
/// deviation itself can be large in a perfectly stable cluster; only its
/// change counts.
bool should_reform(const Partition& prev, const WorldSnapshot& world, const CoalitionConfig& cfg);

}  // namespace coperc
