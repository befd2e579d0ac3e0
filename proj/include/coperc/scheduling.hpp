#pragma once

#include <functional>
#include <map>
#include <vector>

#include "coperc/channel.hpp"
#include "coperc/coalition.hpp"
#include "coperc/perception.hpp"
#include "coperc/world.hpp"

namespace coperc {

enum class UpdateMode { kSequential, kSynchronous };

// kEqualSplit: disjoint per-leader blocks, sum of budgets <= K.
// kSpatialReuse: every leader may use all K; a subchannel counts as idle
// when no other cluster uses it within communication range.
enum class BudgetRule { kEqualSplit, kSpatialReuse };

struct SchedulerConfig {
  int max_game_iterations = 10;
  UpdateMode update_mode = UpdateMode::kSequential;
  BudgetRule budget_rule = BudgetRule::kEqualSplit;

  void validate() const;
};

// One leader's uploads; every entry has receiver == leader.
using Strategy = std::vector<Upload>;

// Strategies indexed like partition.coalitions.
using Profile = std::vector<Strategy>;

Schedule merge_profile(const Profile& profile);

/// Subchannel pools per coalition. Leaders of multi-member coalitions split
/// K evenly, the remainder going to the lowest leader ids, each owning a
/// contiguous block. Singleton coalitions get nothing. Under spatial reuse
/// every multi-member coalition gets the whole band.
std::vector<std::vector<int>> assign_subchannels(const Partition& partition, int n_subchannels,
                                                 BudgetRule rule = BudgetRule::kEqualSplit);

/// Read-only view of one scheduling game.
struct GameContext {
  const WorldSnapshot& world;
  const Partition& partition;
  const ChannelState& channel;
  Curve curve;
  std::vector<std::vector<int>> pools;  // per coalition
  std::vector<GridSet> cluster_req;     // per coalition, union of member regions
  // > 0: a pool subchannel is busy for a leader when another cluster's
  // sender or receiver within this distance already uses it.
  double occupancy_radius = 0.0;

  GameContext(const WorldSnapshot& world, const Partition& partition, const ChannelState& channel,
              const Curve& curve);
  GameContext(const WorldSnapshot& world, const Partition& partition, const ChannelState& channel,
              const Curve& curve, std::vector<std::vector<int>> pools);

  int n_players() const { return static_cast<int>(partition.coalitions.size()); }
  int leader(int player) const { return partition.coalitions[static_cast<std::size_t>(player)].leader; }
};

// Fused densities under a profile (leader-only fusion).
DensityMatrix profile_density(const Profile& profile, const GameContext& ctx);

/// U_h: late-fusion utility summed over the coalition's requirement region.
double leader_utility(int player, const Profile& profile, const GameContext& ctx);

/// Phi: late-fusion utility summed over every grid.
double potential(const Profile& profile, const GameContext& ctx);

// Profile with `player`'s strategy replaced.
Profile with_strategy(Profile profile, int player, Strategy strategy);

struct PpsStats {
  int starved_members = 0;   // positive score, no subchannel left
  int deadline_drops = 0;    // members dropped to meet the cycle deadline
};

/// Perception-priority greedy best response of one leader against the
/// other leaders' strategies in `profile`.
Strategy pps_best_response(int player, const Profile& profile, const GameContext& ctx,
                           PpsStats* stats = nullptr);

using BestResponse = std::function<Strategy(int player, const Profile& profile, const GameContext& ctx)>;

/// Exhaustive best response for tiny instances. Enumerates every member to
/// subchannel assignment from the leader's pool and every subset of each
/// member's relevant grids, subject to the cycle deadline. Throws
/// std::invalid_argument when the enumeration would exceed `max_evaluations`.
Strategy exact_best_response_oracle(int player, const Profile& profile, const GameContext& ctx,
                                    double max_evaluations = 5e7);

struct PdpgResult {
  Profile profile;
  Schedule schedule;
  std::vector<double> potential_trace;  // initial value, then one entry per leader update
  int rounds = 0;
  bool converged = false;
  PpsStats stats;
  int deadline_drops = 0;  // post-hoc drops in the merged schedule
};

/// Round-based potential game. A leader adopts the response only when it
/// strictly raises its own utility, so sequential updates never lower Phi.
PdpgResult run_pdpg(const GameContext& ctx, const SchedulerConfig& cfg,
                    const BestResponse& respond = {});

}  // namespace coperc
