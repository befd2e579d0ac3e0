#pragma once

#include "coperc/channel.hpp"
#include "coperc/perception.hpp"
#include "coperc/world.hpp"

namespace coperc {

// No cooperation: nothing is transmitted.
Schedule baseline_nc(const WorldSnapshot& world);

/// Random conflict-free links. Draws K * |CAV| random (sender, receiver,
/// subchannel) triples among CAV pairs within communication range; a triple
/// is accepted when the link set stays conflict-free, every accepted link
/// keeps SINR >= sinr_min and every receiver meets the cycle deadline. An
/// accepted sender uploads its whole sensing region.
Schedule baseline_rs(const WorldSnapshot& world, const ChannelState& channel, Rng& rng);

/// Greedy maximum marginal utility: repeatedly adds the feasible link whose
/// upload (all of the sender's unsaturated sensed grids) raises the
/// late-fused system utility the most. Ties go to the smallest
/// (sender, receiver, subchannel).
Schedule baseline_mug(const WorldSnapshot& world, const ChannelState& channel, const Curve& curve);

/// Conflict rule for the centralized baselines: a pair gets at most one
/// subchannel, and no vehicle both transmits and receives on the same
/// subchannel (which covers the reverse-link half-duplex rule).
bool conflicts(const Link& candidate, const Schedule& schedule);

}  // namespace coperc
