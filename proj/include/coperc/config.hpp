#pragma once

#include <iosfwd>
#include <string>

#include "coperc/channel.hpp"
#include "coperc/coalition.hpp"
#include "coperc/metrics.hpp"
#include "coperc/perception.hpp"
#include "coperc/scheduling.hpp"
#include "coperc/world.hpp"

namespace coperc {

struct SimConfig {
  ScenarioConfig scenario;
  Curve curve;
  ChannelConfig channel;
  CoalitionConfig coalition;
  SchedulerConfig scheduler;
  OverheadConfig overhead;

  void validate() const;
};

/// Flat `key = value` text, one entry per line, `#` starts a comment.
/// Unknown keys and malformed values throw std::invalid_argument naming the
/// line. Keys not present keep their defaults; c0 and neighbor_radius
/// follow grid_size and r_sens unless set explicitly.
SimConfig parse_config(std::istream& in);
SimConfig load_config(const std::string& path);

// Every key with its current value, in parse order.
std::string dump_config(const SimConfig& cfg);

}  // namespace coperc
