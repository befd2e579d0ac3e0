#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coperc/common.hpp"

namespace coperc {

struct Partition;
struct VehicleState;

struct ChannelConfig {
  double carrier_ghz = 5.9;
  double bandwidth_hz = 40e6;
  int n_subchannels = 10;
  double noise_psd_dbm_hz = -174.0;
  double shadowing_sigma_db = 4.0;
  bool shadowing = true;
  bool rayleigh = true;
  // Bits per unit density per grid: grid_size^2 points per unit density,
  // 4 single-precision floats (128 bits) per point.
  double c0 = 10.0 * 10.0 * 128.0;
  double flops_per_bit = 100.0;
  double sinr_min_db = 0.0;  // link admission threshold for the centralized baselines

  double subchannel_bandwidth() const { return bandwidth_hz / n_subchannels; }
  void validate() const;
};

/// x_{i,j,g}^k = 1: `sender` uploads grid `grid` to `receiver` on `subchannel`.
struct Upload {
  int sender = 0;
  int receiver = 0;
  int grid = 0;
  int subchannel = 0;
  auto operator<=>(const Upload&) const = default;
};

/// l_{i,j}^k = 1.
struct Link {
  int sender = 0;
  int receiver = 0;
  int subchannel = 0;
  auto operator<=>(const Link&) const = default;
};

/// Sparse decision tensor. Uploads are kept sorted and unique.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<Upload> uploads);

  void add(const Upload& u);
  void add(const std::vector<Upload>& us);
  // Drops every upload carried on the given link.
  void remove_link(const Link& link);

  bool empty() const { return uploads_.empty(); }
  std::size_t size() const { return uploads_.size(); }
  const std::vector<Upload>& uploads() const { return uploads_; }

  // Active links, ascending.
  std::vector<Link> links() const;
  // Distinct senders with at least one upload on subchannel k.
  std::vector<int> transmitters_on(int subchannel) const;
  // Distinct inbound links of a receiver.
  std::vector<Link> inbound(int receiver) const;

  bool operator==(const Schedule&) const = default;

 private:
  std::vector<Upload> uploads_;
};

// 32.4 + 21 log10(d) + 20 log10(f_c[GHz]); d floored at 1 m.
double pathloss_db(double distance, double carrier_ghz);

// noise_psd + 10 log10(B) for one subchannel.
double noise_power_dbm(const ChannelConfig& cfg);

/// Per-cycle link gains h_{i,j}^k among CAVs (linear power ratio).
///
/// Pathloss is symmetric. Shadowing is drawn per unordered pair and cycle,
/// Rayleigh power fading per ordered pair, subchannel and cycle. Every draw
/// is a pure function of (seed, cycle, i, j, k).
class ChannelRealization {
 public:
  ChannelRealization() = default;
  ChannelRealization(const ChannelConfig& cfg, std::span<const VehicleState> cavs,
                     std::uint64_t seed, int cycle);

  int n_nodes() const { return n_; }
  int n_subchannels() const { return k_; }
  double gain(int sender, int receiver, int subchannel) const {
    return gains_[index(sender, receiver, subchannel)];
  }
  double& gain(int sender, int receiver, int subchannel) {
    return gains_[index(sender, receiver, subchannel)];
  }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(k_) +
           static_cast<std::size_t>(k);
  }
  int n_ = 0;
  int k_ = 0;
  std::vector<double> gains_;
};

/// Everything the rate and delay models need for one cycle.
struct ChannelState {
  ChannelConfig cfg;
  ChannelRealization gains;
  Eigen::VectorXd tx_power_mw;    // per CAV
  Eigen::VectorXd compute_flops;  // per CAV
  double noise_mw = 0.0;

  static ChannelState build(const ChannelConfig& cfg, std::span<const VehicleState> cavs,
                            std::uint64_t seed, int cycle);
};

/// Shannon rate in bit/s. Interference sums, once per transmitter, every
/// other vehicle transmitting on the same subchannel anywhere in the
/// schedule; the receiver's own transmissions are excluded.
double link_rate(const Link& link, const Schedule& schedule, const ChannelState& channel);

// Rate with an explicit interferer set (senders other than link.sender and
// link.receiver are counted).
double link_rate(const Link& link, std::span<const int> transmitters, const ChannelState& channel);

double link_sinr_db(const Link& link, const Schedule& schedule, const ChannelState& channel);

enum class ViolationKind { kHalfDuplex, kMultiSubchannel, kNonMemberUpload, kNonLeaderReceiver, kSelfLink };

struct Violation {
  ViolationKind kind;
  int sender = 0;
  int receiver = 0;
  int subchannel = 0;
};

std::string to_string(ViolationKind kind);

/// Reports every violated constraint instance. Structural checks (member to
/// own leader) only run when a partition is given; the centralized
/// baselines have none.
std::vector<Violation> validate_schedule(const Schedule& schedule, const Partition* partition);

// s_{i,j}^k in bits.
double link_volume_bits(const Link& link, const Schedule& schedule, const DensityMatrix& rho,
                        const ChannelConfig& cfg);

double transmission_delay(const Link& link, const Schedule& schedule, const DensityMatrix& rho,
                          const ChannelState& channel);

double computation_delay(int receiver, const Schedule& schedule, const DensityMatrix& rho,
                         const ChannelState& channel);

// Slowest inbound transmission plus fusion compute time.
double fusion_delay(int receiver, const Schedule& schedule, const DensityMatrix& rho,
                    const ChannelState& channel);

bool check_deadline(int receiver, const Schedule& schedule, const DensityMatrix& rho,
                    const ChannelState& channel, double cycle_duration);

// Receivers whose deadline fails.
std::vector<int> deadline_violations(const Schedule& schedule, const DensityMatrix& rho,
                                     const ChannelState& channel, double cycle_duration);

}  // namespace coperc
