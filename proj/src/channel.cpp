#include "coperc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "coperc/coalition.hpp"
#include "coperc/world.hpp"

namespace coperc {

void ChannelConfig::validate() const {
  if (n_subchannels < 1) throw std::invalid_argument("channel: n_subchannels must be >= 1");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("channel: bandwidth must be positive");
  if (!(carrier_ghz > 0.0)) throw std::invalid_argument("channel: carrier must be positive");
  if (c0 < 0.0 || flops_per_bit < 0.0) throw std::invalid_argument("channel: c0 and n_bit must be >= 0");
  if (shadowing_sigma_db < 0.0) throw std::invalid_argument("channel: shadowing sigma must be >= 0");
}

Schedule::Schedule(std::vector<Upload> uploads) : uploads_(std::move(uploads)) {
  std::sort(uploads_.begin(), uploads_.end());
  uploads_.erase(std::unique(uploads_.begin(), uploads_.end()), uploads_.end());
}

void Schedule::add(const Upload& u) {
  auto it = std::lower_bound(uploads_.begin(), uploads_.end(), u);
  if (it == uploads_.end() || *it != u) uploads_.insert(it, u);
}

void Schedule::add(const std::vector<Upload>& us) {
  uploads_.insert(uploads_.end(), us.begin(), us.end());
  std::sort(uploads_.begin(), uploads_.end());
  uploads_.erase(std::unique(uploads_.begin(), uploads_.end()), uploads_.end());
}

void Schedule::remove_link(const Link& link) {
  std::erase_if(uploads_, [&](const Upload& u) {
    return u.sender == link.sender && u.receiver == link.receiver && u.subchannel == link.subchannel;
  });
}

std::vector<Link> Schedule::links() const {
  std::vector<Link> out;
  for (const auto& u : uploads_) {
    Link l{u.sender, u.receiver, u.subchannel};
    if (out.empty() || out.back() != l) out.push_back(l);
  }
  // Uploads sort by (sender, receiver, grid, subchannel), so links of one
  // pair on different subchannels can interleave.
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> Schedule::transmitters_on(int subchannel) const {
  std::vector<int> out;
  for (const auto& u : uploads_) {
    if (u.subchannel == subchannel && (out.empty() || out.back() != u.sender)) out.push_back(u.sender);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Link> Schedule::inbound(int receiver) const {
  std::vector<Link> out;
  for (const auto& l : links()) {
    if (l.receiver == receiver) out.push_back(l);
  }
  return out;
}

double pathloss_db(double distance, double carrier_ghz) {
  const double d = std::max(distance, 1.0);
  return 32.4 + 21.0 * std::log10(d) + 20.0 * std::log10(carrier_ghz);
}

double noise_power_dbm(const ChannelConfig& cfg) {
  return cfg.noise_psd_dbm_hz + 10.0 * std::log10(cfg.subchannel_bandwidth());
}

ChannelRealization::ChannelRealization(const ChannelConfig& cfg, std::span<const VehicleState> cavs,
                                       std::uint64_t seed, int cycle)
    : n_(static_cast<int>(cavs.size())), k_(cfg.n_subchannels) {
  gains_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) * static_cast<std::size_t>(k_), 0.0);
  constexpr std::uint64_t kShadowTag = 0x5348;
  constexpr std::uint64_t kFadingTag = 0x4641;
  const auto cyc = static_cast<std::uint64_t>(cycle);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i == j) continue;
      const double d = (cavs[static_cast<std::size_t>(i)].position - cavs[static_cast<std::size_t>(j)].position).norm();
      double loss_db = pathloss_db(d, cfg.carrier_ghz);
      if (cfg.shadowing && cfg.shadowing_sigma_db > 0.0) {
        const auto lo = static_cast<std::uint64_t>(std::min(i, j));
        const auto hi = static_cast<std::uint64_t>(std::max(i, j));
        // Box-Muller
        const double u1 = hashed_uniform({seed, cyc, lo, hi, kShadowTag, 0});
        const double u2 = hashed_uniform({seed, cyc, lo, hi, kShadowTag, 1});
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        loss_db += cfg.shadowing_sigma_db * z;
      }
      const double large_scale = db_to_linear(-loss_db);
      for (int k = 0; k < k_; ++k) {
        double fading = 1.0;
        if (cfg.rayleigh) {
          const double u = hashed_uniform({seed, cyc, static_cast<std::uint64_t>(i),
                                           static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k),
                                           kFadingTag});
          fading = -std::log(u);  // |h|^2 ~ Exp(1)
        }
        gain(i, j, k) = large_scale * fading;
      }
    }
  }
}

ChannelState ChannelState::build(const ChannelConfig& cfg, std::span<const VehicleState> cavs,
                                 std::uint64_t seed, int cycle) {
  cfg.validate();
  ChannelState st;
  st.cfg = cfg;
  st.gains = ChannelRealization(cfg, cavs, seed, cycle);
  const auto n = static_cast<Eigen::Index>(cavs.size());
  st.tx_power_mw.resize(n);
  st.compute_flops.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    st.tx_power_mw[i] = db_to_linear(cavs[static_cast<std::size_t>(i)].tx_power_dbm);
    st.compute_flops[i] = cavs[static_cast<std::size_t>(i)].compute_flops;
  }
  st.noise_mw = db_to_linear(noise_power_dbm(cfg));
  return st;
}

namespace {

double sinr(const Link& link, std::span<const int> transmitters, const ChannelState& channel) {
  const int k = link.subchannel;
  double interference = 0.0;
  for (int t : transmitters) {
    if (t == link.sender || t == link.receiver) continue;
    interference += channel.tx_power_mw[t] * channel.gains.gain(t, link.receiver, k);
  }
  const double signal = channel.tx_power_mw[link.sender] * channel.gains.gain(link.sender, link.receiver, k);
  return signal / (interference + channel.noise_mw);
}

}  // namespace

double link_rate(const Link& link, std::span<const int> transmitters, const ChannelState& channel) {
  return channel.cfg.subchannel_bandwidth() * std::log2(1.0 + sinr(link, transmitters, channel));
}

double link_rate(const Link& link, const Schedule& schedule, const ChannelState& channel) {
  const auto tx = schedule.transmitters_on(link.subchannel);
  return link_rate(link, tx, channel);
}

double link_sinr_db(const Link& link, const Schedule& schedule, const ChannelState& channel) {
  const auto tx = schedule.transmitters_on(link.subchannel);
  return linear_to_db(sinr(link, tx, channel));
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kHalfDuplex: return "half_duplex";
    case ViolationKind::kMultiSubchannel: return "multi_subchannel";
    case ViolationKind::kNonMemberUpload: return "non_member_upload";
    case ViolationKind::kNonLeaderReceiver: return "non_leader_receiver";
    case ViolationKind::kSelfLink: return "self_link";
  }
  return "unknown";
}

std::vector<Violation> validate_schedule(const Schedule& schedule, const Partition* partition) {
  std::vector<Violation> out;
  const auto links = schedule.links();
  std::set<Link> active(links.begin(), links.end());
  for (const auto& l : links) {
    if (l.sender == l.receiver) {
      out.push_back({ViolationKind::kSelfLink, l.sender, l.receiver, l.subchannel});
      continue;
    }
    // Report each reverse pair once, from the lower sender.
    if (l.sender < l.receiver && active.count(Link{l.receiver, l.sender, l.subchannel})) {
      out.push_back({ViolationKind::kHalfDuplex, l.sender, l.receiver, l.subchannel});
    }
  }
  for (std::size_t a = 0; a < links.size(); ++a) {
    // links are sorted, so every extra subchannel of a pair follows its first.
    if (a > 0 && links[a].sender == links[a - 1].sender && links[a].receiver == links[a - 1].receiver) {
      out.push_back({ViolationKind::kMultiSubchannel, links[a].sender, links[a].receiver, links[a].subchannel});
    }
  }
  if (partition != nullptr) {
    for (const auto& l : links) {
      if (!partition->is_leader(l.receiver)) {
        out.push_back({ViolationKind::kNonLeaderReceiver, l.sender, l.receiver, l.subchannel});
      } else if (partition->coalition_of(l.sender) != partition->coalition_of(l.receiver)) {
        out.push_back({ViolationKind::kNonMemberUpload, l.sender, l.receiver, l.subchannel});
      }
    }
  }
  return out;
}

double link_volume_bits(const Link& link, const Schedule& schedule, const DensityMatrix& rho,
                        const ChannelConfig& cfg) {
  double bits = 0.0;
  for (const auto& u : schedule.uploads()) {
    if (u.sender == link.sender && u.receiver == link.receiver && u.subchannel == link.subchannel) {
      bits += rho(u.sender, u.grid) * cfg.c0;
    }
  }
  return bits;
}

double transmission_delay(const Link& link, const Schedule& schedule, const DensityMatrix& rho,
                          const ChannelState& channel) {
  const double bits = link_volume_bits(link, schedule, rho, channel.cfg);
  if (bits <= 0.0) return 0.0;
  const double rate = link_rate(link, schedule, channel);
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return bits / rate;
}

double computation_delay(int receiver, const Schedule& schedule, const DensityMatrix& rho,
                         const ChannelState& channel) {
  double bits = 0.0;
  for (const auto& u : schedule.uploads()) {
    if (u.receiver == receiver) bits += rho(u.sender, u.grid) * channel.cfg.c0;
  }
  return bits * channel.cfg.flops_per_bit / channel.compute_flops[receiver];
}

double fusion_delay(int receiver, const Schedule& schedule, const DensityMatrix& rho,
                    const ChannelState& channel) {
  double slowest = 0.0;
  for (const auto& l : schedule.inbound(receiver)) {
    slowest = std::max(slowest, transmission_delay(l, schedule, rho, channel));
  }
  return slowest + computation_delay(receiver, schedule, rho, channel);
}

bool check_deadline(int receiver, const Schedule& schedule, const DensityMatrix& rho,
                    const ChannelState& channel, double cycle_duration) {
  return fusion_delay(receiver, schedule, rho, channel) <= cycle_duration;
}

std::vector<int> deadline_violations(const Schedule& schedule, const DensityMatrix& rho,
                                     const ChannelState& channel, double cycle_duration) {
  std::set<int> receivers;
  for (const auto& u : schedule.uploads()) receivers.insert(u.receiver);
  std::vector<int> out;
  for (int r : receivers) {
    if (!check_deadline(r, schedule, rho, channel, cycle_duration)) out.push_back(r);
  }
  return out;
}

}  // namespace coperc
