#pragma once

// Naive reference implementations. Written from the model equations with
// plain loops and no calls into the library's computational paths, so the
// tests compare two independent derivations.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "coperc/simulation.hpp"

namespace oracle {

using coperc::ChannelState;
using coperc::DensityMatrix;
using coperc::Upload;

inline double f(double rho, double f_max = 1.0, double rho_th = 2.0, double eps = 0.05) {
  const double lambda = std::log(1.0 / eps) / rho_th;
  return f_max * (1.0 - std::exp(-lambda * rho));
}

inline double f(double rho, const coperc::Curve& c) { return f(rho, c.f_max, c.rho_th, c.epsilon); }

inline double pathloss_db(double d, double fc_ghz) {
  if (d < 1.0) d = 1.0;
  return 32.4 + 21.0 * std::log10(d) + 20.0 * std::log10(fc_ghz);
}

// Lone link, no fading: B log2(1 + P G / N).
inline double lone_rate(double d, double tx_dbm, double fc_ghz, double band_hz, double psd_dbm_hz) {
  const double rx_dbm = tx_dbm - pathloss_db(d, fc_ghz);
  const double noise_dbm = psd_dbm_hz + 10.0 * std::log10(band_hz);
  const double snr = std::pow(10.0, (rx_dbm - noise_dbm) / 10.0);
  return band_hz * std::log2(1.0 + snr);
}

// Grid ids whose center lies within r of (x, y); id = ix * ny + iy.
inline std::vector<int> grids_within(double x, double y, double r, int nx, int ny, double gs) {
  std::vector<int> out;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const double cx = (ix + 0.5) * gs, cy = (iy + 0.5) * gs;
      if (std::hypot(cx - x, cy - y) <= r) out.push_back(ix * ny + iy);
    }
  }
  return out;
}

inline double coalition_value(const std::vector<int>& members, const DensityMatrix& rho,
                              const coperc::Curve& c) {
  double v = 0.0;
  for (int g = 0; g < rho.cols(); ++g) {
    double sum = 0.0, best = 0.0;
    for (int m : members) {
      sum += rho(m, g);
      best = std::max(best, f(rho(m, g), c));
    }
    v += f(sum, c) - best;
  }
  return v;
}

inline DensityMatrix fuse(const std::vector<Upload>& uploads, const DensityMatrix& rho) {
  DensityMatrix out = rho;
  std::set<std::tuple<int, int, int, int>> seen;
  for (const auto& u : uploads) {
    if (!seen.insert({u.sender, u.receiver, u.grid, u.subchannel}).second) continue;
    out(u.receiver, u.grid) += rho(u.sender, u.grid);
  }
  return out;
}

inline double field(int g, const DensityMatrix& fused, const coperc::Curve& c) {
  double best = 0.0;
  for (int k = 0; k < fused.rows(); ++k) best = std::max(best, f(fused(k, g), c));
  return best;
}

inline double potential(const std::vector<Upload>& uploads, const DensityMatrix& rho, const coperc::Curve& c) {
  const DensityMatrix fused = fuse(uploads, rho);
  double phi = 0.0;
  for (int g = 0; g < rho.cols(); ++g) phi += field(g, fused, c);
  return phi;
}

inline double region_utility(const std::vector<int>& region, const std::vector<Upload>& uploads,
                             const DensityMatrix& rho, const coperc::Curve& c) {
  const DensityMatrix fused = fuse(uploads, rho);
  double u = 0.0;
  for (int g : region) u += field(g, fused, c);
  return u;
}

inline std::vector<Upload> flatten(const coperc::Profile& profile) {
  std::vector<Upload> out;
  for (const auto& s : profile) out.insert(out.end(), s.begin(), s.end());
  return out;
}

// Rate of sender -> receiver on k with every other distinct transmitter on k
// (except the receiver itself) as interference.
inline double rate(int sender, int receiver, int k, const std::vector<Upload>& uploads, const ChannelState& ch) {
  std::set<int> tx;
  for (const auto& u : uploads) {
    if (u.subchannel == k) tx.insert(u.sender);
  }
  double interference = 0.0;
  for (int t : tx) {
    if (t == sender || t == receiver) continue;
    interference += ch.tx_power_mw[t] * ch.gains.gain(t, receiver, k);
  }
  const double s = ch.tx_power_mw[sender] * ch.gains.gain(sender, receiver, k);
  return ch.cfg.bandwidth_hz / ch.cfg.n_subchannels * std::log2(1.0 + s / (interference + ch.noise_mw));
}

inline double sinr_db(int sender, int receiver, int k, const std::vector<Upload>& uploads, const ChannelState& ch) {
  const double r = rate(sender, receiver, k, uploads, ch);
  const double b = ch.cfg.bandwidth_hz / ch.cfg.n_subchannels;
  return 10.0 * std::log10(std::exp2(r / b) - 1.0);
}

// Slowest inbound link plus fusion compute, per the deadline equation.
inline double fusion_delay(int receiver, const std::vector<Upload>& uploads, const DensityMatrix& rho,
                           const ChannelState& ch) {
  std::map<std::tuple<int, int>, double> bits;  // (sender, k) -> bits
  double total = 0.0;
  std::set<std::tuple<int, int, int, int>> seen;
  for (const auto& u : uploads) {
    if (u.receiver != receiver || !seen.insert({u.sender, u.receiver, u.grid, u.subchannel}).second) continue;
    const double b = rho(u.sender, u.grid) * ch.cfg.c0;
    bits[{u.sender, u.subchannel}] += b;
    total += b;
  }
  double slowest = 0.0;
  for (const auto& [key, b] : bits) {
    if (b <= 0.0) continue;
    const double r = rate(std::get<0>(key), receiver, std::get<1>(key), uploads, ch);
    slowest = std::max(slowest, r > 0.0 ? b / r : std::numeric_limits<double>::infinity());
  }
  return slowest + total * ch.cfg.flops_per_bit / ch.compute_flops[receiver];
}

inline bool deadline_ok(const std::vector<Upload>& uploads, const DensityMatrix& rho, const ChannelState& ch,
                        double tc) {
  std::set<int> receivers;
  for (const auto& u : uploads) receivers.insert(u.receiver);
  for (int r : receivers) {
    if (fusion_delay(r, uploads, rho, ch) > tc) return false;
  }
  return true;
}

// Half-duplex, one subchannel per pair, no self links; with a partition also
// member -> own leader.
inline int count_violations(const std::vector<Upload>& uploads, const coperc::Partition* p) {
  std::set<std::tuple<int, int, int>> links;
  for (const auto& u : uploads) links.insert({u.sender, u.receiver, u.subchannel});
  int bad = 0;
  std::map<std::pair<int, int>, int> per_pair;
  for (const auto& [i, j, k] : links) {
    if (i == j) ++bad;
    if (i < j && links.count({j, i, k})) ++bad;
    if (++per_pair[{i, j}] > 1) ++bad;
    if (p) {
      int ci = -1, cj = -1;
      bool j_leads = false;
      for (std::size_t c = 0; c < p->coalitions.size(); ++c) {
        const auto& m = p->coalitions[c].members;
        if (std::find(m.begin(), m.end(), i) != m.end()) ci = static_cast<int>(c);
        if (std::find(m.begin(), m.end(), j) != m.end()) cj = static_cast<int>(c);
        if (p->coalitions[c].leader == j) j_leads = true;
      }
      if (!j_leads || ci != cj) ++bad;
    }
  }
  return bad;
}

// Exhaustive best response of `player`: every injective member -> pool
// assignment (or idle), every subset of each active member's relevant grids,
// deadline-feasible for the leader. Returns the best leader utility.
inline double best_response_utility(int player, const coperc::Profile& profile, const coperc::GameContext& ctx) {
  const auto& co = ctx.partition.coalitions[static_cast<std::size_t>(player)];
  const int h = co.leader;
  const auto& pool = ctx.pools[static_cast<std::size_t>(player)];
  const auto& req = ctx.cluster_req[static_cast<std::size_t>(player)];
  const auto& rho = ctx.world.rho;
  std::vector<Upload> others;
  for (std::size_t p = 0; p < profile.size(); ++p) {
    if (static_cast<int>(p) != player) others.insert(others.end(), profile[p].begin(), profile[p].end());
  }
  std::vector<int> members;
  std::vector<std::vector<int>> grids;
  for (int m : co.members) {
    if (m == h) continue;
    members.push_back(m);
    std::vector<int> gs;
    for (int g : ctx.world.sens[static_cast<std::size_t>(m)]) {
      if (std::binary_search(req.begin(), req.end(), g) && rho(m, g) > 0.0) gs.push_back(g);
    }
    grids.push_back(gs);
  }
  double best = region_utility(req, others, rho, ctx.curve);
  std::vector<int> slot(members.size(), -1);
  // Recursion over members: pick a slot, then a grid subset.
  auto rec = [&](auto&& self, std::size_t i, std::vector<Upload> acc) -> void {
    if (i == members.size()) {
      std::vector<Upload> all = others;
      all.insert(all.end(), acc.begin(), acc.end());
      if (acc.empty()) return;
      if (fusion_delay(h, all, rho, ctx.channel) > ctx.world.cycle_duration) return;
      best = std::max(best, region_utility(req, all, rho, ctx.curve));
      return;
    }
    self(self, i + 1, acc);  // idle
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (std::find(slot.begin(), slot.end(), static_cast<int>(k)) != slot.end()) continue;
      slot[i] = static_cast<int>(k);
      const std::size_t n = grids[i].size();
      for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<Upload> next = acc;
        for (std::size_t b = 0; b < n; ++b) {
          if (mask >> b & 1) next.push_back({members[i], h, grids[i][b], pool[k]});
        }
        self(self, i + 1, next);
      }
      slot[i] = -1;
    }
  };
  rec(rec, 0, {});
  return best;
}

// Contribution of cav to `target` with the stability gate, straight from the
// equations: v_bar over target + cav, predicted region, beta, V_early.
inline double delta_v(int cav, const std::vector<int>& target, const coperc::WorldSnapshot& w,
                      const coperc::GridWorld& grids, const coperc::Curve& c, double t_stab) {
  if (target.empty()) return 0.0;
  const auto cavs = w.cavs();
  double vx = 0.0, vy = 0.0;
  for (int m : target) {
    vx += cavs[static_cast<std::size_t>(m)].velocity.x();
    vy += cavs[static_cast<std::size_t>(m)].velocity.y();
  }
  vx += cavs[static_cast<std::size_t>(cav)].velocity.x();
  vy += cavs[static_cast<std::size_t>(cav)].velocity.y();
  const double n = static_cast<double>(target.size() + 1);
  vx /= n;
  vy /= n;
  const auto& v = cavs[static_cast<std::size_t>(cav)];
  const double px = v.position.x() + (v.velocity.x() - vx) * t_stab;
  const double py = v.position.y() + (v.velocity.y() - vy) * t_stab;
  const auto pred = grids_within(px, py, w.r_sens, grids.nx(), grids.ny(), grids.grid_size());
  std::set<int> req;
  for (int m : target) req.insert(w.req[static_cast<std::size_t>(m)].begin(), w.req[static_cast<std::size_t>(m)].end());
  if (pred.empty()) return 0.0;
  int overlap = 0;
  for (int g : pred) overlap += static_cast<int>(req.count(g));
  const double beta = static_cast<double>(overlap) / static_cast<double>(pred.size());
  double early = 0.0;
  for (int g : w.sens[static_cast<std::size_t>(cav)]) {
    if (!req.count(g)) continue;
    double fused = 0.0;
    for (int m : target) fused += w.rho(m, g);
    early += f(fused + w.rho(cav, g), c) - f(fused, c);
  }
  return beta * early;
}

// Number of CAVs with a migration the formation rule would take: a
// neighboring coalition with room whose Delta V beats both zero and the
// contribution to the CAV's own remaining coalition.
inline int unstable_cavs(const coperc::Partition& p, const coperc::WorldSnapshot& w, const coperc::GridWorld& grids,
                         const coperc::Curve& c, const coperc::CoalitionConfig& cfg) {
  const auto cavs = w.cavs();
  int count = 0;
  for (int i = 0; i < w.n_cavs; ++i) {
    std::size_t own = 0;
    for (std::size_t s = 0; s < p.coalitions.size(); ++s) {
      const auto& m = p.coalitions[s].members;
      if (std::find(m.begin(), m.end(), i) != m.end()) own = s;
    }
    std::vector<int> rest;
    for (int m : p.coalitions[own].members) {
      if (m != i) rest.push_back(m);
    }
    const double stay = delta_v(i, rest, w, grids, c, cfg.t_stab);
    for (std::size_t s = 0; s < p.coalitions.size(); ++s) {
      if (s == own) continue;
      const auto& m = p.coalitions[s].members;
      if (static_cast<int>(m.size()) + 1 > cfg.n_max) continue;
      double cx = 0.0, cy = 0.0;
      for (int x : m) {
        cx += cavs[static_cast<std::size_t>(x)].position.x();
        cy += cavs[static_cast<std::size_t>(x)].position.y();
      }
      cx /= static_cast<double>(m.size());
      cy /= static_cast<double>(m.size());
      if (std::hypot(cx - cavs[static_cast<std::size_t>(i)].position.x(),
                     cy - cavs[static_cast<std::size_t>(i)].position.y()) >= cfg.neighbor_radius)
        continue;
      const double dv = delta_v(i, m, w, grids, c, cfg.t_stab);
      if (dv > 0.0 && dv > stay * (1.0 + 1e-9) + 1e-12) {
        ++count;
        break;
      }
    }
  }
  return count;
}

// Number of capacity-feasible partitions of all CAVs with no migration the
// formation rule would take, by enumerating restricted growth strings.
inline int stable_partitions(const coperc::WorldSnapshot& w, const coperc::GridWorld& grids, const coperc::Curve& c,
                             const coperc::CoalitionConfig& cfg) {
  const int n = w.n_cavs;
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  int stable = 0;
  auto rec = [&](auto&& self, int i, int top) -> void {
    if (i == n) {
      coperc::Partition p;
      for (int l = 0; l <= top; ++l) {
        coperc::Coalition co;
        for (int k = 0; k < n; ++k) {
          if (label[static_cast<std::size_t>(k)] == l) co.members.push_back(k);
        }
        if (static_cast<int>(co.members.size()) > cfg.n_max) return;
        co.leader = co.members.front();
        p.coalitions.push_back(co);
      }
      stable += unstable_cavs(p, w, grids, c, cfg) == 0;
      return;
    }
    for (int l = 0; l <= top + 1; ++l) {
      label[static_cast<std::size_t>(i)] = l;
      self(self, i + 1, std::max(top, l));
    }
  };
  if (n > 0) rec(rec, 1, 0);
  return stable;
}

}  // namespace oracle
