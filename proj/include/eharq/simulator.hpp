#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eharq/rng.hpp"
#include "eharq/stats.hpp"
#include "eharq/system_config.hpp"

namespace eharq {

struct SimulationResult {
  std::int64_t packets = 0;   // packets arriving inside the measurement window
  std::int64_t failures = 0;
  double p_pf = 0.0;
  Interval ci;                // Wilson interval at the z passed to simulate_system
  std::int64_t slots_measured = 0;
};

// Slot-based oracle for the analytic pipeline. Per slot: each user draws a
// new packet, expired packets are dropped as failures, and n_res of the
// eligible transmissions are served uniformly at random. A served
// transmission errs with probability p_e; feedback flags an error with
// probability 1-fnr and a success with probability fpr. A flagged
// transmission re-enters the queue t_rtt slots later; an unflagged success
// delivers the packet, while an unflagged error ends it as a failure. A
// packet is only serviceable within t_c slots of its arrival and keeps
// retransmitting until delivered, failed, or expired. Counting is restricted
// to packets arriving after a warm-up period, and the run is extended so
// every counted packet resolves.
inline SimulationResult simulate_system(const SystemConfig& cfg, std::int64_t measure_slots,
                                        std::uint64_t seed, double ci_z = 1.959964) {
  cfg.validate();
  if (measure_slots < 1) throw std::invalid_argument("simulate_system: need at least one slot");

  struct Packet {
    std::int64_t arrival = 0;
    std::int64_t eligible = 0;
    bool counted = false;
  };

  const std::int64_t warmup = std::max<std::int64_t>(200, 5LL * cfg.t_c);
  const std::int64_t drain = cfg.t_c + cfg.t_rtt + 2;
  const std::int64_t total_slots = warmup + measure_slots + drain;

  Rng rng = substream(seed, stream_tag::kSystemSim, 0);
  std::vector<Packet> active;
  std::vector<std::size_t> eligible;
  SimulationResult result;
  result.slots_measured = measure_slots;

  for (std::int64_t t = 0; t < total_slots; ++t) {
    // Expire packets whose service window has closed.
    for (std::size_t i = 0; i < active.size();) {
      if (t > active[i].arrival + cfg.t_c - 1) {
        if (active[i].counted) ++result.failures;
        active[i] = active.back();
        active.pop_back();
      } else {
        ++i;
      }
    }
    // New arrivals, at most one per user per slot.
    if (t < warmup + measure_slots) {
      for (int ue = 0; ue < cfg.n_ue; ++ue) {
        if (!rng.bernoulli(cfg.p_arrival)) continue;
        const bool counted = t >= warmup;
        active.push_back({t, t, counted});
        if (counted) ++result.packets;
      }
    }
    // Serve a uniformly random subset of the eligible transmissions.
    eligible.clear();
    for (std::size_t i = 0; i < active.size(); ++i)
      if (active[i].eligible <= t) eligible.push_back(i);
    const std::size_t n_serve =
        std::min(eligible.size(), static_cast<std::size_t>(cfg.n_res));
    for (std::size_t s = 0; s < n_serve; ++s) {
      const std::size_t pick =
          s + static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(eligible.size() - s)));
      std::swap(eligible[s], eligible[pick]);
    }
    std::vector<std::size_t> to_remove;
    for (std::size_t s = 0; s < n_serve; ++s) {
      Packet& pkt = active[eligible[s]];
      const bool err = rng.bernoulli(cfg.p_e);
      const bool flagged = err ? !rng.bernoulli(cfg.fnr) : rng.bernoulli(cfg.fpr);
      if (flagged) {
        pkt.eligible = t + cfg.t_rtt;  // deadline check next slots prunes hopeless ones
      } else {
        if (err && pkt.counted) ++result.failures;  // error acknowledged as fine
        to_remove.push_back(eligible[s]);
      }
    }
    // Swap-erase from highest index so earlier indices stay valid.
    std::sort(to_remove.begin(), to_remove.end());
    for (std::size_t r = to_remove.size(); r-- > 0;) {
      active[to_remove[r]] = active.back();
      active.pop_back();
    }
  }

  result.p_pf = result.packets > 0
                    ? static_cast<double>(result.failures) / static_cast<double>(result.packets)
                    : 0.0;
  result.ci = wilson_interval(result.failures, std::max<std::int64_t>(result.packets, 1), ci_z);
  return result;
}

}  // namespace eharq
