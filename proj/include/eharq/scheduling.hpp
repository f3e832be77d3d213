#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "eharq/resource_model.hpp"
#include "eharq/system_config.hpp"

namespace eharq {

// Probability that a single extra transmission waits exactly dt slots before
// being served, in a stationary system with uniformly random service of
// n_res transmissions per slot. Product form: an initial factor for being
// passed over in the arrival slot, a geometric factor for being passed over
// in each fully loaded intermediate slot (demand conditioned on a served-full
// previous slot), and a terminal factor for being served.
class SchedulingModel {
 public:
  SchedulingModel(const ResourceDistribution& stationary, const SystemConfig& cfg) {
    cfg.validate();
    if (stationary.status != Convergence::kConverged)
      throw std::invalid_argument(
          "scheduling model: requires a converged stationary resource distribution");
    const std::vector<double> cond =
        conditional_resource_distribution(cfg.n_res, cfg);
    const double n_res = static_cast<double>(cfg.n_res);
    const auto pass_over = [n_res](const std::vector<double>& dist, std::size_t from) {
      double s = 0.0;
      for (std::size_t k = from; k < dist.size(); ++k)
        s += dist[k] * (1.0 - n_res / (static_cast<double>(k) + 1.0));
      return s;
    };
    const auto served = [n_res](const std::vector<double>& dist, std::size_t cap) {
      double s = 0.0;
      for (std::size_t k = 0; k < dist.size(); ++k)
        s += k < cap ? dist[k] : dist[k] * n_res / (static_cast<double>(k) + 1.0);
      return s;
    };
    const std::size_t cap = static_cast<std::size_t>(cfg.n_res);
    initial_pass_ = pass_over(stationary.probs, cap);
    middle_pass_ = pass_over(cond, cap);
    terminal_serve_ = served(cond, cap);
    immediate_ = served(stationary.probs, cap);
  }

  double p1(int dt) const {
    if (dt < 0) throw std::invalid_argument("p1: dt must be >= 0");
    if (dt == 0) return immediate_;
    return initial_pass_ * std::pow(middle_pass_, dt - 1) * terminal_serve_;
  }

  std::function<double(int)> as_function() const {
    return [*this](int dt) { return p1(dt); };
  }

  double initial_pass() const { return initial_pass_; }
  double middle_pass() const { return middle_pass_; }
  double terminal_serve() const { return terminal_serve_; }

 private:
  double immediate_ = 0.0;
  double initial_pass_ = 0.0;
  double middle_pass_ = 0.0;
  double terminal_serve_ = 0.0;
};

// P(stage j of a feedback chain is served within the latency budget), for
// j = 0..n_retx: sums the per-stage waiting-time function over all service
// offset tuples k_0 < k_1 < ... with gaps >= t_rtt and k_j <= t_c - 1.
inline std::vector<double> schedule_within_constraint(const SystemConfig& cfg,
                                                      const std::function<double(int)>& p1) {
  cfg.validate();
  if (!p1) throw std::invalid_argument("schedule_within_constraint: missing waiting-time function");
  const std::size_t horizon = static_cast<std::size_t>(cfg.t_c);
  std::vector<double> waits(horizon);
  for (std::size_t k = 0; k < horizon; ++k) waits[k] = p1(static_cast<int>(k));

  std::vector<double> ps;
  ps.reserve(static_cast<std::size_t>(cfg.n_retx) + 1);
  // stage[k] = P(stage j is served exactly at offset k from the arrival slot)
  std::vector<double> stage = waits;
  for (int j = 0; j <= cfg.n_retx; ++j) {
    if (j > 0) {
      std::vector<double> next(horizon, 0.0);
      for (std::size_t k = 0; k < horizon; ++k) {
        if (stage[k] == 0.0) continue;
        for (std::size_t m = k + static_cast<std::size_t>(cfg.t_rtt); m < horizon; ++m)
          next[m] += stage[k] * waits[m - k - static_cast<std::size_t>(cfg.t_rtt)];
      }
      stage = std::move(next);
    }
    double total = 0.0;
    for (double v : stage) total += v;
    ps.push_back(std::min(total, 1.0));
  }
  return ps;
}

struct SchedulingProbs {
  std::function<double(int)> p1;
  std::vector<double> ps;  // P(stage j within budget), j = 0..n_retx
};

inline SchedulingProbs make_scheduling_probs(const ResourceDistribution& stationary,
                                             const SystemConfig& cfg) {
  const SchedulingModel model(stationary, cfg);
  SchedulingProbs out;
  out.p1 = model.as_function();
  out.ps = schedule_within_constraint(cfg, out.p1);
  return out;
}

}  // namespace eharq
