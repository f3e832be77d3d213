#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

#include "eharq/system_config.hpp"

namespace eharq {

inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("convolve: empty distribution");
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

inline std::vector<double> binomial_pmf(int n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_pmf: n must be >= 0");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial_pmf: p must lie in [0, 1]");
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf[static_cast<std::size_t>(n)] = 1.0;
    return pmf;
  }
  for (int k = 0; k <= n; ++k) {
    const double log_coeff =
        std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    pmf[static_cast<std::size_t>(k)] =
        std::exp(log_coeff + k * std::log(p) + (n - k) * std::log1p(-p));
  }
  return pmf;
}

// Number of packets arriving per slot: each of n_ue users independently
// submits at most one new packet.
inline std::vector<double> arrival_distribution(int n_ue, double p_arrival) {
  return binomial_pmf(n_ue, p_arrival);
}

// Retransmission demand one round-trip after serving the load described by
// `prev`: each of min(k, n_res) served transmissions independently triggers a
// retransmission with probability single_retransmission_prob(). Mass of prev
// beyond its stored support (from truncation) is treated as fully loaded.
inline std::vector<double> retransmission_load_distribution(const std::vector<double>& prev,
                                                            const SystemConfig& cfg) {
  cfg.validate();
  const double p_r = cfg.single_retransmission_prob();
  const std::size_t n_res = static_cast<std::size_t>(cfg.n_res);
  std::vector<double> out(n_res + 1, 0.0);
  double tail = 1.0;
  for (std::size_t k = 0; k <= n_res && k < prev.size(); ++k) {
    tail -= prev[k];
    if (prev[k] == 0.0) continue;
    const std::vector<double> thinned = binomial_pmf(static_cast<int>(k), p_r);
    for (std::size_t m = 0; m < thinned.size(); ++m) out[m] += prev[k] * thinned[m];
  }
  tail = std::max(tail, 0.0);
  if (tail > 0.0) {
    const std::vector<double> full = binomial_pmf(cfg.n_res, p_r);
    for (std::size_t m = 0; m < full.size(); ++m) out[m] += tail * full[m];
  }
  return out;
}

// Demand carried over from a slot whose load exceeded the service capacity.
inline std::vector<double> overload_distribution(const std::vector<double>& prev,
                                                 const SystemConfig& cfg) {
  cfg.validate();
  const std::size_t n_res = static_cast<std::size_t>(cfg.n_res);
  const std::size_t overflow = prev.size() > n_res + 1 ? prev.size() - n_res - 1 : 0;
  std::vector<double> out(overflow + 1, 0.0);
  for (std::size_t k = 0; k < prev.size(); ++k) {
    if (k <= n_res)
      out[0] += prev[k];
    else
      out[k - n_res] = prev[k];
  }
  return out;
}

enum class Convergence { kConverged, kDiverged, kMaxSlots };

struct ResourceDistribution {
  std::vector<double> probs;  // over resource demand counts 0..N_max
  int t = 0;                  // slot at which this snapshot was taken
  Convergence status = Convergence::kMaxSlots;
  double l1_residual = 0.0;    // last slot-to-slot total-variation-style change
  double truncated_mass = 0.0; // cumulative probability dropped by tail truncation
  int n_min = 0;               // effective lower/upper support bounds
  int n_max = 0;
  bool narrow_support = false; // n_min > n_max - n_res, the premise of the
                               // conditional approximation; reported only

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) m += static_cast<double>(k) * probs[k];
    return m;
  }
  double total_mass() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }
};

struct PropagateOptions {
  int max_slots = 5000;
  double l1_tol = 1e-10;
  double tail_eps = 1e-13;      // per-slot truncation budget
  int warmup_slots = 200;       // divergence detection starts after this
  int drift_window = 100;       // consecutive mean increments required
  double drift_threshold = 0.1; // mean growth over the window required
};

namespace detail {

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    d += std::abs((i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0));
  return d;
}

inline double truncate_tail(std::vector<double>& probs, double eps) {
  double tail = 0.0;
  std::size_t keep = probs.size();
  while (keep > 1 && tail + probs[keep - 1] < eps) {
    tail += probs[keep - 1];
    --keep;
  }
  probs.resize(keep);
  return tail;
}

inline void effective_support(const std::vector<double>& probs, double eps, int* lo, int* hi) {
  double acc = 0.0;
  std::size_t i = 0;
  while (i + 1 < probs.size() && acc + probs[i] < eps) acc += probs[i++];
  *lo = static_cast<int>(i);
  acc = 0.0;
  std::size_t j = probs.size();
  while (j > i + 1 && acc + probs[j - 1] < eps) acc += probs[--j];
  *hi = static_cast<int>(j - 1);
}

}  // namespace detail

// Iterates the per-slot resource demand: arrivals, retransmissions fed back
// from the slot served one round-trip earlier, and overload carried from the
// previous slot. Starts from an empty system. Stops when the slot-to-slot l1
// change falls below tolerance, when sustained mean drift indicates an
// overloaded (non-stationary) system, or at the slot budget.
inline ResourceDistribution propagate_resource_distribution(const SystemConfig& cfg,
                                                            const PropagateOptions& opt = {}) {
  cfg.validate();
  if (opt.max_slots < 1) throw std::invalid_argument("propagate: max_slots must be >= 1");
  const std::vector<double> arrivals = arrival_distribution(cfg.n_ue, cfg.p_arrival);
  const std::vector<double> delta0 = {1.0};

  // Distributions for slots t - window .. t - 1; slots before 0 act as empty.
  std::deque<std::vector<double>> history;
  const int window = std::max(cfg.t_rtt, 1);

  ResourceDistribution result;
  double truncated = 0.0;
  double prev_mean = 0.0;
  int consecutive_up = 0;
  std::deque<double> mean_trail;  // means of the last drift_window slots

  for (int t = 0; t < opt.max_slots; ++t) {
    const auto slot_dist = [&](int slot) -> const std::vector<double>& {
      if (slot < 0) return delta0;
      const int offset = static_cast<int>(history.size()) - (t - slot);
      return history[static_cast<std::size_t>(offset)];
    };
    const std::vector<double>& retx_source = slot_dist(t - cfg.t_rtt);
    const std::vector<double> ph =
        t - cfg.t_rtt < 0 ? delta0 : retransmission_load_distribution(retx_source, cfg);
    const std::vector<double> pol =
        t - 1 < 0 ? delta0 : overload_distribution(slot_dist(t - 1), cfg);
    std::vector<double> cur = convolve(convolve(arrivals, ph), pol);
    truncated += detail::truncate_tail(cur, opt.tail_eps);

    const std::vector<double>& prev = t == 0 ? delta0 : history.back();
    const double l1 = detail::l1_distance(cur, prev);
    const double mean = [&] {
      double m = 0.0;
      for (std::size_t k = 0; k < cur.size(); ++k) m += static_cast<double>(k) * cur[k];
      return m;
    }();

    consecutive_up = mean > prev_mean ? consecutive_up + 1 : 0;
    prev_mean = mean;
    mean_trail.push_back(mean);
    if (static_cast<int>(mean_trail.size()) > opt.drift_window + 1) mean_trail.pop_front();

    history.push_back(std::move(cur));
    if (static_cast<int>(history.size()) > window) history.pop_front();

    const bool drifting = t >= opt.warmup_slots && consecutive_up >= opt.drift_window &&
                          static_cast<int>(mean_trail.size()) > opt.drift_window &&
                          mean - mean_trail.front() > opt.drift_threshold;
    if (l1 < opt.l1_tol || drifting || t == opt.max_slots - 1) {
      result.probs = history.back();
      result.t = t;
      result.l1_residual = l1;
      result.status = drifting ? Convergence::kDiverged
                               : (l1 < opt.l1_tol ? Convergence::kConverged : Convergence::kMaxSlots);
      break;
    }
  }

  result.truncated_mass = truncated;
  detail::effective_support(result.probs, 1e-6, &result.n_min, &result.n_max);
  result.narrow_support = result.n_min > result.n_max - cfg.n_res;
  return result;
}

// Next-slot demand given the previous slot held exactly n_prev: arrivals plus
// binomially thinned retransmissions from the min(n_prev, n_res) served
// transmissions, shifted by the deterministic overload carry-over. The
// approximate form drops the carry-over and conditions service on a full
// slot, which only differs when n_prev exceeds the capacity.
inline std::vector<double> conditional_resource_distribution(int n_prev, const SystemConfig& cfg,
                                                             bool approximate_overload = false) {
  cfg.validate();
  if (n_prev < 0) throw std::invalid_argument("conditional distribution: n_prev must be >= 0");
  const int served = std::min(n_prev, cfg.n_res);
  const std::vector<double> base =
      convolve(arrival_distribution(cfg.n_ue, cfg.p_arrival),
               binomial_pmf(served, cfg.single_retransmission_prob()));
  const int shift = approximate_overload ? 0 : std::max(n_prev - cfg.n_res, 0);
  if (shift == 0) return base;
  std::vector<double> out(base.size() + static_cast<std::size_t>(shift), 0.0);
  std::copy(base.begin(), base.end(), out.begin() + shift);
  return out;
}

}  // namespace eharq
