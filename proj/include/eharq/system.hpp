#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eharq/csv.hpp"
#include "eharq/metrics.hpp"
#include "eharq/resource_model.hpp"
#include "eharq/scheduling.hpp"
#include "eharq/simulator.hpp"
#include "eharq/system_config.hpp"

namespace eharq {

// Packet failure probability given per-stage scheduling probabilities
// ps[j] = P(stage j served within budget), j = 0..n. A packet fails when the
// initial transmission is never served, or the error chain ends in a falsely
// acknowledged error, an unscheduled retransmission, or exhausts the budget.
inline double packet_failure_from_ps(const SystemConfig& cfg, std::span<const double> ps) {
  cfg.validate();
  if (ps.size() != static_cast<std::size_t>(cfg.n_retx) + 1)
    throw std::invalid_argument("packet failure: need one scheduling probability per stage");
  for (std::size_t j = 0; j < ps.size(); ++j) {
    if (!(ps[j] >= 0.0 && ps[j] <= 1.0))
      throw std::invalid_argument("packet failure: scheduling probabilities must lie in [0, 1]");
    if (j > 0 && ps[j] > ps[j - 1] + 1e-9)
      throw std::logic_error("packet failure: scheduling probabilities must be non-increasing");
  }
  double h = 1.0;
  for (int j = cfg.n_retx; j >= 1; --j) {
    const std::size_t idx = static_cast<std::size_t>(j);
    const double ratio = ps[idx - 1] > 0.0 ? ps[idx] / ps[idx - 1] : 0.0;
    h = cfg.fnr + (1.0 - cfg.fnr) * ((1.0 - ratio) + ratio * (cfg.p_e * h));
  }
  return (1.0 - ps[0]) + ps[0] * cfg.p_e * h;
}

struct SystemAnalysis {
  ResourceDistribution stationary;
  std::vector<double> ps;
  double p_pf = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
};

// Full analytic pipeline: stationary resource demand, per-stage scheduling
// probabilities, packet failure probability. Divergence of the demand
// iteration is reported (p_pf stays NaN), not thrown.
inline SystemAnalysis analyze_system(const SystemConfig& cfg, const PropagateOptions& opt = {}) {
  cfg.validate();
  SystemAnalysis out;
  out.stationary = propagate_resource_distribution(cfg, opt);
  if (out.stationary.status != Convergence::kConverged) {
    out.diverged = true;
    return out;
  }
  out.ps = make_scheduling_probs(out.stationary, cfg).ps;
  out.p_pf = packet_failure_from_ps(cfg, out.ps);
  return out;
}

struct SystemSweepRow {
  double fnr = 0.0;
  double fpr = 0.0;
  double p_pf_analytic = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
  bool has_sim = false;
  double p_pf_sim = std::numeric_limits<double>::quiet_NaN();
  double p_pf_sim_ci_lo = std::numeric_limits<double>::quiet_NaN();
  double p_pf_sim_ci_hi = std::numeric_limits<double>::quiet_NaN();
};

struct SystemSweepResult {
  std::vector<SystemSweepRow> rows;                   // sorted by fnr
  std::optional<std::size_t> argmin;                  // over finite analytic entries
};

struct SweepOptions {
  PropagateOptions propagate;
  bool simulate = false;
  std::int64_t sim_slots = 200000;
  std::uint64_t sim_seed = 1;
};

// Evaluates the analytic packet failure probability at every operating point
// of a classifier curve; the stationary demand is recomputed per point (the
// load depends on the operating point) and cached by (fnr, fpr).
inline SystemSweepResult fnr_sweep_system(const SystemConfig& base, const CurveSet& curve,
                                          const SweepOptions& opt = {}) {
  base.validate();
  SystemSweepResult result;
  std::map<std::pair<double, double>, SystemAnalysis> cache;
  for (const auto& pt : curve.points) {
    SystemConfig cfg = base;
    cfg.fnr = pt.fnr;
    cfg.fpr = pt.fpr;
    const std::pair<double, double> key{pt.fnr, pt.fpr};
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, analyze_system(cfg, opt.propagate)).first;
    SystemSweepRow row;
    row.fnr = pt.fnr;
    row.fpr = pt.fpr;
    row.p_pf_analytic = it->second.p_pf;
    row.diverged = it->second.diverged;
    if (opt.simulate) {
      const SimulationResult sim = simulate_system(cfg, opt.sim_slots, opt.sim_seed);
      row.has_sim = true;
      row.p_pf_sim = sim.p_pf;
      row.p_pf_sim_ci_lo = sim.ci.lo;
      row.p_pf_sim_ci_hi = sim.ci.hi;
    }
    result.rows.push_back(row);
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const SystemSweepRow& a, const SystemSweepRow& b) { return a.fnr < b.fnr; });
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const double v = result.rows[i].p_pf_analytic;
    if (!std::isfinite(v)) continue;
    if (!result.argmin || v < result.rows[*result.argmin].p_pf_analytic) result.argmin = i;
  }
  return result;
}

inline void write_system_sweep_csv(const SystemSweepResult& result, std::ostream& out) {
  out << "fnr,fpr,p_pf_analytic,p_pf_sim,p_pf_sim_ci_lo,p_pf_sim_ci_hi\n";
  const auto field = [](double v) { return std::isfinite(v) ? format_g17(v) : std::string(); };
  for (const auto& row : result.rows)
    out << format_g17(row.fnr) << ',' << format_g17(row.fpr) << ',' << field(row.p_pf_analytic)
        << ',' << field(row.p_pf_sim) << ',' << field(row.p_pf_sim_ci_lo) << ','
        << field(row.p_pf_sim_ci_hi) << '\n';
  if (!out) throw std::runtime_error("system sweep export: write failure");
}

// Per-scheme sum over scenarios of log10(P / best P in that scenario); the
// scheme that is best everywhere scores 0.
inline std::vector<double> total_score(const std::vector<std::vector<double>>& p_pf) {
  if (p_pf.empty()) throw std::invalid_argument("total score: no schemes");
  const std::size_t n_scenarios = p_pf.front().size();
  if (n_scenarios == 0) throw std::invalid_argument("total score: no scenarios");
  for (const auto& row : p_pf) {
    if (row.size() != n_scenarios)
      throw std::invalid_argument("total score: ragged scheme rows");
    for (double v : row)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("total score: probabilities must be positive and finite");
  }
  std::vector<double> scores(p_pf.size(), 0.0);
  for (std::size_t t = 0; t < n_scenarios; ++t) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : p_pf) best = std::min(best, row[t]);
    for (std::size_t s = 0; s < p_pf.size(); ++s) scores[s] += std::log10(p_pf[s][t] / best);
  }
  return scores;
}

}  // namespace eharq
