#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "eharq/csv.hpp"
#include "eharq/metrics.hpp"
#include "eharq/rng.hpp"
#include "eharq/stats.hpp"

namespace eharq {

// Infinite-resource feedback-prediction chain parameters. p_cond is the
// error probability of a retransmission given every earlier transmission
// erred; it defaults to p_e (independent retransmissions).
struct HarqParams {
  double p_e = 0.0;
  double p_fn = 0.0;
  double p_fp = 0.0;
  double p_cond = -1.0;  // negative means "use p_e"
  int n = 1;             // retransmission budget

  double cond() const { return p_cond < 0.0 ? p_e : p_cond; }

  void validate() const {
    const auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!ok(p_e) || !ok(p_fn) || !ok(p_fp) || !ok(cond()))
      throw std::invalid_argument("harq: probabilities must lie in [0, 1]");
    if (n < 0) throw std::invalid_argument("harq: retransmission budget must be >= 0");
  }
};

// P(transmission `stage` errs | error indicators of transmissions 0..stage-1).
// Stage 0 sees an empty history.
using ErrorChain = std::function<double(int stage, std::span<const int> history)>;

inline ErrorChain default_chain(const HarqParams& params) {
  return [params](int stage, std::span<const int> history) {
    if (stage == 0) return params.p_e;
    for (int h : history)
      if (h == 0) return params.p_e;  // the chain conditional only binds all-error histories
    return params.cond();
  };
}

namespace detail {

inline double all_error_cond(const ErrorChain& chain, int stage) {
  static thread_local std::vector<int> ones;
  ones.assign(static_cast<std::size_t>(stage), 1);
  return chain(stage, ones);
}

}  // namespace detail

// Failure probability with n retransmissions: p = P_e * H(1) where
// H(j) = p_fn + (1-p_fn) * P(error at stage j | all prior erred) * H(j+1)
// for j <= n and H(j) = 1 past the budget. A block fails when an error is
// falsely acknowledged or the budget runs out while errors persist.
inline double effective_bler(const HarqParams& params, const ErrorChain& chain_in = {}) {
  params.validate();
  const ErrorChain chain = chain_in ? chain_in : default_chain(params);
  double h = 1.0;
  for (int j = params.n; j >= 1; --j)
    h = params.p_fn + (1.0 - params.p_fn) * (detail::all_error_cond(chain, j) * h);
  return chain(0, {}) * h;
}

// Probability that retransmission k occurs: every transmission 0..k-1 must
// draw a NACK (true detection of an error, or a false alarm on a success).
// Dependent chains are summed over all error patterns; k above the budget is
// still well defined and only reported through the optional flag.
inline double retransmission_prob(const HarqParams& params, int k, const ErrorChain& chain_in = {},
                                  bool* exceeds_budget = nullptr) {
  params.validate();
  if (k < 1) throw std::invalid_argument("retransmission_prob: k must be >= 1");
  if (k > 30) throw std::invalid_argument("retransmission_prob: pattern sum infeasible for k > 30");
  if (exceeds_budget != nullptr) *exceeds_budget = k > params.n;
  const ErrorChain chain = chain_in ? chain_in : default_chain(params);
  double total = 0.0;
  std::vector<int> history(static_cast<std::size_t>(k), 0);
  const std::uint64_t patterns = 1ULL << k;
  for (std::uint64_t bits = 0; bits < patterns; ++bits) {
    double prob = 1.0;
    for (int i = 0; i < k && prob > 0.0; ++i) {
      const int err = static_cast<int>(bits >> i & 1ULL);
      history[static_cast<std::size_t>(i)] = err;
      const double p_err = chain(i, std::span<const int>(history.data(), static_cast<std::size_t>(i)));
      const double p_state = err ? p_err : 1.0 - p_err;
      const double p_nack = err ? 1.0 - params.p_fn : params.p_fp;
      prob *= p_state * p_nack;
    }
    total += prob;
  }
  return total;
}

// Expected number of transmission delays: sum over i of i * P(retransmission
// i occurs), up to the budget.
inline double expected_retransmissions(const HarqParams& params, const ErrorChain& chain_in = {}) {
  params.validate();
  const ErrorChain chain = chain_in ? chain_in : default_chain(params);
  double total = 0.0;
  for (int i = 1; i <= params.n; ++i)
    total += static_cast<double>(i) * retransmission_prob(params, i, chain);
  return total;
}

struct HarqMcResult {
  std::int64_t trials = 0;
  std::int64_t block_errors = 0;
  double p_hat = 0.0;
  double retrans_hat = 0.0;        // mean of R(R+1)/2, the delay functional
  double retrans_sample_var = 0.0;

  Interval p_interval(double z = 1.959964) const {
    return wilson_interval(block_errors, trials, z);
  }
  Interval retrans_interval(double z = 1.959964) const {
    return mean_interval(retrans_hat, retrans_sample_var, trials, z);
  }
};

// Simulates the feedback decision tree. A trial walks transmissions until the
// feedback acknowledges or the budget is spent; the block fails if an error
// is falsely acknowledged or errors outlast the budget. The per-trial delay
// functional R(R+1)/2 (R = retransmissions that occurred) has expectation
// equal to expected_retransmissions.
inline HarqMcResult monte_carlo_harq(const HarqParams& params, std::int64_t trials,
                                     std::uint64_t seed, const ErrorChain& chain_in = {}) {
  params.validate();
  if (trials < 1) throw std::invalid_argument("monte_carlo_harq: trials must be >= 1");
  const ErrorChain chain = chain_in ? chain_in : default_chain(params);
  HarqMcResult result;
  result.trials = trials;
  double sum_x = 0.0, sum_x2 = 0.0;
  std::vector<int> history;
  history.reserve(static_cast<std::size_t>(params.n) + 1);
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng = substream(seed, stream_tag::kMonteCarlo, static_cast<std::uint64_t>(t));
    history.clear();
    bool delivered = false, failed = false;
    int retransmissions = 0;
    for (int j = 0; j <= params.n; ++j) {
      const int err = rng.bernoulli(chain(j, history)) ? 1 : 0;
      history.push_back(err);
      const bool nack = err ? !rng.bernoulli(params.p_fn) : rng.bernoulli(params.p_fp);
      if (!delivered && !failed) {
        if (err && !nack) failed = true;  // false acknowledgement of an error
        if (!err) delivered = true;       // decoded; later false alarms only cost delay
      }
      if (!nack || j == params.n) break;
      ++retransmissions;
    }
    if (!delivered && !failed) failed = true;  // budget spent while erring
    if (failed) ++result.block_errors;
    const double x = 0.5 * static_cast<double>(retransmissions) *
                     static_cast<double>(retransmissions + 1);
    sum_x += x;
    sum_x2 += x * x;
  }
  const double n = static_cast<double>(trials);
  result.p_hat = static_cast<double>(result.block_errors) / n;
  result.retrans_hat = sum_x / n;
  result.retrans_sample_var =
      trials > 1 ? (sum_x2 - n * result.retrans_hat * result.retrans_hat) / (n - 1.0) : 0.0;
  return result;
}

struct OperatingSweepRow {
  double fnr = 0.0;
  double fpr = 0.0;
  double p_eff = 0.0;
  double exp_retx = 0.0;
};

// Evaluates the chain model at every operating point of a classifier curve.
inline std::vector<OperatingSweepRow> sweep_operating_points(const CurveSet& curve,
                                                             const HarqParams& skeleton) {
  std::vector<OperatingSweepRow> rows;
  rows.reserve(curve.points.size());
  for (const auto& pt : curve.points) {
    HarqParams params = skeleton;
    params.p_fn = pt.fnr;
    params.p_fp = pt.fpr;
    rows.push_back({pt.fnr, pt.fpr, effective_bler(params), expected_retransmissions(params)});
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<OperatingSweepRow>& rows, std::ostream& out) {
  out << "fnr,fpr,p_eff,exp_retx\n";
  for (const auto& row : rows)
    out << format_g17(row.fnr) << ',' << format_g17(row.fpr) << ',' << format_g17(row.p_eff)
        << ',' << format_g17(row.exp_retx) << '\n';
  if (!out) throw std::runtime_error("sweep export: write failure");
}

}  // namespace eharq
