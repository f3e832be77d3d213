#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "eharq/ldpc.hpp"

namespace eharq {

// Everything a decode run exposes: the per-iteration aggregate LLRs (entry 0
// is the channel input, entries 1..trace_iters the first iterations), the
// final check-to-variable messages in check-major edge order, and the final
// hard decision with its syndrome state.
struct DecoderTrace {
  std::vector<std::vector<double>> app_llrs;
  std::vector<double> messages;
  std::vector<std::uint8_t> hard_decision;
  int iterations_used = 0;
  bool syndrome_ok = false;
};

// Flooding min-sum decoder over a fixed Tanner graph. Construction flattens
// the graph once (either the full matrix or the subgraph a SubcodeView
// induces); decode() owns its scratch, so one decoder instance can serve any
// number of sequential decodes and const instances are shareable.
class MinSumDecoder {
 public:
  explicit MinSumDecoder(const ParityCheckMatrix& h, double scale = 1.0) : scale_(scale) {
    if (!(scale_ > 0.0)) throw std::invalid_argument("min-sum scale must be positive");
    n_vars_ = h.n_vars();
    build(h.rows(), [](int k) { return k; });
  }

  MinSumDecoder(const ParityCheckMatrix& h, const SubcodeView& view, double scale = 1.0)
      : scale_(scale) {
    if (!(scale_ > 0.0)) throw std::invalid_argument("min-sum scale must be positive");
    if (view.parent != &h) throw std::invalid_argument("subcode view does not belong to matrix");
    n_vars_ = static_cast<int>(view.var_subset.size());
    std::vector<int> local_of(h.n_vars(), -1);
    for (int i = 0; i < n_vars_; ++i) local_of[view.var_subset[i]] = i;
    std::vector<std::vector<int>> rows;
    rows.reserve(view.row_subset.size());
    for (int m : view.row_subset) rows.push_back(h.check_vars(m));
    build(rows, [&local_of](int k) {
      if (local_of[k] < 0)
        throw std::invalid_argument("subcode view misses a variable its rows touch");
      return local_of[k];
    });
  }

  int n_vars() const { return n_vars_; }
  int n_checks() const { return static_cast<int>(check_offset_.size()) - 1; }
  int n_edges() const { return static_cast<int>(edge_var_.size()); }

  // Runs at least trace_iters and at most max_iter iterations; once the trace
  // is complete, a satisfied syndrome stops the loop.
  DecoderTrace decode(std::span<const double> channel_llrs, int max_iter, int trace_iters) const {
    if (static_cast<int>(channel_llrs.size()) != n_vars_)
      throw std::invalid_argument("decode: expected " + std::to_string(n_vars_) +
                                  " channel LLRs, got " + std::to_string(channel_llrs.size()));
    if (trace_iters < 0 || max_iter < trace_iters)
      throw std::invalid_argument("decode: need 0 <= trace_iters <= max_iter");
    for (double v : channel_llrs)
      if (!std::isfinite(v)) throw std::invalid_argument("decode: non-finite channel LLR");

    const int n_edges = this->n_edges();
    DecoderTrace trace;
    trace.app_llrs.reserve(static_cast<std::size_t>(trace_iters) + 1);
    std::vector<double> app(channel_llrs.begin(), channel_llrs.end());
    std::vector<double> beta(n_edges, 0.0);
    std::vector<double> alpha(n_edges, 0.0);
    trace.app_llrs.push_back(app);

    trace.syndrome_ok = syndrome_from_app(app);
    int iter = 0;
    while (iter < max_iter && !(trace.syndrome_ok && iter >= trace_iters)) {
      ++iter;
      // Check pass: per check, the usual two-minimum trick gives every edge
      // the smallest extrinsic magnitude among its siblings. In the
      // positive-favors-bit-1 convention tanh(m/2) = (-1)^deg * prod_others
      // tanh(L_o/2), so odd-degree checks flip the plain product of signs.
      for (int c = 0; c + 1 < static_cast<int>(check_offset_.size()); ++c) {
        const int begin = check_offset_[c], end = check_offset_[c + 1];
        double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
        int argmin = begin;
        int parity = (end - begin) & 1;
        for (int e = begin; e < end; ++e) {
          const double a = app[edge_var_[e]] - beta[e];
          alpha[e] = a;
          parity ^= std::signbit(a) ? 1 : 0;
          const double mag = std::fabs(a);
          if (mag < min1) {
            min2 = min1;
            min1 = mag;
            argmin = e;
          } else if (mag < min2) {
            min2 = mag;
          }
        }
        for (int e = begin; e < end; ++e) {
          const double mag = (e == argmin) ? min2 : min1;
          const int sign = parity ^ (std::signbit(alpha[e]) ? 1 : 0);
          beta[e] = scale_ * (sign ? -mag : mag);
        }
      }
      // Variable pass: aggregate LLR = channel plus every incident check message.
      for (int k = 0; k < n_vars_; ++k) {
        double sum = channel_llrs[k];
        for (int i = var_offset_[k]; i < var_offset_[k + 1]; ++i) sum += beta[var_edge_[i]];
        app[k] = sum;
      }
      if (iter <= trace_iters) trace.app_llrs.push_back(app);
      trace.syndrome_ok = syndrome_from_app(app);
    }

    trace.iterations_used = iter;
    trace.messages = std::move(beta);
    trace.hard_decision.resize(n_vars_);
    for (int k = 0; k < n_vars_; ++k)
      trace.hard_decision[k] = app[k] >= 0.0 ? 1 : 0;
    return trace;
  }

 private:
  template <typename MapFn>
  void build(const std::vector<std::vector<int>>& rows, MapFn&& to_local) {
    if (rows.empty()) throw std::invalid_argument("decoder: no checks");
    check_offset_.reserve(rows.size() + 1);
    check_offset_.push_back(0);
    for (const auto& row : rows) {
      for (int k : row) edge_var_.push_back(to_local(k));
      check_offset_.push_back(static_cast<int>(edge_var_.size()));
    }
    var_offset_.assign(n_vars_ + 1, 0);
    for (int v : edge_var_) ++var_offset_[v + 1];
    for (int k = 0; k < n_vars_; ++k) var_offset_[k + 1] += var_offset_[k];
    var_edge_.resize(edge_var_.size());
    std::vector<int> cursor(var_offset_.begin(), var_offset_.end() - 1);
    for (int e = 0; e < static_cast<int>(edge_var_.size()); ++e)
      var_edge_[cursor[edge_var_[e]]++] = e;
  }

  bool syndrome_from_app(const std::vector<double>& app) const {
    for (int c = 0; c + 1 < static_cast<int>(check_offset_.size()); ++c) {
      int parity = 0;
      for (int e = check_offset_[c]; e < check_offset_[c + 1]; ++e)
        parity ^= app[edge_var_[e]] >= 0.0 ? 1 : 0;
      if (parity) return false;
    }
    return true;
  }

  double scale_;
  int n_vars_ = 0;
  std::vector<int> check_offset_;  // CSR over checks
  std::vector<int> edge_var_;      // local variable of each edge, check-major
  std::vector<int> var_offset_;    // CSR over variables
  std::vector<int> var_edge_;      // edge ids per variable
};

// One-shot convenience wrappers.
inline DecoderTrace min_sum_decode(const ParityCheckMatrix& h, std::span<const double> llrs,
                                   int max_iter, int trace_iters, double scale = 1.0) {
  return MinSumDecoder(h, scale).decode(llrs, max_iter, trace_iters);
}

inline DecoderTrace min_sum_decode(const ParityCheckMatrix& h, const SubcodeView& view,
                                   std::span<const double> llrs, int max_iter, int trace_iters,
                                   double scale = 1.0) {
  return MinSumDecoder(h, view, scale).decode(llrs, max_iter, trace_iters);
}

}  // namespace eharq
