#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "eharq/decoder.hpp"

namespace eharq {

// Soft bit-error-rate proxy: mean of 1/(1+|L|) over the word. Confident LLRs
// push their term toward 0, erased positions (L = 0) contribute 1.
inline double ber_estimate(std::span<const double> llrs) {
  if (llrs.empty()) throw std::invalid_argument("ber_estimate: empty LLR vector");
  double sum = 0.0;
  for (double l : llrs) sum += 1.0 / (1.0 + std::fabs(l));
  return sum / static_cast<double>(llrs.size());
}

// The decodability trace: ber_estimate of every recorded aggregate-LLR vector,
// index 0 being the channel input and index j the state after iteration j.
inline std::vector<double> vnr_sequence(const DecoderTrace& trace) {
  if (trace.app_llrs.empty()) throw std::invalid_argument("vnr_sequence: empty trace");
  std::vector<double> vnr;
  vnr.reserve(trace.app_llrs.size());
  for (const auto& llrs : trace.app_llrs) vnr.push_back(ber_estimate(llrs));
  return vnr;
}

inline double euclidean_distance(std::span<const double> received,
                                 std::span<const double> reference) {
  if (received.size() != reference.size() || received.empty())
    throw std::invalid_argument("euclidean_distance: length mismatch or empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i) {
    const double d = received[i] - reference[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// Marker for history entries that reach before the start of the record stream.
inline constexpr double kMissingFeature = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Sliding-window means over strictly past records: output row t holds, for
// each window w, the per-column mean over rows t-w .. t-1. Rows without a full
// window carry the missing marker for that window's block. Row t never sees
// its own features, so these columns stay causal.
inline std::vector<std::vector<double>> history_features(
    const std::vector<std::vector<double>>& base, std::span<const int> windows) {
  const std::size_t n = base.size();
  if (n == 0) return {};
  const std::size_t dim = base[0].size();
  for (const auto& row : base)
    if (row.size() != dim) throw std::invalid_argument("history_features: ragged feature rows");
  for (int w : windows)
    if (w <= 0) throw std::invalid_argument("history_features: window sizes must be positive");

  std::vector<std::vector<double>> out(n, std::vector<double>(windows.size() * dim));
  // Prefix sums make every window mean O(1).
  std::vector<std::vector<double>> prefix(n + 1, std::vector<double>(dim, 0.0));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t c = 0; c < dim; ++c) prefix[t + 1][c] = prefix[t][c] + base[t][c];

  for (std::size_t t = 0; t < n; ++t) {
    std::size_t col = 0;
    for (int w : windows) {
      if (t < static_cast<std::size_t>(w)) {
        for (std::size_t c = 0; c < dim; ++c) out[t][col++] = kMissingFeature;
      } else {
        for (std::size_t c = 0; c < dim; ++c)
          out[t][col++] = (prefix[t][c] - prefix[t - w][c]) / static_cast<double>(w);
      }
    }
  }
  return out;
}

}  // namespace eharq
