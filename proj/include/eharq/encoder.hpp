#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "eharq/ldpc.hpp"

namespace eharq {

// Systematic encoder derived from the parity-check matrix by Gauss-Jordan
// elimination over GF(2). Information bits live on the free (non-pivot)
// columns; each pivot column is the XOR of a fixed subset of them. Works for
// rank-deficient matrices: the true rank decides how many parity bits exist.
class GeneratorMapping {
 public:
  static GeneratorMapping derive(const ParityCheckMatrix& h) {
    GeneratorMapping g;
    g.n_vars_ = h.n_vars();
    const int words = (g.n_vars_ + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(h.n_checks(),
                                                 std::vector<std::uint64_t>(words, 0));
    for (int m = 0; m < h.n_checks(); ++m)
      for (int k : h.check_vars(m)) rows[m][k / 64] ^= 1ULL << (k % 64);

    // Gauss-Jordan: after this loop the surviving rows are in reduced row
    // echelon form, one pivot column each.
    std::vector<int> pivot_of_row;
    int next_row = 0;
    for (int col = 0; col < g.n_vars_ && next_row < h.n_checks(); ++col) {
      int found = -1;
      for (int r = next_row; r < h.n_checks(); ++r) {
        if (rows[r][col / 64] >> (col % 64) & 1ULL) {
          found = r;
          break;
        }
      }
      if (found < 0) continue;
      std::swap(rows[next_row], rows[found]);
      for (int r = 0; r < h.n_checks(); ++r) {
        if (r != next_row && (rows[r][col / 64] >> (col % 64) & 1ULL))
          for (int w = 0; w < words; ++w) rows[r][w] ^= rows[next_row][w];
      }
      pivot_of_row.push_back(col);
      ++next_row;
    }
    g.rank_ = next_row;
    g.pivot_cols_ = pivot_of_row;

    std::vector<bool> is_pivot(g.n_vars_, false);
    for (int col : g.pivot_cols_) is_pivot[col] = true;
    std::vector<int> info_index_of_col(g.n_vars_, -1);
    for (int k = 0; k < g.n_vars_; ++k) {
      if (!is_pivot[k]) {
        info_index_of_col[k] = static_cast<int>(g.info_positions_.size());
        g.info_positions_.push_back(k);
      }
    }

    // Per pivot: bitmask over the information vector of the free columns the
    // pivot bit must cancel (row reads x_pivot + sum of those x_free = 0).
    g.info_words_ = (static_cast<int>(g.info_positions_.size()) + 63) / 64;
    g.pivot_masks_.assign(static_cast<std::size_t>(g.rank_) * g.info_words_, 0);
    for (int r = 0; r < g.rank_; ++r) {
      for (int k = 0; k < g.n_vars_; ++k) {
        if (k == g.pivot_cols_[r] || !(rows[r][k / 64] >> (k % 64) & 1ULL)) continue;
        const int idx = info_index_of_col[k];
        g.pivot_masks_[static_cast<std::size_t>(r) * g.info_words_ + idx / 64] ^=
            1ULL << (idx % 64);
      }
    }
    return g;
  }

  int n_vars() const { return n_vars_; }
  int rank() const { return rank_; }
  int n_info() const { return static_cast<int>(info_positions_.size()); }
  const std::vector<int>& info_positions() const { return info_positions_; }

  std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const {
    if (static_cast<int>(info.size()) != n_info())
      throw std::invalid_argument("encode: expected " + std::to_string(n_info()) +
                                  " information bits, got " + std::to_string(info.size()));
    std::vector<std::uint64_t> info_bits(info_words_, 0);
    std::vector<std::uint8_t> word(n_vars_, 0);
    for (int i = 0; i < n_info(); ++i) {
      if (info[i] > 1) throw std::invalid_argument("encode: bits must be 0 or 1");
      info_bits[i / 64] |= static_cast<std::uint64_t>(info[i]) << (i % 64);
      word[info_positions_[i]] = info[i];
    }
    for (int r = 0; r < rank_; ++r) {
      int parity = 0;
      for (int w = 0; w < info_words_; ++w)
        parity ^= std::popcount(pivot_masks_[static_cast<std::size_t>(r) * info_words_ + w] &
                                info_bits[w]) &
                  1;
      word[pivot_cols_[r]] = static_cast<std::uint8_t>(parity);
    }
    return word;
  }

 private:
  int n_vars_ = 0;
  int rank_ = 0;
  int info_words_ = 0;
  std::vector<int> info_positions_;
  std::vector<int> pivot_cols_;
  std::vector<std::uint64_t> pivot_masks_;
};

inline GeneratorMapping derive_generator(const ParityCheckMatrix& h) {
  return GeneratorMapping::derive(h);
}

inline std::vector<std::uint8_t> random_info_bits(int n, Rng& rng) {
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1ULL);
  return bits;
}

}  // namespace eharq
