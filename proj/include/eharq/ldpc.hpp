#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eharq/rng.hpp"

namespace eharq {

// Sparse binary parity-check matrix stored as adjacency lists on both sides of
// the Tanner graph. Indices are 0-based internally; rows and columns are kept
// sorted and duplicate-free.
class ParityCheckMatrix {
 public:
  ParityCheckMatrix() = default;

  // Builds from per-check variable lists (0-based) and validates the invariants.
  static ParityCheckMatrix from_check_lists(int n_vars,
                                            std::vector<std::vector<int>> check_to_vars) {
    ParityCheckMatrix h;
    h.n_vars_ = n_vars;
    h.n_checks_ = static_cast<int>(check_to_vars.size());
    h.check_to_vars_ = std::move(check_to_vars);
    if (h.n_vars_ <= 0) throw std::invalid_argument("parity-check matrix: n_vars must be positive");
    if (h.n_checks_ <= 0) throw std::invalid_argument("parity-check matrix: no checks");
    h.var_to_checks_.assign(h.n_vars_, {});
    for (int m = 0; m < h.n_checks_; ++m) {
      auto& row = h.check_to_vars_[m];
      if (row.empty())
        throw std::invalid_argument("parity-check matrix: empty check row " + std::to_string(m));
      std::sort(row.begin(), row.end());
      for (std::size_t i = 0; i < row.size(); ++i) {
        const int k = row[i];
        if (k < 0 || k >= h.n_vars_)
          throw std::invalid_argument("parity-check matrix: variable index " + std::to_string(k) +
                                      " out of range in check " + std::to_string(m));
        if (i > 0 && row[i] == row[i - 1])
          throw std::invalid_argument("parity-check matrix: duplicate variable " +
                                      std::to_string(k) + " in check " + std::to_string(m));
        h.var_to_checks_[k].push_back(m);
      }
    }
    for (int k = 0; k < h.n_vars_; ++k) {
      if (h.var_to_checks_[k].empty())
        throw std::invalid_argument("parity-check matrix: variable " + std::to_string(k) +
                                    " appears in no check");
    }
    return h;
  }

  int n_checks() const { return n_checks_; }
  int n_vars() const { return n_vars_; }
  int n_edges() const {
    int total = 0;
    for (const auto& row : check_to_vars_) total += static_cast<int>(row.size());
    return total;
  }

  const std::vector<int>& check_vars(int m) const { return check_to_vars_[m]; }
  const std::vector<int>& var_checks(int k) const { return var_to_checks_[k]; }
  const std::vector<std::vector<int>>& rows() const { return check_to_vars_; }

  // Hard-decision syndrome: true iff every check sums to zero mod 2.
  bool syndrome_ok(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) != n_vars_)
      throw std::invalid_argument("syndrome_ok: word length mismatch");
    for (const auto& row : check_to_vars_) {
      int parity = 0;
      for (int k : row) parity ^= bits[k];
      if (parity) return false;
    }
    return true;
  }

 private:
  int n_checks_ = 0;
  int n_vars_ = 0;
  std::vector<std::vector<int>> check_to_vars_;
  std::vector<std::vector<int>> var_to_checks_;
};

// Rows of a parent matrix restricted to the variables they touch: decoding on
// this view runs belief propagation on the induced subgraph only.
struct SubcodeView {
  const ParityCheckMatrix* parent = nullptr;
  std::vector<int> row_subset;  // parent check indices, ascending
  std::vector<int> var_subset;  // parent variable indices incident to the rows, ascending
  double row_fraction = 1.0;
};

// Keeps the first round(fraction * n_checks) rows. The variable set is exactly
// the union of the kept rows' supports.
inline SubcodeView extract_subcode(const ParityCheckMatrix& h, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("extract_subcode: fraction must lie in (0, 1]");
  const int n_rows = static_cast<int>(std::lround(fraction * h.n_checks()));
  if (n_rows <= 0)
    throw std::invalid_argument("extract_subcode: fraction " + std::to_string(fraction) +
                                " yields zero rows");
  SubcodeView view;
  view.parent = &h;
  view.row_fraction = fraction;
  view.row_subset.resize(n_rows);
  std::iota(view.row_subset.begin(), view.row_subset.end(), 0);
  std::set<int> vars;
  for (int m : view.row_subset) {
    const auto& row = h.check_vars(m);
    vars.insert(row.begin(), row.end());
  }
  view.var_subset.assign(vars.begin(), vars.end());
  return view;
}

// Gathers the entries of a full-length vector at the view's variable positions.
template <typename T>
std::vector<T> gather_subcode(const SubcodeView& view, std::span<const T> full) {
  if (static_cast<int>(full.size()) != view.parent->n_vars())
    throw std::invalid_argument("gather_subcode: vector length mismatch");
  std::vector<T> out;
  out.reserve(view.var_subset.size());
  for (int k : view.var_subset) out.push_back(full[k]);
  return out;
}

// Regular Gallager ensemble: `col_weight` stacked bands, each a permuted block
// structure in which every check takes `row_weight` consecutive variables.
// Bands use disjoint check sets, so no (check, variable) pair can repeat.
inline ParityCheckMatrix gallager_regular(int n_vars, int col_weight, int row_weight,
                                          std::uint64_t seed) {
  if (n_vars <= 0 || col_weight <= 0 || row_weight <= 1)
    throw std::invalid_argument("gallager_regular: degrees must be positive (row weight > 1)");
  if (n_vars % row_weight != 0)
    throw std::invalid_argument("gallager_regular: n_vars must be divisible by row_weight");
  const int checks_per_band = n_vars / row_weight;
  const int n_checks = col_weight * checks_per_band;
  std::vector<std::vector<int>> rows(n_checks);
  std::vector<int> perm(n_vars);
  std::iota(perm.begin(), perm.end(), 0);
  for (int band = 0; band < col_weight; ++band) {
    if (band > 0) {
      Rng rng = substream(seed, stream_tag::kCode, static_cast<std::uint64_t>(band));
      for (int i = n_vars - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[i], perm[j]);
      }
    }
    for (int c = 0; c < checks_per_band; ++c) {
      auto& row = rows[band * checks_per_band + c];
      row.assign(perm.begin() + static_cast<std::ptrdiff_t>(c) * row_weight,
                 perm.begin() + static_cast<std::ptrdiff_t>(c + 1) * row_weight);
    }
  }
  return ParityCheckMatrix::from_check_lists(n_vars, std::move(rows));
}

}  // namespace eharq
