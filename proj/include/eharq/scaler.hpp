#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace eharq {

// Per-feature standardization fit on the training split only; test data is
// transformed with the training statistics. Standard deviations are the
// population kind (divide by n).
struct StandardScaler {
  std::vector<double> mean;
  std::vector<double> scale;          // population sd; 1.0 where a column is constant
  std::vector<std::uint8_t> constant; // columns that pass through centered only
  std::vector<std::string> warnings;

  std::size_t dim() const { return mean.size(); }

  std::vector<double> transform_row(const std::vector<double>& row) const {
    if (row.size() != dim()) throw std::invalid_argument("scaler: dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean[c]) / scale[c];
    return out;
  }

  std::vector<std::vector<double>> transform(const std::vector<std::vector<double>>& rows) const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(transform_row(row));
    return out;
  }
};

inline StandardScaler fit_scaler(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("scaler: need at least two training rows");
  const std::size_t dim = rows[0].size();
  if (dim == 0) throw std::invalid_argument("scaler: empty feature rows");
  StandardScaler s;
  s.mean.assign(dim, 0.0);
  s.scale.assign(dim, 1.0);
  s.constant.assign(dim, 0);
  const double n = static_cast<double>(rows.size());
  for (const auto& row : rows) {
    if (row.size() != dim) throw std::invalid_argument("scaler: ragged feature rows");
    for (std::size_t c = 0; c < dim; ++c) s.mean[c] += row[c];
  }
  for (std::size_t c = 0; c < dim; ++c) s.mean[c] /= n;
  std::vector<double> var(dim, 0.0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = row[c] - s.mean[c];
      var[c] += d * d;
    }
  for (std::size_t c = 0; c < dim; ++c) {
    var[c] /= n;
    if (var[c] > 0.0) {
      s.scale[c] = std::sqrt(var[c]);
    } else {
      s.constant[c] = 1;
      s.warnings.push_back("feature column " + std::to_string(c) +
                           " is constant; centering only");
    }
  }
  return s;
}

inline std::vector<std::vector<double>> apply_scaler(const StandardScaler& s,
                                                     const std::vector<std::vector<double>>& rows) {
  return s.transform(rows);
}

}  // namespace eharq
