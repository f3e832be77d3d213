#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eharq/csv.hpp"
#include "eharq/features.hpp"

namespace eharq {

// Labeled feature table backed by the dataset CSV layout: `idx,label,<features...>`.
// Missing values (empty CSV fields) are NaN in memory.
struct DataTable {
  std::vector<std::string> columns;  // feature column names, in file order
  std::vector<std::int64_t> idx;
  std::vector<int> labels;
  std::vector<std::vector<double>> rows;  // one feature vector per record

  std::size_t n_rows() const { return rows.size(); }

  int column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
      throw std::invalid_argument("data table: no column named '" + name + "'");
    return static_cast<int>(it - columns.begin());
  }

  // Sub-table of the named feature columns, dropping rows with missing values.
  // Row order is preserved; `kept` reports which original rows survived.
  DataTable select(const std::vector<std::string>& names, std::vector<std::size_t>* kept = nullptr) const {
    std::vector<int> cols;
    cols.reserve(names.size());
    for (const auto& name : names) cols.push_back(column_index(name));
    DataTable out;
    out.columns = names;
    if (kept) kept->clear();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::vector<double> row;
      row.reserve(cols.size());
      bool complete = true;
      for (int c : cols) {
        const double v = rows[r][static_cast<std::size_t>(c)];
        if (is_missing(v)) {
          complete = false;
          break;
        }
        row.push_back(v);
      }
      if (!complete) continue;
      out.rows.push_back(std::move(row));
      out.labels.push_back(labels[r]);
      out.idx.push_back(idx[r]);
      if (kept) kept->push_back(r);
    }
    return out;
  }
};

inline DataTable read_data_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("data table: empty input");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "idx" || header[1] != "label")
    throw std::runtime_error("data table: header must start with idx,label");
  DataTable table;
  table.columns.assign(header.begin() + 2, header.end());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("data table line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    table.idx.push_back(parse_csv_int(fields[0], line_no));
    const long long label = parse_csv_int(fields[1], line_no);
    if (label != 0 && label != 1)
      throw std::runtime_error("data table line " + std::to_string(line_no) +
                               ": label must be 0 or 1");
    table.labels.push_back(static_cast<int>(label));
    std::vector<double> row;
    row.reserve(fields.size() - 2);
    for (std::size_t i = 2; i < fields.size(); ++i)
      row.push_back(parse_csv_double(fields[i], line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline void write_data_table(const DataTable& table, std::ostream& out) {
  out << "idx,label";
  for (const auto& name : table.columns) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << table.idx[r] << ',' << table.labels[r];
    for (double v : table.rows[r]) {
      out << ',';
      if (!is_missing(v)) out << format_g17(v);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("data table: write failure");
}

inline constexpr int kDefaultHistoryWindows[] = {1, 2, 5, 9};

// Appends history-mean columns h{w}_{base} for each window, computed over
// strictly past records in row order. Base columns default to every vnr_*
// column plus eucd.
inline DataTable augment_with_history(const DataTable& table,
                                      std::span<const int> windows = kDefaultHistoryWindows,
                                      std::vector<std::string> base_columns = {}) {
  if (base_columns.empty()) {
    for (const auto& name : table.columns)
      if (name.rfind("vnr_", 0) == 0 || name == "eucd") base_columns.push_back(name);
  }
  std::vector<int> cols;
  cols.reserve(base_columns.size());
  for (const auto& name : base_columns) cols.push_back(table.column_index(name));

  std::vector<std::vector<double>> base(table.n_rows());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    base[r].reserve(cols.size());
    for (int c : cols) base[r].push_back(table.rows[r][static_cast<std::size_t>(c)]);
  }
  const auto history = history_features(base, windows);

  DataTable out = table;
  for (int w : windows) {
    for (const auto& name : base_columns) {
      // vnr_3 contributes h{w}_vnr3, eucd contributes h{w}_eucd.
      std::string base = name;
      if (base.rfind("vnr_", 0) == 0) base = "vnr" + base.substr(4);
      out.columns.push_back("h" + std::to_string(w) + "_" + base);
    }
  }
  for (std::size_t r = 0; r < out.n_rows(); ++r)
    out.rows[r].insert(out.rows[r].end(), history[r].begin(), history[r].end());
  return out;
}

}  // namespace eharq
