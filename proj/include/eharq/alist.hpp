#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eharq/ldpc.hpp"

namespace eharq {

// Thrown on malformed alist input; carries the 1-based line number.
class AlistParseError : public std::runtime_error {
 public:
  AlistParseError(int line, const std::string& what)
      : std::runtime_error("alist line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

// Pre-tokenized view of the input: integers grouped by line. The header and
// degree sections are consumed token by token (they may wrap lines); each
// neighbor list must sit on its own line, which is how the format is written.
class AlistCursor {
 public:
  explicit AlistCursor(std::istream& in) {
    std::string text;
    int line_no = 0;
    while (std::getline(in, text)) {
      ++line_no;
      std::istringstream tokens(text);
      std::vector<int> values;
      std::string token;
      while (tokens >> token) {
        try {
          std::size_t pos = 0;
          values.push_back(std::stoi(token, &pos));
          if (pos != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
          throw AlistParseError(line_no, "not an integer: '" + token + "'");
        }
      }
      if (!values.empty()) {
        lines_.push_back(std::move(values));
        line_numbers_.push_back(line_no);
      }
    }
    last_line_ = line_no;
  }

  int next_int(const char* what) {
    if (line_ >= lines_.size())
      throw AlistParseError(last_line_, std::string("unexpected end of input, expected ") + what);
    const int value = lines_[line_][token_];
    if (++token_ == lines_[line_].size()) {
      token_ = 0;
      ++line_;
    }
    return value;
  }

  // Remaining integers on the current (or next non-empty) line, consumed whole.
  std::vector<int> next_line(const char* what) {
    if (line_ >= lines_.size())
      throw AlistParseError(last_line_, std::string("unexpected end of input, expected ") + what);
    std::vector<int> values(lines_[line_].begin() + static_cast<std::ptrdiff_t>(token_),
                            lines_[line_].end());
    token_ = 0;
    ++line_;
    return values;
  }

  int current_line_number() const {
    return line_ < lines_.size() ? line_numbers_[line_] : last_line_;
  }

 private:
  std::vector<std::vector<int>> lines_;
  std::vector<int> line_numbers_;
  std::size_t line_ = 0;
  std::size_t token_ = 0;
  int last_line_ = 0;
};

}  // namespace detail

// Reads the alist sparse-matrix format: header "n_vars n_checks", maximum
// degrees, per-column and per-row degrees, then 1-based neighbor lists (one
// line per node). Zero entries — the traditional padding written for
// irregular codes — are accepted and skipped.
inline ParityCheckMatrix parse_alist(std::istream& in) {
  detail::AlistCursor cursor(in);
  const int header_line = cursor.current_line_number();
  const int n_vars = cursor.next_int("n_vars");
  const int n_checks = cursor.next_int("n_checks");
  if (n_vars <= 0 || n_checks <= 0)
    throw AlistParseError(header_line, "matrix dimensions must be positive");
  const int max_col_deg = cursor.next_int("max column degree");
  const int max_row_deg = cursor.next_int("max row degree");
  if (max_col_deg <= 0 || max_row_deg <= 0)
    throw AlistParseError(cursor.current_line_number(), "maximum degrees must be positive");

  std::vector<int> col_deg(n_vars), row_deg(n_checks);
  for (int k = 0; k < n_vars; ++k) {
    const int line = cursor.current_line_number();
    col_deg[k] = cursor.next_int("column degree");
    if (col_deg[k] <= 0 || col_deg[k] > max_col_deg)
      throw AlistParseError(line, "column degree " + std::to_string(col_deg[k]) +
                                      " out of range for variable " + std::to_string(k + 1));
  }
  for (int m = 0; m < n_checks; ++m) {
    const int line = cursor.current_line_number();
    row_deg[m] = cursor.next_int("row degree");
    if (row_deg[m] <= 0 || row_deg[m] > max_row_deg)
      throw AlistParseError(line, "row degree " + std::to_string(row_deg[m]) +
                                      " out of range for check " + std::to_string(m + 1));
  }

  const auto read_list = [&cursor](int expected, int bound, const std::string& node) {
    const int line = cursor.current_line_number();
    std::vector<int> raw = cursor.next_line("neighbor list");
    std::vector<int> list;
    for (int value : raw) {
      if (value == 0) continue;  // padding
      if (value < 0 || value > bound)
        throw AlistParseError(line, "index " + std::to_string(value) + " out of range in list for " + node);
      list.push_back(value - 1);
    }
    if (static_cast<int>(list.size()) != expected)
      throw AlistParseError(line, "list for " + node + " holds " + std::to_string(list.size()) +
                                      " entries, degree says " + std::to_string(expected));
    return list;
  };

  // Column lists come first; they are cross-checked against the row lists below.
  std::vector<std::vector<int>> col_lists(n_vars);
  for (int k = 0; k < n_vars; ++k)
    col_lists[k] = read_list(col_deg[k], n_checks, "variable " + std::to_string(k + 1));
  std::vector<std::vector<int>> row_lists(n_checks);
  for (int m = 0; m < n_checks; ++m)
    row_lists[m] = read_list(row_deg[m], n_vars, "check " + std::to_string(m + 1));

  ParityCheckMatrix h = ParityCheckMatrix::from_check_lists(n_vars, std::move(row_lists));
  for (int k = 0; k < n_vars; ++k) {
    auto cols = col_lists[k];
    std::sort(cols.begin(), cols.end());
    if (cols != h.var_checks(k))
      throw AlistParseError(0, "column list for variable " + std::to_string(k + 1) +
                                   " disagrees with the row lists");
  }
  return h;
}

inline ParityCheckMatrix parse_alist_string(const std::string& text) {
  std::istringstream in(text);
  return parse_alist(in);
}

// Writes unpadded alist: every neighbor list carries exactly its degree.
inline void write_alist(const ParityCheckMatrix& h, std::ostream& out) {
  int max_col = 0, max_row = 0;
  for (int k = 0; k < h.n_vars(); ++k)
    max_col = std::max(max_col, static_cast<int>(h.var_checks(k).size()));
  for (int m = 0; m < h.n_checks(); ++m)
    max_row = std::max(max_row, static_cast<int>(h.check_vars(m).size()));
  out << h.n_vars() << ' ' << h.n_checks() << '\n';
  out << max_col << ' ' << max_row << '\n';
  for (int k = 0; k < h.n_vars(); ++k)
    out << h.var_checks(k).size() << (k + 1 == h.n_vars() ? '\n' : ' ');
  for (int m = 0; m < h.n_checks(); ++m)
    out << h.check_vars(m).size() << (m + 1 == h.n_checks() ? '\n' : ' ');
  for (int k = 0; k < h.n_vars(); ++k) {
    const auto& checks = h.var_checks(k);
    for (std::size_t i = 0; i < checks.size(); ++i)
      out << checks[i] + 1 << (i + 1 == checks.size() ? '\n' : ' ');
  }
  for (int m = 0; m < h.n_checks(); ++m) {
    const auto& vars = h.check_vars(m);
    for (std::size_t i = 0; i < vars.size(); ++i)
      out << vars[i] + 1 << (i + 1 == vars.size() ? '\n' : ' ');
  }
}

inline std::string write_alist_string(const ParityCheckMatrix& h) {
  std::ostringstream out;
  write_alist(h, out);
  return out.str();
}

}  // namespace eharq
