#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "eharq/csv.hpp"
#include "eharq/stats.hpp"

namespace eharq {

// Confusion state at one threshold. Positive = block error (NACK); a record
// is predicted positive when its score >= theta.
struct OperatingPoint {
  double threshold = 0.0;
  std::int64_t fn = 0, fp = 0, tp = 0, tn = 0;
  double fnr = 0.0, fpr = 0.0, precision = 1.0, recall = 0.0;
  bool low_confidence = false;  // fewer than 100 positive labels behind the FNR estimate

  void finish() {
    const auto rate = [](std::int64_t num, std::int64_t den) {
      return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    fnr = rate(fn, fn + tp);
    fpr = rate(fp, fp + tn);
    // Empty prediction set keeps the PR convention precision = 1.
    precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
    recall = 1.0 - fnr;
    low_confidence = (fn + tp) < 100;
  }
};

struct CurveSet {
  std::vector<OperatingPoint> points;  // theta strictly decreasing, +inf sentinel first
  double auc_pr = 0.0;
};

inline Interval fnr_interval(const OperatingPoint& pt, double z = 1.959964) {
  return wilson_interval(pt.fn, pt.fn + pt.tp, z);
}

inline OperatingPoint confusion_at_threshold(std::span<const double> scores,
                                             std::span<const int> labels, double theta) {
  if (scores.empty() || scores.size() != labels.size())
    throw std::invalid_argument("confusion_at_threshold: empty input or length mismatch");
  OperatingPoint pt;
  pt.threshold = theta;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool positive = scores[i] >= theta;
    if (labels[i]) {
      positive ? ++pt.tp : ++pt.fn;
    } else {
      positive ? ++pt.fp : ++pt.tn;
    }
  }
  pt.finish();
  return pt;
}

namespace detail {

// One pass over the scores sorted descending, collapsing ties, yields every
// distinct-threshold operating point plus the predict-nothing sentinel.
inline CurveSet sweep_thresholds(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty() || scores.size() != labels.size())
    throw std::invalid_argument("curve: empty input or length mismatch");
  std::int64_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw std::invalid_argument("curve: non-finite score");
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("curve: labels must be 0 or 1");
    n_pos += labels[i];
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(scores.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("curve: need at least one positive and one negative label");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  CurveSet curve;
  OperatingPoint sentinel;
  sentinel.threshold = std::numeric_limits<double>::infinity();
  sentinel.fn = n_pos;
  sentinel.tn = n_neg;
  sentinel.finish();
  curve.points.push_back(sentinel);

  std::int64_t tp = 0, fp = 0;
  double auc = 0.0, prev_recall = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      labels[order[i]] ? ++tp : ++fp;
      ++i;
    }
    OperatingPoint pt;
    pt.threshold = s;
    pt.tp = tp;
    pt.fp = fp;
    pt.fn = n_pos - tp;
    pt.tn = n_neg - fp;
    pt.finish();
    // Average precision, right-continuous step rule over distinct thresholds.
    auc += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
    curve.points.push_back(pt);
  }
  curve.auc_pr = auc;
  return curve;
}

}  // namespace detail

inline CurveSet pr_curve_and_auc(std::span<const double> scores, std::span<const int> labels) {
  return detail::sweep_thresholds(scores, labels);
}

inline CurveSet fnr_fpr_curve(std::span<const double> scores, std::span<const int> labels) {
  return detail::sweep_thresholds(scores, labels);
}

struct ThresholdSelection {
  OperatingPoint point;
  // Set when the target sits below the curve's statistical resolution
  // 1/(#positives) (an empirical FNR that small is indistinguishable from 0),
  // or when no threshold attains it.
  bool target_unreachable = false;
};

// Largest threshold whose empirical FNR does not exceed the target. FNR is
// non-increasing as the threshold falls, so this is the first qualifying
// point in the stored (descending-theta) order.
inline ThresholdSelection threshold_for_target_fnr(const CurveSet& curve, double fnr_target) {
  if (curve.points.empty()) throw std::invalid_argument("threshold_for_target_fnr: empty curve");
  ThresholdSelection sel;
  const std::int64_t n_pos = curve.points.front().fn + curve.points.front().tp;
  sel.target_unreachable = n_pos > 0 && fnr_target < 1.0 / static_cast<double>(n_pos);
  for (const auto& pt : curve.points) {
    if (pt.fnr <= fnr_target) {
      sel.point = pt;
      return sel;
    }
  }
  sel.target_unreachable = true;
  sel.point = *std::min_element(
      curve.points.begin(), curve.points.end(),
      [](const OperatingPoint& a, const OperatingPoint& b) { return a.fnr < b.fnr; });
  return sel;
}

// Pinned curve export: `theta,fn,fp,tp,tn,fnr,fpr,precision,recall`.
inline void write_curve_csv(const CurveSet& curve, std::ostream& out) {
  out << "theta,fn,fp,tp,tn,fnr,fpr,precision,recall\n";
  for (const auto& pt : curve.points) {
    out << format_g17(pt.threshold) << ',' << pt.fn << ',' << pt.fp << ',' << pt.tp << ','
        << pt.tn << ',' << format_g17(pt.fnr) << ',' << format_g17(pt.fpr) << ','
        << format_g17(pt.precision) << ',' << format_g17(pt.recall) << '\n';
  }
  if (!out) throw std::runtime_error("curve export: write failure");
}

}  // namespace eharq
