#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace eharq {

struct LrModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_strength = 0.0;
  double class_weight_pos = 1.0;
  double class_weight_neg = 1.0;
};

inline double lr_score(const LrModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size())
    throw std::invalid_argument("lr_score: dimension mismatch");
  double z = model.bias;
  for (std::size_t c = 0; c < features.size(); ++c) z += model.weights[c] * features[c];
  return 1.0 / (1.0 + std::exp(-z));
}

inline std::vector<double> lr_score_batch(const LrModel& model,
                                          const std::vector<std::vector<double>>& rows) {
  std::vector<double> scores;
  scores.reserve(rows.size());
  for (const auto& row : rows) scores.push_back(lr_score(model, row));
  return scores;
}

namespace detail {

// Stable log(1 + exp(-z)) for the cross-entropy of a positive label.
inline double softplus_neg(double z) {
  return std::max(0.0, -z) + std::log1p(std::exp(-std::fabs(z)));
}

// Cholesky solve of a (small) symmetric positive-definite system in place.
inline std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (sum <= 0.0) throw std::runtime_error("logistic solver: Hessian not positive definite");
        a[i * n + i] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
    b[i] = sum / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double sum = b[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= a[k * n + i] * b[k];
    b[i] = sum / a[i * n + i];
  }
  return b;
}

}  // namespace detail

// Class-weighted, L2-regularized logistic regression by damped Newton steps.
// Objective: sum_i cw(y_i) * CE_i + (lambda/2)*||w||^2, bias unpenalized;
// class weight for class c is n_total / (2 * n_c). Converged when the
// gradient infinity-norm drops to `tolerance`.
inline LrModel fit_logistic_regression(const std::vector<std::vector<double>>& rows,
                                       std::span<const int> labels, double lambda,
                                       double tolerance = 1e-8, int max_iter = 200) {
  if (rows.empty() || rows.size() != labels.size())
    throw std::invalid_argument("logistic: empty training set or length mismatch");
  if (lambda < 0.0) throw std::invalid_argument("logistic: lambda must be nonnegative");
  const std::size_t dim = rows[0].size();
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) throw std::invalid_argument("logistic: ragged feature rows");
    n_pos += labels[i] ? 1 : 0;
  }
  if (n_pos == 0 || n_pos == rows.size())
    throw std::invalid_argument("logistic: training set holds a single class");

  LrModel model;
  model.weights.assign(dim, 0.0);
  model.l2_strength = lambda;
  const double n = static_cast<double>(rows.size());
  model.class_weight_pos = n / (2.0 * static_cast<double>(n_pos));
  model.class_weight_neg = n / (2.0 * static_cast<double>(rows.size() - n_pos));

  const std::size_t p = dim + 1;  // weights then bias
  std::vector<double> grad(p), hess(p * p), step;

  const auto loss_at = [&](const std::vector<double>& w, double b) {
    double loss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double z = b;
      for (std::size_t c = 0; c < dim; ++c) z += w[c] * rows[i][c];
      const double cw = labels[i] ? model.class_weight_pos : model.class_weight_neg;
      loss += cw * detail::softplus_neg(labels[i] ? z : -z);
    }
    for (double wc : w) loss += 0.5 * lambda * wc * wc;
    return loss;
  };

  double loss = loss_at(model.weights, model.bias);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double z = model.bias;
      for (std::size_t c = 0; c < dim; ++c) z += model.weights[c] * rows[i][c];
      const double prob = 1.0 / (1.0 + std::exp(-z));
      const double cw = labels[i] ? model.class_weight_pos : model.class_weight_neg;
      const double resid = cw * (prob - (labels[i] ? 1.0 : 0.0));
      const double curv = cw * prob * (1.0 - prob);
      for (std::size_t a = 0; a < p; ++a) {
        const double xa = a < dim ? rows[i][a] : 1.0;
        grad[a] += resid * xa;
        for (std::size_t b = 0; b <= a; ++b) {
          const double xb = b < dim ? rows[i][b] : 1.0;
          hess[a * p + b] += curv * xa * xb;
        }
      }
    }
    for (std::size_t c = 0; c < dim; ++c) {
      grad[c] += lambda * model.weights[c];
      hess[c * p + c] += lambda;
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a + 1; b < p; ++b) hess[a * p + b] = hess[b * p + a];

    double grad_inf = 0.0;
    for (double g : grad) grad_inf = std::max(grad_inf, std::fabs(g));
    if (grad_inf <= tolerance) return model;

    // Tiny ridge on the bias keeps the factorization alive when every
    // prediction saturates; it vanishes as the step shrinks the gradient.
    auto hess_try = hess;
    hess_try[p * p - 1] += 1e-12;
    step = detail::solve_spd(std::move(hess_try), grad);

    double alpha = 1.0;
    for (int back = 0; back < 60; ++back) {
      std::vector<double> w = model.weights;
      for (std::size_t c = 0; c < dim; ++c) w[c] -= alpha * step[c];
      const double b = model.bias - alpha * step[dim];
      const double trial = loss_at(w, b);
      if (trial <= loss) {
        model.weights = std::move(w);
        model.bias = b;
        loss = trial;
        break;
      }
      alpha *= 0.5;
    }
  }
  throw std::runtime_error("logistic: did not reach the gradient tolerance");
}

}  // namespace eharq
