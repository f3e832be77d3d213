#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eharq/rng.hpp"

namespace eharq {

// Row-major batch matrix.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;
  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

enum class ForwardMode {
  kInfer,             // running stats, no dropout
  kTrain,             // batch stats + running update, dropout active
  kTrainDeterministic // batch stats, no running update, no dropout (gradient checks)
};

// One trainable parameter array with its gradient accumulator.
struct ParamRef {
  std::string name;
  std::vector<double>* value;
  std::vector<double>* grad;
};

namespace sae_detail {

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Mat forward(const Mat& x, ForwardMode mode, Rng* dropout_rng) = 0;
  virtual Mat backward(const Mat& dy) = 0;
  virtual void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    (void)prefix;
    (void)out;
  }
  virtual void zero_grad() {}
  virtual std::string kind() const = 0;
};

class Linear : public Layer {
 public:
  Linear(int in, int out, Rng& init_rng) : in_(in), out_(out) {
    w_.resize(static_cast<std::size_t>(in) * out);
    b_.resize(out);
    dw_.assign(w_.size(), 0.0);
    db_.assign(b_.size(), 0.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : w_) v = (2.0 * init_rng.uniform01() - 1.0) * bound;
    for (auto& v : b_) v = (2.0 * init_rng.uniform01() - 1.0) * bound;
  }

  Mat forward(const Mat& x, ForwardMode, Rng*) override {
    x_ = x;
    Mat y(x.rows, out_);
    for (int r = 0; r < x.rows; ++r)
      for (int o = 0; o < out_; ++o) {
        double sum = b_[o];
        const double* wrow = &w_[static_cast<std::size_t>(o) * in_];
        for (int i = 0; i < in_; ++i) sum += wrow[i] * x(r, i);
        y(r, o) = sum;
      }
    return y;
  }

  Mat backward(const Mat& dy) override {
    Mat dx(x_.rows, in_);
    for (int r = 0; r < x_.rows; ++r)
      for (int o = 0; o < out_; ++o) {
        const double g = dy(r, o);
        db_[o] += g;
        double* dwrow = &dw_[static_cast<std::size_t>(o) * in_];
        const double* wrow = &w_[static_cast<std::size_t>(o) * in_];
        for (int i = 0; i < in_; ++i) {
          dwrow[i] += g * x_(r, i);
          dx(r, i) += g * wrow[i];
        }
      }
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override {
    out.push_back({prefix + ".weight", &w_, &dw_});
    out.push_back({prefix + ".bias", &b_, &db_});
  }
  void zero_grad() override {
    std::fill(dw_.begin(), dw_.end(), 0.0);
    std::fill(db_.begin(), db_.end(), 0.0);
  }
  std::string kind() const override { return "linear"; }

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  std::vector<double>& weights() { return w_; }
  std::vector<double>& biases() { return b_; }

 private:
  int in_, out_;
  std::vector<double> w_, b_, dw_, db_;
  Mat x_;
};

class BatchNorm : public Layer {
 public:
  explicit BatchNorm(int dim) : dim_(dim) {
    gamma_.assign(dim, 1.0);
    beta_.assign(dim, 0.0);
    dgamma_.assign(dim, 0.0);
    dbeta_.assign(dim, 0.0);
    running_mean_.assign(dim, 0.0);
    running_var_.assign(dim, 1.0);
  }

  Mat forward(const Mat& x, ForwardMode mode, Rng*) override {
    Mat y(x.rows, dim_);
    if (mode == ForwardMode::kInfer) {
      for (int c = 0; c < dim_; ++c) {
        const double s = 1.0 / std::sqrt(running_var_[c] + kEps);
        for (int r = 0; r < x.rows; ++r)
          y(r, c) = gamma_[c] * (x(r, c) - running_mean_[c]) * s + beta_[c];
      }
      return y;
    }
    if (x.rows < 2)
      throw std::invalid_argument("batch norm: training-mode batches need at least 2 rows");
    const double n = static_cast<double>(x.rows);
    xhat_ = Mat(x.rows, dim_);
    invstd_.assign(dim_, 0.0);
    for (int c = 0; c < dim_; ++c) {
      double mean = 0.0;
      for (int r = 0; r < x.rows; ++r) mean += x(r, c);
      mean /= n;
      double var = 0.0;
      for (int r = 0; r < x.rows; ++r) {
        const double d = x(r, c) - mean;
        var += d * d;
      }
      var /= n;  // biased, used for normalization
      const double s = 1.0 / std::sqrt(var + kEps);
      invstd_[c] = s;
      for (int r = 0; r < x.rows; ++r) {
        xhat_(r, c) = (x(r, c) - mean) * s;
        y(r, c) = gamma_[c] * xhat_(r, c) + beta_[c];
      }
      if (mode == ForwardMode::kTrain) {
        running_mean_[c] = (1.0 - kMomentum) * running_mean_[c] + kMomentum * mean;
        running_var_[c] =
            (1.0 - kMomentum) * running_var_[c] + kMomentum * var * n / (n - 1.0);
      }
    }
    return y;
  }

  Mat backward(const Mat& dy) override {
    const int n = dy.rows;
    const double nd = static_cast<double>(n);
    Mat dx(n, dim_);
    for (int c = 0; c < dim_; ++c) {
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
      for (int r = 0; r < n; ++r) {
        const double g = dy(r, c);
        dbeta_[c] += g;
        dgamma_[c] += g * xhat_(r, c);
        const double dxhat = g * gamma_[c];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat_(r, c);
      }
      for (int r = 0; r < n; ++r) {
        const double dxhat = dy(r, c) * gamma_[c];
        dx(r, c) =
            invstd_[c] / nd * (nd * dxhat - sum_dxhat - xhat_(r, c) * sum_dxhat_xhat);
      }
    }
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override {
    out.push_back({prefix + ".gamma", &gamma_, &dgamma_});
    out.push_back({prefix + ".beta", &beta_, &dbeta_});
  }
  void zero_grad() override {
    std::fill(dgamma_.begin(), dgamma_.end(), 0.0);
    std::fill(dbeta_.begin(), dbeta_.end(), 0.0);
  }
  std::string kind() const override { return "batch_norm"; }

  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  int dim() const { return dim_; }
  std::vector<double>& gamma() { return gamma_; }
  std::vector<double>& beta() { return beta_; }
  std::vector<double>& running_mean() { return running_mean_; }
  std::vector<double>& running_var() { return running_var_; }

 private:
  int dim_;
  std::vector<double> gamma_, beta_, dgamma_, dbeta_;
  std::vector<double> running_mean_, running_var_;
  Mat xhat_;
  std::vector<double> invstd_;
};

class Relu : public Layer {
 public:
  Mat forward(const Mat& x, ForwardMode, Rng*) override {
    x_ = x;
    Mat y = x;
    for (auto& v : y.a) v = std::max(0.0, v);
    return y;
  }
  Mat backward(const Mat& dy) override {
    Mat dx = dy;
    for (std::size_t i = 0; i < dx.a.size(); ++i)
      if (x_.a[i] <= 0.0) dx.a[i] = 0.0;
    return dx;
  }
  std::string kind() const override { return "relu"; }

 private:
  Mat x_;
};

class Dropout : public Layer {
 public:
  explicit Dropout(double p) : p_(p) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }

  Mat forward(const Mat& x, ForwardMode mode, Rng* rng) override {
    if (mode != ForwardMode::kTrain || p_ == 0.0) {
      mask_.clear();
      return x;
    }
    if (rng == nullptr) throw std::invalid_argument("dropout: training forward needs a stream");
    // Inverted dropout keeps inference a pure identity.
    mask_.resize(x.a.size());
    Mat y = x;
    const double keep = 1.0 - p_;
    for (std::size_t i = 0; i < y.a.size(); ++i) {
      mask_[i] = rng->uniform01() < keep ? 1.0 / keep : 0.0;
      y.a[i] *= mask_[i];
    }
    return y;
  }

  Mat backward(const Mat& dy) override {
    if (mask_.empty()) return dy;
    Mat dx = dy;
    for (std::size_t i = 0; i < dx.a.size(); ++i) dx.a[i] *= mask_[i];
    return dx;
  }
  std::string kind() const override { return "dropout"; }

 private:
  double p_;
  std::vector<double> mask_;
};

using LayerStack = std::vector<std::unique_ptr<Layer>>;

inline Mat run_forward(LayerStack& stack, Mat x, ForwardMode mode, Rng* rng) {
  for (auto& layer : stack) x = layer->forward(x, mode, rng);
  return x;
}

inline Mat run_backward(LayerStack& stack, Mat dy) {
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) dy = (*it)->backward(dy);
  return dy;
}

}  // namespace sae_detail

struct SaeTrainConfig {
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 256;
  int oversample_factor = 100;  // duplication count for each minority sample
  double lambda_rec = 1.0;      // weight of the reconstruction loss
  double dropout = 0.2;
  int patience = 5;  // epochs without validation-CE improvement before stopping; <=0 disables
  std::uint64_t seed = 0;

  void validate() const {
    if (learning_rate <= 0.0 || epochs <= 0 || batch_size < 2)
      throw std::invalid_argument("sae: learning rate/epochs positive, batch size >= 2");
    if (oversample_factor < 1) throw std::invalid_argument("sae: oversampling must be >= 1");
    if (lambda_rec < 0.0) throw std::invalid_argument("sae: lambda_rec must be nonnegative");
  }
};

struct SaeTrainLog {
  std::vector<double> train_loss;  // per epoch, mean joint loss over batches
  std::vector<double> val_ce;      // per epoch when a validation set is given
  int best_epoch = -1;
  int epochs_run = 0;
};

// Supervised autoencoder: encoder d->25->10->3 (each step Linear+BN+ReLU+Dropout),
// decoder 3->10->25 with a final plain Linear back to d, and a classifier head
// 3->10->5 (same blocks) with a final Linear to 2 logits + softmax. The head
// reads the bottleneck features; reconstruction and classification train jointly.
class SaeModel {
 public:
  SaeModel() = default;

  SaeModel(int input_dim, double dropout, std::uint64_t init_seed) : dim_(input_dim) {
    Rng init = substream(init_seed, stream_tag::kTraining, 0);
    build(dropout, init);
  }

  int input_dim() const { return dim_; }

  // Returns {reconstruction, class probabilities {P(no error), P(error)}}.
  std::pair<std::vector<double>, std::array<double, 2>> forward_single(
      std::span<const double> x, ForwardMode mode = ForwardMode::kInfer) {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("sae forward: expected " + std::to_string(dim_) +
                                  " features, got " + std::to_string(x.size()));
    if (mode != ForwardMode::kInfer)
      throw std::invalid_argument("sae forward: single rows are inference-only");
    Mat batch(1, dim_);
    for (int c = 0; c < dim_; ++c) batch(0, c) = x[c];
    const Mat bot = sae_detail::run_forward(encoder_, batch, mode, nullptr);
    const Mat rec = sae_detail::run_forward(decoder_, bot, mode, nullptr);
    const Mat logits = sae_detail::run_forward(head_, bot, mode, nullptr);
    std::vector<double> x_rec(rec.a.begin(), rec.a.end());
    return {std::move(x_rec), softmax_pair(logits(0, 0), logits(0, 1))};
  }

  double score(std::span<const double> x) { return forward_single(x).second[1]; }

  std::vector<double> score_batch(const std::vector<std::vector<double>>& rows) {
    std::vector<double> scores;
    scores.reserve(rows.size());
    if (rows.empty()) return scores;
    Mat batch(static_cast<int>(rows.size()), dim_);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<int>(rows[r].size()) != dim_)
        throw std::invalid_argument("sae score: dimension mismatch");
      for (int c = 0; c < dim_; ++c) batch(static_cast<int>(r), c) = rows[r][c];
    }
    const Mat bot = sae_detail::run_forward(encoder_, batch, ForwardMode::kInfer, nullptr);
    const Mat logits = sae_detail::run_forward(head_, bot, ForwardMode::kInfer, nullptr);
    for (int r = 0; r < logits.rows; ++r)
      scores.push_back(softmax_pair(logits(r, 0), logits(r, 1))[1]);
    return scores;
  }

  // Joint loss on a batch: lambda_rec * mean squared reconstruction error
  // (mean over rows and features) + mean cross entropy. Backward accumulates
  // parameter gradients scaled by loss_scale.
  double loss_and_backward(const Mat& x, std::span<const int> labels, double lambda_rec,
                           ForwardMode mode, Rng* dropout_rng, bool backward,
                           double loss_scale = 1.0) {
    if (x.rows != static_cast<int>(labels.size()))
      throw std::invalid_argument("sae loss: batch/label size mismatch");
    const Mat bot = sae_detail::run_forward(encoder_, x, mode, dropout_rng);
    const Mat rec = sae_detail::run_forward(decoder_, bot, mode, dropout_rng);
    const Mat logits = sae_detail::run_forward(head_, bot, mode, dropout_rng);
    const double n = static_cast<double>(x.rows);
    const double nd = n * static_cast<double>(dim_);

    double loss_rec = 0.0;
    for (std::size_t i = 0; i < rec.a.size(); ++i) {
      const double d = rec.a[i] - x.a[i];
      loss_rec += d * d;
    }
    loss_rec /= nd;

    double loss_ce = 0.0;
    Mat dlogits(logits.rows, 2);
    for (int r = 0; r < logits.rows; ++r) {
      const auto p = softmax_pair(logits(r, 0), logits(r, 1));
      const int y = labels[r];
      loss_ce -= std::log(std::max(p[y], 1e-300));
      dlogits(r, 0) = (p[0] - (y == 0 ? 1.0 : 0.0)) / n * loss_scale;
      dlogits(r, 1) = (p[1] - (y == 1 ? 1.0 : 0.0)) / n * loss_scale;
    }
    loss_ce /= n;

    const double loss = lambda_rec * loss_rec + loss_ce;
    if (!backward) return loss;

    Mat drec(rec.rows, rec.cols);
    for (std::size_t i = 0; i < rec.a.size(); ++i)
      drec.a[i] = lambda_rec * 2.0 * (rec.a[i] - x.a[i]) / nd * loss_scale;
    Mat dbot = sae_detail::run_backward(decoder_, drec);
    const Mat dbot_head = sae_detail::run_backward(head_, dlogits);
    for (std::size_t i = 0; i < dbot.a.size(); ++i) dbot.a[i] += dbot_head.a[i];
    sae_detail::run_backward(encoder_, dbot);
    return loss;
  }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    int i = 0;
    for (auto& l : encoder_) l->collect_params("encoder." + std::to_string(i++), out);
    i = 0;
    for (auto& l : decoder_) l->collect_params("decoder." + std::to_string(i++), out);
    i = 0;
    for (auto& l : head_) l->collect_params("head." + std::to_string(i++), out);
    return out;
  }

  void zero_grad() {
    for (auto& l : encoder_) l->zero_grad();
    for (auto& l : decoder_) l->zero_grad();
    for (auto& l : head_) l->zero_grad();
  }

  // Layer access for serialization and white-box tests.
  sae_detail::LayerStack& encoder() { return encoder_; }
  sae_detail::LayerStack& decoder() { return decoder_; }
  sae_detail::LayerStack& head() { return head_; }

  static std::array<double, 2> softmax_pair(double z0, double z1) {
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
  }

 private:
  void build(double dropout, Rng& init) {
    const auto fc = [&](sae_detail::LayerStack& stack, int in, int out) {
      stack.push_back(std::make_unique<sae_detail::Linear>(in, out, init));
      stack.push_back(std::make_unique<sae_detail::BatchNorm>(out));
      stack.push_back(std::make_unique<sae_detail::Relu>());
      stack.push_back(std::make_unique<sae_detail::Dropout>(dropout));
    };
    fc(encoder_, dim_, 25);
    fc(encoder_, 25, 10);
    fc(encoder_, 10, 3);
    fc(decoder_, 3, 10);
    fc(decoder_, 10, 25);
    decoder_.push_back(std::make_unique<sae_detail::Linear>(25, dim_, init));
    fc(head_, 3, 10);
    fc(head_, 10, 5);
    head_.push_back(std::make_unique<sae_detail::Linear>(5, 2, init));
  }

  int dim_ = 0;
  sae_detail::LayerStack encoder_, decoder_, head_;
};

namespace sae_detail {

class Adam {
 public:
  Adam(std::vector<ParamRef> params, double lr) : params_(std::move(params)), lr_(lr) {
    for (const auto& p : params_) {
      m_.emplace_back(p.value->size(), 0.0);
      v_.emplace_back(p.value->size(), 0.0);
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t p = 0; p < params_.size(); ++p) {
      auto& value = *params_[p].value;
      const auto& grad = *params_[p].grad;
      for (std::size_t i = 0; i < value.size(); ++i) {
        m_[p][i] = kBeta1 * m_[p][i] + (1.0 - kBeta1) * grad[i];
        v_[p][i] = kBeta2 * v_[p][i] + (1.0 - kBeta2) * grad[i] * grad[i];
        value[i] -= lr_ * (m_[p][i] / bc1) / (std::sqrt(v_[p][i] / bc2) + kEps);
      }
    }
  }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  std::vector<ParamRef> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_;
  int t_ = 0;
};

}  // namespace sae_detail

// Trains the supervised autoencoder. Minority rows are duplicated
// oversample_factor times into the epoch pool before shuffling; with a
// validation set and positive patience, training stops on a validation-CE
// plateau and the best-epoch parameters are restored.
inline SaeModel fit_sae(const std::vector<std::vector<double>>& rows, std::span<const int> labels,
                        const SaeTrainConfig& cfg,
                        const std::vector<std::vector<double>>* val_rows = nullptr,
                        std::span<const int> val_labels = {}, SaeTrainLog* log_out = nullptr) {
  cfg.validate();
  if (rows.empty() || rows.size() != labels.size())
    throw std::invalid_argument("sae: empty training set or label mismatch");
  const int dim = static_cast<int>(rows[0].size());
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != dim)
      throw std::invalid_argument("sae: ragged feature rows");
    n_pos += labels[i] ? 1 : 0;
  }
  if (n_pos == 0 || n_pos == rows.size())
    throw std::invalid_argument("sae: training set holds a single class");
  if (val_rows != nullptr && val_rows->size() != val_labels.size())
    throw std::invalid_argument("sae: validation rows/labels mismatch");

  SaeModel model(dim, cfg.dropout, cfg.seed);
  sae_detail::Adam adam(model.params(), cfg.learning_rate);
  Rng dropout_rng = substream(cfg.seed, stream_tag::kTraining, 1);

  // Epoch pool with the minority class duplicated.
  const int minority = n_pos * 2 <= rows.size() ? 1 : 0;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int copies = labels[i] == minority ? cfg.oversample_factor : 1;
    pool.insert(pool.end(), static_cast<std::size_t>(copies), i);
  }

  SaeTrainLog log;
  double best_val = std::numeric_limits<double>::infinity();
  int stale_epochs = 0;
  std::vector<std::vector<double>> best_params;
  const bool early_stop = val_rows != nullptr && cfg.patience > 0;

  std::vector<std::size_t> order = pool;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = substream(cfg.seed, stream_tag::kTraining, 100 + epoch);
    for (std::size_t i = order.size(); i-- > 1;) {
      const std::size_t j = shuffle_rng.below(i + 1);
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start + 2 <= order.size(); start += cfg.batch_size) {
      const int bsz = static_cast<int>(
          std::min<std::size_t>(cfg.batch_size, order.size() - start));
      if (bsz < 2) break;
      Mat batch(bsz, dim);
      std::vector<int> batch_labels(bsz);
      for (int r = 0; r < bsz; ++r) {
        const std::size_t src = order[start + r];
        for (int c = 0; c < dim; ++c) batch(r, c) = rows[src][c];
        batch_labels[r] = labels[src];
      }
      model.zero_grad();
      const double loss = model.loss_and_backward(batch, batch_labels, cfg.lambda_rec,
                                                  ForwardMode::kTrain, &dropout_rng, true);
      if (!std::isfinite(loss))
        throw std::runtime_error("sae: training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(batches));
      adam.step();
      epoch_loss += loss;
      ++batches;
    }
    log.train_loss.push_back(batches > 0 ? epoch_loss / batches : 0.0);
    log.epochs_run = epoch + 1;

    if (early_stop) {
      double val_ce = 0.0;
      const auto val_scores_probs = [&]() {
        double ce = 0.0;
        Mat batch(static_cast<int>(val_rows->size()), dim);
        for (std::size_t r = 0; r < val_rows->size(); ++r)
          for (int c = 0; c < dim; ++c) batch(static_cast<int>(r), c) = (*val_rows)[r][c];
        const Mat bot = sae_detail::run_forward(model.encoder(), batch, ForwardMode::kInfer, nullptr);
        const Mat logits = sae_detail::run_forward(model.head(), bot, ForwardMode::kInfer, nullptr);
        for (int r = 0; r < logits.rows; ++r) {
          const auto p = SaeModel::softmax_pair(logits(r, 0), logits(r, 1));
          ce -= std::log(std::max(p[val_labels[static_cast<std::size_t>(r)]], 1e-300));
        }
        return ce / static_cast<double>(val_rows->size());
      };
      val_ce = val_scores_probs();
      log.val_ce.push_back(val_ce);
      if (val_ce < best_val - 1e-12) {
        best_val = val_ce;
        log.best_epoch = epoch;
        stale_epochs = 0;
        best_params.clear();
        for (const auto& p : model.params()) best_params.push_back(*p.value);
      } else if (++stale_epochs >= cfg.patience) {
        break;
      }
    }
  }

  if (early_stop && !best_params.empty()) {
    auto refs = model.params();
    for (std::size_t p = 0; p < refs.size(); ++p) *refs[p].value = best_params[p];
  }
  if (log_out != nullptr) *log_out = log;
  return model;
}

// Central finite differences over every parameter; returns the maximum
// relative error against the analytic gradients. Runs with batch statistics,
// no dropout, no running-average updates, so the loss is a deterministic
// function of the parameters.
inline double gradient_check(SaeModel& model, const Mat& batch, std::span<const int> labels,
                             double lambda_rec = 1.0, double eps = 1e-5) {
  if (batch.rows < 2) throw std::invalid_argument("gradient_check: need a batch of >= 2 rows");
  model.zero_grad();
  model.loss_and_backward(batch, labels, lambda_rec, ForwardMode::kTrainDeterministic, nullptr,
                          true);
  auto refs = model.params();
  std::vector<std::vector<double>> analytic;
  for (const auto& p : refs) analytic.push_back(*p.grad);

  double max_rel = 0.0;
  for (std::size_t p = 0; p < refs.size(); ++p) {
    auto& value = *refs[p].value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double up = model.loss_and_backward(batch, labels, lambda_rec,
                                                ForwardMode::kTrainDeterministic, nullptr, false);
      value[i] = saved - eps;
      const double down = model.loss_and_backward(batch, labels, lambda_rec,
                                                  ForwardMode::kTrainDeterministic, nullptr, false);
      value[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double an = analytic[p][i];
      if (!std::isfinite(fd) || !std::isfinite(an))
        throw std::runtime_error("gradient_check: non-finite gradient for " + refs[p].name);
      const double denom = std::fabs(an) + std::fabs(fd);
      if (denom < 1e-6) continue;  // both negligible
      max_rel = std::max(max_rel, std::fabs(an - fd) / denom);
    }
  }
  return max_rel;
}

}  // namespace eharq
