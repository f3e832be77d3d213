#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <eharq/rng.hpp>
#include <eharq/sae.hpp>

using namespace eharq;

namespace {

struct Labeled {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

// 2-d points labeled by a noiseless linear rule.
Labeled linear_rule_set(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Labeled out;
  out.rows.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x{rng.normal(), rng.normal()};
    out.labels.push_back(x[0] + 0.3 * x[1] > 0.0 ? 1 : 0);
    out.rows.push_back(std::move(x));
  }
  return out;
}

Mat to_mat(const std::vector<std::vector<double>>& rows) {
  Mat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return m;
}

}  // namespace

TEST(Sae, SoftmaxPairIsADistribution) {
  const auto p = SaeModel::softmax_pair(3.2, -1.7);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
  EXPECT_GT(p[0], p[1]);
  const auto shifted = SaeModel::softmax_pair(3.2 + 40.0, -1.7 + 40.0);
  EXPECT_NEAR(p[0], shifted[0], 1e-12);
  const auto extreme = SaeModel::softmax_pair(1000.0, 0.0);
  EXPECT_TRUE(std::isfinite(extreme[1]));
  EXPECT_NEAR(extreme[0], 1.0, 1e-12);
}

TEST(Sae, ZeroedHeadScoresHalf) {
  SaeModel model(3, 0.2, 7);
  for (auto& p : model.params())
    if (p.name.rfind("head.", 0) == 0) std::fill(p.value->begin(), p.value->end(), 0.0);
  EXPECT_DOUBLE_EQ(model.score(std::vector<double>{0.3, -1.2, 0.8}), 0.5);
  EXPECT_DOUBLE_EQ(model.score(std::vector<double>{5.0, 5.0, 5.0}), 0.5);
}

TEST(Sae, BatchScoresMatchSingleRows) {
  SaeModel model(5, 0.2, 21);
  Rng rng(99);
  std::vector<std::vector<double>> rows(10, std::vector<double>(5));
  for (auto& r : rows)
    for (auto& v : r) v = rng.normal();
  const auto batch = model.score_batch(rows);
  ASSERT_EQ(batch.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_DOUBLE_EQ(batch[i], model.score(rows[i]));
}

TEST(Sae, ZeroReconstructionWeightFreezesDecoder) {
  SaeModel model(4, 0.0, 3);
  Rng rng(5);
  Mat batch(8, 4);
  for (auto& v : batch.a) v = rng.normal();
  const std::vector<int> labels{0, 1, 0, 1, 1, 0, 1, 0};
  model.zero_grad();
  model.loss_and_backward(batch, labels, 0.0, ForwardMode::kTrainDeterministic, nullptr, true);
  double max_other = 0.0;
  for (const auto& p : model.params()) {
    if (p.name.rfind("decoder.", 0) == 0) {
      for (double g : *p.grad) EXPECT_EQ(g, 0.0) << p.name;
    } else {
      for (double g : *p.grad) max_other = std::max(max_other, std::fabs(g));
    }
  }
  EXPECT_GT(max_other, 0.0);
}

TEST(Sae, GradientCheckPassesAcrossSeeds) {
  const std::vector<int> labels{0, 1, 0, 1, 1, 0};
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    SaeModel model(4, 0.2, seed);
    Rng rng(seed + 100);
    Mat batch(6, 4);
    for (auto& v : batch.a) v = rng.normal();
    EXPECT_LT(gradient_check(model, batch, labels, 1.0, 1e-5), 1e-4) << "seed " << seed;
  }
}

TEST(Sae, TrainingReducesLossAndSeparates) {
  const Labeled data = linear_rule_set(200, 31);
  SaeTrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 25;
  cfg.batch_size = 32;
  cfg.oversample_factor = 1;
  cfg.lambda_rec = 0.5;
  cfg.dropout = 0.0;
  cfg.patience = 0;
  cfg.seed = 5;
  SaeTrainLog log;
  SaeModel model = fit_sae(data.rows, data.labels, cfg, nullptr, {}, &log);
  ASSERT_EQ(log.epochs_run, cfg.epochs);
  ASSERT_EQ(log.train_loss.size(), static_cast<std::size_t>(cfg.epochs));
  EXPECT_LT(log.train_loss.back(), log.train_loss.front());
  const auto scores = model.score_batch(data.rows);
  double pos = 0.0, neg = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (data.labels[i] ? pos : neg) += scores[i];
    n_pos += data.labels[i];
  }
  pos /= static_cast<double>(n_pos);
  neg /= static_cast<double>(scores.size() - n_pos);
  EXPECT_GT(pos, neg + 0.15);
}

TEST(Sae, TrainingIsDeterministic) {
  const Labeled data = linear_rule_set(120, 77);
  SaeTrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 3;
  cfg.batch_size = 32;
  cfg.oversample_factor = 2;
  cfg.dropout = 0.2;
  cfg.patience = 0;
  cfg.seed = 9;
  SaeModel a = fit_sae(data.rows, data.labels, cfg);
  SaeModel b = fit_sae(data.rows, data.labels, cfg);
  const auto sa = a.score_batch(data.rows);
  const auto sb = b.score_batch(data.rows);
  for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_DOUBLE_EQ(sa[i], sb[i]);
}

TEST(Sae, ValidationBookkeeping) {
  const Labeled data = linear_rule_set(200, 53);
  std::vector<std::vector<double>> train(data.rows.begin(), data.rows.begin() + 150);
  std::vector<int> train_y(data.labels.begin(), data.labels.begin() + 150);
  std::vector<std::vector<double>> val(data.rows.begin() + 150, data.rows.end());
  std::vector<int> val_y(data.labels.begin() + 150, data.labels.end());
  SaeTrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 40;
  cfg.batch_size = 32;
  cfg.oversample_factor = 1;
  cfg.dropout = 0.0;
  cfg.patience = 2;
  cfg.seed = 13;
  SaeTrainLog log;
  fit_sae(train, train_y, cfg, &val, val_y, &log);
  ASSERT_GT(log.epochs_run, 0);
  EXPECT_LE(log.epochs_run, cfg.epochs);
  EXPECT_EQ(log.val_ce.size(), static_cast<std::size_t>(log.epochs_run));
  EXPECT_GE(log.best_epoch, 0);
  EXPECT_LT(log.best_epoch, log.epochs_run);
}

TEST(Sae, Validation) {
  const Labeled data = linear_rule_set(40, 3);
  SaeTrainConfig cfg;
  std::vector<int> ones(data.rows.size(), 1);
  EXPECT_THROW(fit_sae(data.rows, ones, cfg), std::invalid_argument);

  SaeTrainConfig bad = cfg;
  bad.batch_size = 1;
  EXPECT_THROW(fit_sae(data.rows, data.labels, bad), std::invalid_argument);

  SaeModel model(2, 0.2, 1);
  EXPECT_THROW(model.forward_single(data.rows[0], ForwardMode::kTrain), std::invalid_argument);
  EXPECT_THROW(model.score(std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);

  Mat one_row = to_mat({{0.1, 0.2}});
  const std::vector<int> one_label{1};
  EXPECT_THROW(gradient_check(model, one_row, one_label), std::invalid_argument);
}
