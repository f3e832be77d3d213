#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eharq/logistic.hpp"
#include "eharq/sae.hpp"
#include "eharq/scaler.hpp"
#include "eharq/table.hpp"

namespace eharq {

inline constexpr int kModelFormatVersion = 1;

// A fitted scorer plus everything needed to apply it to fresh records: the
// input feature columns (in order), the training-set scaler when one is
// used, and the type-specific parameters.
struct TrainedModel {
  std::string type;                   // "ht0" | "ht5" | "lr" | "sae"
  std::vector<std::string> features;
  bool scaled = false;
  StandardScaler scaler;
  LrModel lr;
  std::shared_ptr<SaeModel> sae;
  double sae_dropout = 0.2;

  // Scores one row given in feature order (unscaled).
  double score_row(const std::vector<double>& row) const {
    if (row.size() != features.size())
      throw std::invalid_argument("model: expected " + std::to_string(features.size()) +
                                  " features, got " + std::to_string(row.size()));
    const std::vector<double> x = scaled ? scaler.transform_row(row) : row;
    if (type == "ht0" || type == "ht5") return x[0];
    if (type == "lr") return lr_score(lr, x);
    if (type == "sae") return sae->score(x);
    throw std::logic_error("model: unknown type " + type);
  }

  std::vector<double> score_rows(const std::vector<std::vector<double>>& rows) const {
    if (type == "sae") {
      std::vector<std::vector<double>> x;
      x.reserve(rows.size());
      for (const auto& row : rows) {
        if (row.size() != features.size())
          throw std::invalid_argument("model: feature count mismatch");
        x.push_back(scaled ? scaler.transform_row(row) : row);
      }
      return sae->score_batch(x);
    }
    std::vector<double> scores;
    scores.reserve(rows.size());
    for (const auto& row : rows) scores.push_back(score_row(row));
    return scores;
  }
};

inline TrainedModel make_ht_model(const std::string& which) {
  if (which != "ht0" && which != "ht5")
    throw std::invalid_argument("hard threshold model: expected ht0 or ht5");
  TrainedModel model;
  model.type = which;
  model.features = {which == "ht0" ? "vnr_0" : "vnr_5"};
  return model;
}

namespace detail {

inline nlohmann::json scaler_to_json(const StandardScaler& s) {
  return {{"mean", s.mean}, {"scale", s.scale}, {"constant", s.constant}};
}

inline StandardScaler scaler_from_json(const nlohmann::json& j) {
  StandardScaler s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  s.constant = j.at("constant").get<std::vector<std::uint8_t>>();
  if (s.mean.size() != s.scale.size() || s.mean.size() != s.constant.size())
    throw std::invalid_argument("model file: inconsistent scaler arrays");
  return s;
}

inline nlohmann::json stack_to_json(sae_detail::LayerStack& stack) {
  nlohmann::json layers = nlohmann::json::array();
  for (auto& layer : stack) {
    nlohmann::json entry{{"kind", layer->kind()}};
    if (auto* lin = dynamic_cast<sae_detail::Linear*>(layer.get())) {
      entry["in"] = lin->in_dim();
      entry["out"] = lin->out_dim();
      entry["weight"] = lin->weights();
      entry["bias"] = lin->biases();
    } else if (auto* bn = dynamic_cast<sae_detail::BatchNorm*>(layer.get())) {
      entry["gamma"] = bn->gamma();
      entry["beta"] = bn->beta();
      entry["running_mean"] = bn->running_mean();
      entry["running_var"] = bn->running_var();
    }
    layers.push_back(std::move(entry));
  }
  return layers;
}

inline void stack_from_json(const nlohmann::json& layers, sae_detail::LayerStack& stack) {
  if (layers.size() != stack.size())
    throw std::invalid_argument("model file: autoencoder layer count mismatch");
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const nlohmann::json& entry = layers[i];
    if (entry.at("kind").get<std::string>() != stack[i]->kind())
      throw std::invalid_argument("model file: autoencoder layer kind mismatch");
    if (auto* lin = dynamic_cast<sae_detail::Linear*>(stack[i].get())) {
      auto w = entry.at("weight").get<std::vector<double>>();
      auto b = entry.at("bias").get<std::vector<double>>();
      if (w.size() != lin->weights().size() || b.size() != lin->biases().size())
        throw std::invalid_argument("model file: linear layer size mismatch");
      lin->weights() = std::move(w);
      lin->biases() = std::move(b);
    } else if (auto* bn = dynamic_cast<sae_detail::BatchNorm*>(stack[i].get())) {
      auto gamma = entry.at("gamma").get<std::vector<double>>();
      if (gamma.size() != bn->gamma().size())
        throw std::invalid_argument("model file: batch-norm size mismatch");
      bn->gamma() = std::move(gamma);
      bn->beta() = entry.at("beta").get<std::vector<double>>();
      bn->running_mean() = entry.at("running_mean").get<std::vector<double>>();
      bn->running_var() = entry.at("running_var").get<std::vector<double>>();
    }
  }
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json j{{"format_version", kModelFormatVersion},
                   {"type", model.type},
                   {"features", model.features},
                   {"scaled", model.scaled}};
  if (model.scaled) j["scaler"] = detail::scaler_to_json(model.scaler);
  if (model.type == "lr")
    j["lr"] = {{"weights", model.lr.weights},
               {"bias", model.lr.bias},
               {"l2_strength", model.lr.l2_strength},
               {"class_weight_pos", model.lr.class_weight_pos},
               {"class_weight_neg", model.lr.class_weight_neg}};
  if (model.type == "sae") {
    if (!model.sae) throw std::logic_error("model: sae parameters missing");
    j["sae"] = {{"input_dim", model.sae->input_dim()},
                {"dropout", model.sae_dropout},
                {"encoder", detail::stack_to_json(model.sae->encoder())},
                {"decoder", detail::stack_to_json(model.sae->decoder())},
                {"head", detail::stack_to_json(model.sae->head())}};
  }
  return j;
}

inline void save_model(const TrainedModel& model, std::ostream& out) {
  out << model_to_json(model).dump(2) << '\n';
  if (!out) throw std::runtime_error("model save: write failure");
}

inline TrainedModel load_model(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model file: invalid JSON: ") + e.what());
  }
  if (j.at("format_version").get<int>() != kModelFormatVersion)
    throw std::invalid_argument("model file: unsupported format version");
  TrainedModel model;
  model.type = j.at("type").get<std::string>();
  model.features = j.at("features").get<std::vector<std::string>>();
  model.scaled = j.at("scaled").get<bool>();
  if (model.scaled) model.scaler = detail::scaler_from_json(j.at("scaler"));
  if (model.type == "lr") {
    const nlohmann::json& l = j.at("lr");
    model.lr.weights = l.at("weights").get<std::vector<double>>();
    model.lr.bias = l.at("bias").get<double>();
    model.lr.l2_strength = l.at("l2_strength").get<double>();
    model.lr.class_weight_pos = l.at("class_weight_pos").get<double>();
    model.lr.class_weight_neg = l.at("class_weight_neg").get<double>();
    if (model.lr.weights.size() != model.features.size())
      throw std::invalid_argument("model file: weight/feature count mismatch");
  } else if (model.type == "sae") {
    const nlohmann::json& s = j.at("sae");
    model.sae_dropout = s.at("dropout").get<double>();
    const int dim = s.at("input_dim").get<int>();
    if (dim != static_cast<int>(model.features.size()))
      throw std::invalid_argument("model file: input dim/feature count mismatch");
    model.sae = std::make_shared<SaeModel>(dim, model.sae_dropout, 0);
    detail::stack_from_json(s.at("encoder"), model.sae->encoder());
    detail::stack_from_json(s.at("decoder"), model.sae->decoder());
    detail::stack_from_json(s.at("head"), model.sae->head());
  } else if (model.type != "ht0" && model.type != "ht5") {
    throw std::invalid_argument("model file: unknown type " + model.type);
  }
  return model;
}

}  // namespace eharq
