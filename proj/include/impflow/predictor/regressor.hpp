#pragma once

#include <string>
#include <vector>

#include "impflow/predictor/features.hpp"
#include "impflow/predictor/mlp.hpp"
#include "impflow/types.hpp"

namespace impflow {

struct ScoredSample {
  ImageGrid image;
  double score = 0.0;  // in [0, 1]
  std::string source;
};

// Subjective-score predictor: pooled image features into a small sigmoid
// perceptron, one model per attribute.
struct RegressorModel {
  AttributeKind attribute = AttributeKind::kTrustworthiness;
  FeatureMapConfig features;
  Mlp mlp;
};

RegressorModel make_regressor(AttributeKind attribute, uint64_t seed);

double predict_score(const RegressorModel& model, const ImageGrid& image);

struct RegressorTrainResult {
  RegressorModel model;
  std::vector<double> loss_curve;
};

// MSE training; pass a previously trained model as init to fine-tune, or
// nullptr to start fresh from the seed in cfg.
RegressorTrainResult train_regressor(const std::vector<ScoredSample>& samples,
                                     AttributeKind attribute,
                                     const TrainConfig& cfg,
                                     const RegressorModel* init = nullptr);

double r_squared(const std::vector<double>& predictions,
                 const std::vector<double>& targets);

}  // namespace impflow
