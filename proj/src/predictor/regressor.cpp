#include "impflow/predictor/regressor.hpp"

#include <cmath>

namespace impflow {
namespace {

constexpr int kHidden1 = 64;
constexpr int kHidden2 = 32;

}  // namespace

RegressorModel make_regressor(AttributeKind attribute, uint64_t seed) {
  RegressorModel model;
  model.attribute = attribute;
  model.mlp = make_mlp({feature_dim(model.features), kHidden1, kHidden2, 1},
                       /*sigmoid_output=*/true, seed);
  return model;
}

double predict_score(const RegressorModel& model, const ImageGrid& image) {
  Vec f = extract_features(image, model.features);
  return mlp_forward(model.mlp, f)[0];
}

RegressorTrainResult train_regressor(const std::vector<ScoredSample>& samples,
                                     AttributeKind attribute,
                                     const TrainConfig& cfg,
                                     const RegressorModel* init) {
  if (samples.empty()) {
    throw DimensionError("train_regressor: empty training set");
  }
  RegressorModel model =
      init ? *init : make_regressor(attribute, cfg.seed * 131 + 7);
  model.attribute = attribute;

  const int n = static_cast<int>(samples.size());
  Mat inputs(feature_dim(model.features), n);
  Mat targets(1, n);
  for (int i = 0; i < n; ++i) {
    const double s = samples[i].score;
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ConfigError("train_regressor: score outside [0, 1]");
    }
    inputs.col(i) = extract_features(samples[i].image, model.features);
    targets(0, i) = s;
  }
  MlpTrainResult trained = train_mlp(model.mlp, inputs, targets, cfg);
  RegressorTrainResult out;
  model.mlp = std::move(trained.mlp);
  out.model = std::move(model);
  out.loss_curve = std::move(trained.loss_curve);
  return out;
}

double r_squared(const std::vector<double>& predictions,
                 const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || targets.empty()) {
    throw DimensionError("r_squared: length mismatch");
  }
  double mean = 0.0;
  for (double t : targets) {
    mean += t;
  }
  mean /= targets.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < targets.size(); ++i) {
    ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  if (ss_tot == 0.0) {
    throw NumericError("r_squared: zero-variance targets");
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace impflow
