#pragma once

namespace impflow::reference {

// Configuration and headline numbers of the full-scale system this desk-scale
// build mirrors. Context only, never reproduction targets: the toy world has
// no photographic data and its absolute metric values are not comparable.
inline constexpr int kFullScaleLatentDim = 512;
inline constexpr int kFullScaleIterations = 80000;
inline constexpr int kFullScaleBatchSize = 50;
inline constexpr double kFullScaleLearningRate = 1e-3;
inline constexpr int kFullScaleTrainingPool = 10883;
inline constexpr int kFullScaleEvaluationPool = 19921;
inline constexpr double kFullScaleRegressorR2 = 0.8627;
inline constexpr double kFullScaleAdasLow = 0.065;
inline constexpr double kFullScaleAdasHigh = 0.115;
inline constexpr double kFullScaleAdasTrust = 0.088;
inline constexpr double kIdentityRetentionBar = 0.75;

}  // namespace impflow::reference
