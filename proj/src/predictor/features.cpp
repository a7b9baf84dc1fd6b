#include "impflow/predictor/features.hpp"

#include <cmath>
#include <string>

namespace impflow {
namespace {

constexpr double kBackgroundLevel = 0.3;

}  // namespace

int feature_dim(const FeatureMapConfig& cfg) {
  int n = 0;
  for (int s : cfg.pool_sizes) {
    if (s < 1) {
      throw ConfigError("feature map: pool size must be positive");
    }
    n += s * s;
  }
  return n;
}

Mat pool_to_grid(const ImageGrid& image, int grid) {
  if (image.height != image.width) {
    throw DimensionError("pool_to_grid: image must be square");
  }
  if (grid < 1 || image.height % grid != 0) {
    throw DimensionError("pool_to_grid: image side not divisible by grid " +
                         std::to_string(grid));
  }
  const int cell = image.height / grid;
  const double inv = 1.0 / (cell * cell);
  Mat out = Mat::Zero(grid, grid);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      out(r / cell, c / cell) += image.at(r, c);
    }
  }
  return out * inv;
}

Vec extract_features(const ImageGrid& image, const FeatureMapConfig& cfg) {
  Vec out(feature_dim(cfg));
  int k = 0;
  for (int s : cfg.pool_sizes) {
    Mat pooled = pool_to_grid(image, s);
    for (int r = 0; r < s; ++r) {
      for (int c = 0; c < s; ++c) {
        out[k++] = 2.0 * (pooled(r, c) - kBackgroundLevel);
      }
    }
  }
  if (!out.allFinite()) {
    throw NumericError("extract_features: non-finite feature");
  }
  return out;
}

}  // namespace impflow
