#pragma once

#include <vector>

#include "impflow/types.hpp"

namespace impflow {

// Fixed multi-scale mean-pool feature map. Each pool size s contributes an
// s x s grid of region means, centered around the typical background level so
// downstream layers see roughly zero-mean inputs.
struct FeatureMapConfig {
  std::vector<int> pool_sizes = {16, 8, 4, 2, 1};
};

int feature_dim(const FeatureMapConfig& cfg);

// Mean pool to a grid x grid map; image side must be divisible by grid.
Mat pool_to_grid(const ImageGrid& image, int grid);

Vec extract_features(const ImageGrid& image, const FeatureMapConfig& cfg);

}  // namespace impflow
