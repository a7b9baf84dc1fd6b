#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "impflow/types.hpp"

namespace impflow {

// One pyramid level: channels-last values over an H x W grid, with
// nonnegative per-channel weights applied when differencing.
struct LayerFeatures {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;  // index (h * width + w) * channels + c
  std::vector<double> channel_weights;

  double at(int h, int w, int c) const {
    return values[(static_cast<size_t>(h) * width + w) * channels + c];
  }
};

struct FeatureStack {
  std::vector<LayerFeatures> layers;
};

// Fixed multi-scale extractor: mean-pooled copies of the image convolved with
// seeded 3x3 kernels, channel vectors normalized to unit length per position.
struct PerceptualPyramid {
  std::vector<int> level_sizes;  // {32, 16, 8} by default
  int channels = 6;
  uint64_t seed = 2024;
  std::vector<std::vector<std::array<double, 9>>> kernels;  // [level][channel]

  static PerceptualPyramid create(uint64_t seed = 2024, int image_size = 32);

  FeatureStack extract(const ImageGrid& image) const;
  // Global channel means of the normalized features, concatenated across
  // levels; the vector the distribution metric runs on.
  Vec pooled_features(const ImageGrid& image) const;
};

double perceptual_distance(const FeatureStack& a, const FeatureStack& b);

}  // namespace impflow
