#include "impflow/metrics/perceptual.hpp"

#include <cmath>
#include <random>

#include "impflow/predictor/features.hpp"

namespace impflow {
namespace {

constexpr double kNormEps = 1e-10;

// 3x3 convolution with clamp-to-edge padding.
Mat convolve(const Mat& in, const std::array<double, 9>& kernel) {
  const int h = static_cast<int>(in.rows());
  const int w = static_cast<int>(in.cols());
  Mat out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = std::clamp(r + dr, 0, h - 1);
          const int cc = std::clamp(c + dc, 0, w - 1);
          acc += kernel[(dr + 1) * 3 + (dc + 1)] * in(rr, cc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

PerceptualPyramid PerceptualPyramid::create(uint64_t seed, int image_size) {
  PerceptualPyramid p;
  p.seed = seed;
  p.level_sizes = {image_size, image_size / 2, image_size / 4};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t l = 0; l < p.level_sizes.size(); ++l) {
    std::vector<std::array<double, 9>> level;
    for (int c = 0; c < p.channels; ++c) {
      std::array<double, 9> k;
      double norm = 0.0;
      for (double& v : k) {
        v = gauss(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (double& v : k) {
        v /= norm;
      }
      level.push_back(k);
    }
    p.kernels.push_back(std::move(level));
  }
  return p;
}

FeatureStack PerceptualPyramid::extract(const ImageGrid& image) const {
  FeatureStack stack;
  for (size_t l = 0; l < level_sizes.size(); ++l) {
    const int size = level_sizes[l];
    Mat base = pool_to_grid(image, size);
    std::vector<Mat> maps;
    maps.reserve(channels);
    for (int c = 0; c < channels; ++c) {
      maps.push_back(convolve(base, kernels[l][c]));
    }
    LayerFeatures layer;
    layer.height = size;
    layer.width = size;
    layer.channels = channels;
    layer.channel_weights.assign(channels, 1.0);
    layer.values.resize(static_cast<size_t>(size) * size * channels);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        double norm = 0.0;
        for (int ch = 0; ch < channels; ++ch) {
          norm += maps[ch](r, c) * maps[ch](r, c);
        }
        norm = std::sqrt(norm) + kNormEps;
        for (int ch = 0; ch < channels; ++ch) {
          layer.values[(static_cast<size_t>(r) * size + c) * channels + ch] =
              maps[ch](r, c) / norm;
        }
      }
    }
    stack.layers.push_back(std::move(layer));
  }
  return stack;
}

Vec PerceptualPyramid::pooled_features(const ImageGrid& image) const {
  FeatureStack stack = extract(image);
  Vec out(static_cast<Eigen::Index>(stack.layers.size()) * channels);
  int k = 0;
  for (const auto& layer : stack.layers) {
    for (int ch = 0; ch < layer.channels; ++ch) {
      double mean = 0.0;
      for (int r = 0; r < layer.height; ++r) {
        for (int c = 0; c < layer.width; ++c) {
          mean += layer.at(r, c, ch);
        }
      }
      out[k++] = mean / (layer.height * layer.width);
    }
  }
  return out;
}

double perceptual_distance(const FeatureStack& a, const FeatureStack& b) {
  if (a.layers.size() != b.layers.size()) {
    throw DimensionError("perceptual_distance: layer count mismatch");
  }
  double total = 0.0;
  for (size_t l = 0; l < a.layers.size(); ++l) {
    const auto& la = a.layers[l];
    const auto& lb = b.layers[l];
    if (la.height != lb.height || la.width != lb.width ||
        la.channels != lb.channels ||
        la.channel_weights != lb.channel_weights) {
      throw DimensionError("perceptual_distance: layer shape mismatch");
    }
    for (double w : la.channel_weights) {
      if (w < 0.0) {
        throw ConfigError("perceptual_distance: negative channel weight");
      }
    }
    double level = 0.0;
    for (int r = 0; r < la.height; ++r) {
      for (int c = 0; c < la.width; ++c) {
        for (int ch = 0; ch < la.channels; ++ch) {
          const double d =
              la.channel_weights[ch] * (la.at(r, c, ch) - lb.at(r, c, ch));
          level += d * d;
        }
      }
    }
    total += level / (static_cast<double>(la.height) * la.width);
  }
  return total;
}

}  // namespace impflow
