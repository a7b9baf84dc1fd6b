#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "impflow/types.hpp"
#include "impflow/world/render.hpp"

namespace impflow {

// Knobs that define a toy world instance. mixing_seed fixes the latent space;
// covariate_scale < 1 concentrates expression covariates (and therefore
// scores) toward the middle of the range, which is how evaluation sets are
// drawn.
struct WorldConfig {
  uint64_t mixing_seed = 77;
  int image_size = 32;
  int renderer_version = 1;
  double covariate_scale = 1.0;
  double energy_threshold = 0.2;
  double identity_threshold = 0.85;
};

struct SampleSet {
  std::vector<FaceParams> params;
  std::vector<ImageGrid> images;
  std::vector<std::array<double, 3>> scores;  // indexed by AttributeKind

  int size() const { return static_cast<int>(params.size()); }
};

// Draws n faces with parameters from a standard normal truncated to [-1, 1],
// renders them and attaches ground-truth scores. adult_only folds the wrinkle
// density to be non-negative.
SampleSet sample_dataset(int n, uint64_t seed, bool adult_only,
                         const WorldConfig& world = {});

}  // namespace impflow
