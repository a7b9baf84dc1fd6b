#include "impflow/world/sample.hpp"

#include <cmath>
#include <random>

#include "impflow/world/oracle.hpp"

namespace impflow {
namespace {

double truncated_normal(std::mt19937_64& rng,
                        std::normal_distribution<double>& normal) {
  // Rejection keeps the shape of the density on [-1, 1]; with unit variance
  // about two thirds of the draws land inside, so this terminates quickly.
  for (;;) {
    double v = normal(rng);
    if (v >= -1.0 && v <= 1.0) {
      return v;
    }
  }
}

}  // namespace

SampleSet sample_dataset(int n, uint64_t seed, bool adult_only,
                         const WorldConfig& world) {
  if (n <= 0) {
    throw ConfigError("sample_dataset: n must be positive");
  }
  if (world.covariate_scale <= 0.0 || world.covariate_scale > 1.0) {
    throw ConfigError("sample_dataset: covariate_scale must be in (0, 1]");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RenderConfig rc;
  rc.image_size = world.image_size;

  SampleSet out;
  out.params.reserve(n);
  out.images.reserve(n);
  out.scores.reserve(n);
  for (int i = 0; i < n; ++i) {
    FaceParams p;
    for (int j = 0; j < param::kCount; ++j) {
      p[j] = truncated_normal(rng, normal);
      if (j >= param::kIdentityDims) {
        p[j] *= world.covariate_scale;
      }
    }
    if (adult_only) {
      p[param::kWrinkleDensity] = std::abs(p[param::kWrinkleDensity]);
    }
    out.images.push_back(render_face(p, rc));
    out.scores.push_back({truth_score(p, AttributeKind::kTrustworthiness),
                          truth_score(p, AttributeKind::kDominance),
                          truth_score(p, AttributeKind::kAttractiveness)});
    out.params.push_back(std::move(p));
  }
  return out;
}

}  // namespace impflow
