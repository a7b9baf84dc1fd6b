#include "impflow/world/oracle.hpp"

#include <cmath>

namespace impflow {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double truth_score(const FaceParams& p, AttributeKind attribute) {
  if (p.values.size() != param::kCount) {
    throw DimensionError("truth_score: expected 12 parameters");
  }
  if (!p.values.allFinite()) {
    throw NumericError("truth_score: non-finite parameter");
  }
  double smile = p[param::kSmile];
  double brow = p[param::kBrowAngle];
  double eyes = p[param::kEyeOpenness];
  double wrinkle = p[param::kWrinkleDensity];
  double beard = p[param::kFacialHair];

  switch (attribute) {
    case AttributeKind::kTrustworthiness:
      return sigmoid(1.5 * smile - 1.2 * brow - 0.8 * wrinkle + 0.3 * eyes);
    case AttributeKind::kDominance:
      return sigmoid(1.4 * brow + 1.0 * beard + 0.8 * wrinkle - 0.6 * smile);
    case AttributeKind::kAttractiveness:
      return sigmoid(1.0 * smile + 0.8 * eyes - 1.0 * wrinkle);
  }
  throw ConfigError("truth_score: unknown attribute");
}

}  // namespace impflow
