#include "impflow/metrics/adas.hpp"

#include <algorithm>
#include <cmath>

#include "impflow/types.hpp"

namespace impflow {

double adas(const std::vector<double>& edited_scores,
            const std::vector<double>& target_scores) {
  if (edited_scores.size() != target_scores.size() || edited_scores.empty()) {
    throw DimensionError("adas: length mismatch");
  }
  double total = 0.0;
  for (size_t i = 0; i < edited_scores.size(); ++i) {
    total += std::abs(edited_scores[i] - target_scores[i]);
  }
  return total / edited_scores.size();
}

double target_score(double original, double lambda) {
  return std::clamp(original + lambda, 0.0, 1.0);
}

}  // namespace impflow
