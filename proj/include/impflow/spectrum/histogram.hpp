#pragma once

#include <vector>

namespace impflow {

struct ScoreHistogram {
  int bins = 0;
  std::vector<int> counts;
  int total = 0;
  double mass_mid = 0.0;  // fraction of raw scores inside [0.4, 0.6]
};

// Fixed-width bins over [0, 1]; scores must lie in [0, 1].
ScoreHistogram score_histogram(const std::vector<double>& scores, int bins = 20);

}  // namespace impflow
