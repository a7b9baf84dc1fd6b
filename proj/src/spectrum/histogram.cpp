#include "impflow/spectrum/histogram.hpp"

#include <algorithm>

#include "impflow/types.hpp"

namespace impflow {

ScoreHistogram score_histogram(const std::vector<double>& scores, int bins) {
  if (scores.empty()) {
    throw ConfigError("score_histogram: empty input");
  }
  if (bins < 1) {
    throw ConfigError("score_histogram: need at least one bin");
  }
  ScoreHistogram h;
  h.bins = bins;
  h.counts.assign(bins, 0);
  h.total = static_cast<int>(scores.size());
  int mid = 0;
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ConfigError("score_histogram: score outside [0, 1]");
    }
    const int bin = std::min(bins - 1, static_cast<int>(s * bins));
    ++h.counts[bin];
    if (s >= 0.4 && s <= 0.6) {
      ++mid;
    }
  }
  h.mass_mid = static_cast<double>(mid) / h.total;
  return h;
}

}  // namespace impflow
