#pragma once

#include <vector>

#include "impflow/types.hpp"

namespace impflow {

// Pre-screening record for one candidate training face: a detection stand-in
// (foreground energy) plus the identity similarity of its inversion round
// trip.
struct QualityRecord {
  double energy = 0.0;
  double identity_similarity = 0.0;
};

struct QualityReport {
  int total = 0;
  int kept = 0;
  int rejected_energy = 0;
  int rejected_identity = 0;
  std::vector<bool> keep;  // per input record
};

// Keeps records with energy >= energy_threshold and identity similarity
// strictly above identity_threshold. A record failing both counts toward the
// energy bucket.
QualityReport quality_filter(const std::vector<QualityRecord>& records,
                             double energy_threshold = 0.2,
                             double identity_threshold = 0.85);

}  // namespace impflow
