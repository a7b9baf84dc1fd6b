#pragma once

#include "impflow/flow/model.hpp"
#include "impflow/types.hpp"

namespace impflow {

struct EditResult {
  Vec latent;
  double target_score = 0.0;
  bool clamped = false;
};

// Moves a latent along one attribute: decode to the base distribution at the
// original score, re-encode at score + delta. The target score is clamped to
// [0, 1]; the requested delta itself must stay within [-0.4, 0.4].
EditResult edit_latent(const CnfModel& model, const Vec& latent,
                       double original_score, double delta);

}  // namespace impflow
