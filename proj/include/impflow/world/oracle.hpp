#pragma once

#include "impflow/types.hpp"

namespace impflow {

// Ground-truth social-impression score in [0, 1]. Depends on the covariate
// block only; identity parameters never move it.
double truth_score(const FaceParams& p, AttributeKind attribute);

}  // namespace impflow
