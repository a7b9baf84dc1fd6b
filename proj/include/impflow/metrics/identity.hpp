#pragma once

#include <utility>
#include <vector>

#include "impflow/types.hpp"

namespace impflow {

double cosine_similarity(const Vec& a, const Vec& b);

// Mean cosine over (original, edited) embedding pairs.
double identity_similarity(const std::vector<std::pair<Vec, Vec>>& pairs);

}  // namespace impflow
