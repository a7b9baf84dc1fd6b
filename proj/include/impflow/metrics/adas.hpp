#pragma once

#include <vector>

namespace impflow {

// Mean absolute gap between achieved and target scores over an edit set.
double adas(const std::vector<double>& edited_scores,
            const std::vector<double>& target_scores);

// Target convention: original score shifted by lambda, bounded to [0, 1].
double target_score(double original, double lambda);

}  // namespace impflow
