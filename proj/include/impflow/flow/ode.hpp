#pragma once

#include <functional>

#include "impflow/flow/model.hpp"

namespace impflow {

enum class Direction { kForward, kReverse };

using VectorField = std::function<Vec(const Vec&, const MappingContext&)>;

// Fixed-step RK4 over one unit time interval. Forward runs t 0 -> 1, reverse
// runs t 1 -> 0 with a negated step; the score stays constant while the
// context time advances.
Vec integrate(const VectorField& field, const Vec& w0, double score,
              Direction direction, const SolverConfig& solver);

// Base-to-latent map: applies every block in order, each over [0, 1].
Vec forward_map(const CnfModel& model, const Vec& z, double score);
// Inverse map: blocks in opposite order, each integrated backwards.
Vec reverse_map(const CnfModel& model, const Vec& w, double score);

}  // namespace impflow
