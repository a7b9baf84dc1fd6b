#pragma once

#include "impflow/flow/model.hpp"

namespace impflow {

struct ReverseTraceResult {
  Vec z;                      // base-space point
  double trace_integral = 0;  // divergence accumulated along the reverse path
};

// Runs the inverse map with an augmented state that integrates the exact
// divergence of the velocity field (forward-mode directional derivatives, one
// per latent axis).
ReverseTraceResult reverse_with_trace(const CnfModel& model, const Vec& w,
                                      double score);

double standard_normal_log_pdf(const Vec& z);

// log p(w | score) = log N(z; 0, I) - integral of the divergence, with
// z = reverse_map(w, score).
double log_density(const CnfModel& model, const Vec& w, double score);

}  // namespace impflow
