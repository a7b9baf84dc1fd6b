#include "impflow/flow/edit.hpp"

#include <algorithm>
#include <cmath>

#include "impflow/flow/ode.hpp"

namespace impflow {

EditResult edit_latent(const CnfModel& model, const Vec& latent,
                       double original_score, double delta) {
  if (latent.size() != model.arch.latent_dim) {
    throw DimensionError("edit_latent: latent dimension mismatch");
  }
  if (!latent.allFinite() || !std::isfinite(original_score) ||
      !std::isfinite(delta)) {
    throw NumericError("edit_latent: non-finite input");
  }
  if (std::abs(delta) > 0.4 + 1e-12) {
    throw ConfigError("edit_latent: delta outside [-0.4, 0.4]");
  }
  if (original_score < 0.0 || original_score > 1.0) {
    throw ConfigError("edit_latent: original score outside [0, 1]");
  }

  EditResult out;
  double target = original_score + delta;
  double clamped_target = std::clamp(target, 0.0, 1.0);
  out.clamped = clamped_target != target;
  out.target_score = clamped_target;

  Vec z = reverse_map(model, latent, original_score);
  out.latent = forward_map(model, z, clamped_target);
  return out;
}

}  // namespace impflow
