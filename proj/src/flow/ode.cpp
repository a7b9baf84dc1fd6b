#include "impflow/flow/ode.hpp"

#include <string>

namespace impflow {
namespace {

template <typename Field>
Vec rk4_unit_interval(const Field& f, const Vec& w0, double score,
                      Direction direction, const SolverConfig& solver) {
  if (solver.steps < 1) {
    throw ConfigError("integrate: solver steps must be positive");
  }
  double h = direction == Direction::kForward ? 1.0 / solver.steps
                                              : -1.0 / solver.steps;
  double t = direction == Direction::kForward ? 0.0 : 1.0;
  Vec w = w0;
  for (int step = 0; step < solver.steps; ++step) {
    Vec k1 = f(w, MappingContext{t, score});
    Vec k2 = f(w + 0.5 * h * k1, MappingContext{t + 0.5 * h, score});
    Vec k3 = f(w + 0.5 * h * k2, MappingContext{t + 0.5 * h, score});
    Vec k4 = f(w + h * k3, MappingContext{t + h, score});
    w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    if (!w.allFinite()) {
      throw NumericError("integrate: state diverged at step " +
                         std::to_string(step));
    }
  }
  return w;
}

}  // namespace

Vec integrate(const VectorField& field, const Vec& w0, double score,
              Direction direction, const SolverConfig& solver) {
  if (!field) {
    throw ConfigError("integrate: empty vector field");
  }
  return rk4_unit_interval(field, w0, score, direction, solver);
}

Vec forward_map(const CnfModel& model, const Vec& z, double score) {
  if (z.size() != model.arch.latent_dim) {
    throw DimensionError("forward_map: latent size mismatch");
  }
  Vec w = z;
  for (const auto& block : model.blocks) {
    auto f = [&block](const Vec& x, const MappingContext& ctx) {
      return block.dynamics(x, ctx);
    };
    w = rk4_unit_interval(f, w, score, Direction::kForward, model.solver);
  }
  return w;
}

Vec reverse_map(const CnfModel& model, const Vec& w, double score) {
  if (w.size() != model.arch.latent_dim) {
    throw DimensionError("reverse_map: latent size mismatch");
  }
  Vec z = w;
  for (auto it = model.blocks.rbegin(); it != model.blocks.rend(); ++it) {
    auto f = [&it](const Vec& x, const MappingContext& ctx) {
      return it->dynamics(x, ctx);
    };
    z = rk4_unit_interval(f, z, score, Direction::kReverse, model.solver);
  }
  return z;
}

}  // namespace impflow
