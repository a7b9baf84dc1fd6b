#include "impflow/flow/density.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace impflow {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Velocity and exact divergence of one block at (w, ctx). The divergence
// comes from pushing the identity matrix through the layer stack as a batch
// of tangent directions; only the post-activation Jacobian scaling depends
// on the state.
void velocity_and_divergence(const CnfBlock& block, const Vec& w,
                             const MappingContext& ctx, Vec* velocity,
                             double* divergence) {
  int d = static_cast<int>(w.size());
  Vec c(2);
  c << ctx.t, ctx.score;

  Vec a = w;
  Mat tangents = Mat::Identity(d, d);
  for (size_t l = 0; l < block.layers.size(); ++l) {
    const auto& layer = block.layers[l];
    Vec gate =
        (layer.wg * c + layer.bg).unaryExpr([](double v) { return sigmoid(v); });
    Vec y = (layer.w * a + layer.b).cwiseProduct(gate) + layer.wc * c;
    tangents = gate.asDiagonal() * (layer.w * tangents).eval();
    if (l + 1 < block.layers.size()) {
      a = y.array().tanh();
      Vec slope = 1.0 - a.array().square();
      tangents = slope.asDiagonal() * tangents;
    } else {
      a = y;
    }
  }
  *velocity = a;
  *divergence = tangents.trace();
}

}  // namespace

ReverseTraceResult reverse_with_trace(const CnfModel& model, const Vec& w,
                                      double score) {
  if (w.size() != model.arch.latent_dim) {
    throw DimensionError("reverse_with_trace: latent size mismatch");
  }
  if (model.solver.steps < 1) {
    throw ConfigError("reverse_with_trace: solver steps must be positive");
  }

  double h = -1.0 / model.solver.steps;
  Vec state = w;
  double ell = 0.0;  // divergence integrated with the (negative) step

  for (auto it = model.blocks.rbegin(); it != model.blocks.rend(); ++it) {
    double t = 1.0;
    for (int step = 0; step < model.solver.steps; ++step) {
      Vec k1, k2, k3, k4;
      double d1, d2, d3, d4;
      velocity_and_divergence(*it, state, {t, score}, &k1, &d1);
      velocity_and_divergence(*it, state + 0.5 * h * k1, {t + 0.5 * h, score},
                              &k2, &d2);
      velocity_and_divergence(*it, state + 0.5 * h * k2, {t + 0.5 * h, score},
                              &k3, &d3);
      velocity_and_divergence(*it, state + h * k3, {t + h, score}, &k4, &d4);
      state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ell += (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
      t += h;
      if (!state.allFinite()) {
        throw NumericError("reverse_with_trace: state diverged at step " +
                           std::to_string(step));
      }
    }
  }

  ReverseTraceResult out;
  out.z = std::move(state);
  out.trace_integral = -ell;  // flip sign back to the t: 0 -> 1 orientation
  return out;
}

double standard_normal_log_pdf(const Vec& z) {
  double d = static_cast<double>(z.size());
  return -0.5 * z.squaredNorm() - 0.5 * d * std::log(2.0 * std::numbers::pi);
}

double log_density(const CnfModel& model, const Vec& w, double score) {
  auto r = reverse_with_trace(model, w, score);
  return standard_normal_log_pdf(r.z) - r.trace_integral;
}

}  // namespace impflow
