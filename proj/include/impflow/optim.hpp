#pragma once

#include <cmath>

#include "impflow/train_config.hpp"
#include "impflow/types.hpp"

namespace impflow {

// First/second moment accumulators for one flat parameter vector.
struct AdamState {
  Vec m, v;
  int t = 0;

  explicit AdamState(Eigen::Index n) : m(Vec::Zero(n)), v(Vec::Zero(n)) {}

  void apply(Vec& theta, const Vec& grad, const TrainConfig& cfg) {
    ++t;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    theta -= (cfg.learning_rate / c1) *
             m.cwiseQuotient(((v / c2).cwiseSqrt().array() + cfg.epsilon).matrix());
  }
};

}  // namespace impflow
