#pragma once

#include <cstdint>

namespace impflow {

// Shared optimizer settings: minibatch gradient descent with adaptive first
// and second moment accumulators.
struct TrainConfig {
  int iterations = 4000;
  int batch_size = 50;
  double learning_rate = 1e-3;
  uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

}  // namespace impflow
