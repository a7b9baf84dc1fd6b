#pragma once

#include <vector>

#include "impflow/flow/model.hpp"
#include "impflow/train_config.hpp"

namespace impflow {

struct FlowSample {
  Vec latent;
  double score = 0.0;
};

// Mean negative log-likelihood of a batch (latents as columns, one score per
// column), evaluated through the reverse map with the exact divergence term.
double nll_batch(const CnfModel& model, const Mat& latents, const Vec& scores);

// Same value plus the analytic d(mean NLL)/d(theta), laid out in
// get_parameters() order. The gradient is exact for the discretized
// objective: backpropagation through every RK4 stage, including the second
// order terms the divergence contributes.
double nll_batch_grad(const CnfModel& model, const Mat& latents,
                      const Vec& scores, Vec* grad);

struct FlowTrainResult {
  CnfModel model;
  std::vector<double> loss_curve;  // minibatch NLL per iteration
};

// Maximum-likelihood training of the conditional flow. cfg.iterations == 0
// returns the seeded initialization untouched.
FlowTrainResult train_mapper(const std::vector<FlowSample>& data,
                             const FlowArchitecture& arch,
                             AttributeKind attribute, const TrainConfig& cfg,
                             const SolverConfig& solver = {});

}  // namespace impflow
