#pragma once

#include <cstdint>
#include <vector>

#include "impflow/train_config.hpp"
#include "impflow/types.hpp"

namespace impflow {

// Dense perceptron with tanh hidden activations. The output layer is linear
// or sigmoid-squashed; its weights start at zero so untrained models have a
// fixed, predictable output.
struct Mlp {
  std::vector<Mat> w;
  std::vector<Vec> b;
  bool sigmoid_output = false;

  int in_dim() const { return w.empty() ? 0 : static_cast<int>(w.front().cols()); }
  int out_dim() const { return w.empty() ? 0 : static_cast<int>(w.back().rows()); }
  int num_layers() const { return static_cast<int>(w.size()); }
};

// widths = {input, hidden..., output}; needs at least one layer.
Mlp make_mlp(const std::vector<int>& widths, bool sigmoid_output, uint64_t seed);

Vec mlp_forward(const Mlp& mlp, const Vec& x);
Mat mlp_forward_batch(const Mlp& mlp, const Mat& x);  // columns are samples

struct MlpGrads {
  std::vector<Mat> w;
  std::vector<Vec> b;
};
MlpGrads mlp_zero_grads(const Mlp& mlp);

// Forward plus mean-squared-error backward over a batch. Returns the loss
// (mean over every output entry); parameter gradients are accumulated into
// grads, and d loss / d inputs is written to input_grad when non-null.
double mlp_mse_step(const Mlp& mlp, const Mat& inputs, const Mat& targets,
                    MlpGrads* grads, Mat* input_grad = nullptr);

int mlp_parameter_count(const Mlp& mlp);
Vec mlp_get_parameters(const Mlp& mlp);
void mlp_set_parameters(Mlp& mlp, const Vec& theta);
Vec mlp_flatten_grads(const Mlp& mlp, const MlpGrads& grads);

struct MlpTrainResult {
  Mlp mlp;
  std::vector<double> loss_curve;
};

// Seeded minibatch MSE training. cfg.iterations == 0 returns init untouched.
MlpTrainResult train_mlp(const Mlp& init, const Mat& inputs, const Mat& targets,
                         const TrainConfig& cfg);

}  // namespace impflow
