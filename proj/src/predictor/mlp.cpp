#include "impflow/predictor/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "impflow/optim.hpp"

namespace impflow {
namespace {

Mat sigmoid(Mat m) {
  return m.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

Mlp make_mlp(const std::vector<int>& widths, bool sigmoid_output,
             uint64_t seed) {
  if (widths.size() < 2) {
    throw ConfigError("make_mlp: need at least input and output widths");
  }
  for (int wdt : widths) {
    if (wdt < 1) {
      throw ConfigError("make_mlp: widths must be positive");
    }
  }
  Mlp mlp;
  mlp.sigmoid_output = sigmoid_output;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const size_t nlayers = widths.size() - 1;
  for (size_t l = 0; l < nlayers; ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    Mat w(out, in);
    if (l + 1 == nlayers) {
      w.setZero();  // fixed output before training
    } else {
      const double scale = 1.0 / std::sqrt(static_cast<double>(in));
      for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) {
          w(r, c) = scale * gauss(rng);
        }
      }
    }
    mlp.w.push_back(std::move(w));
    mlp.b.push_back(Vec::Zero(out));
  }
  return mlp;
}

Mat mlp_forward_batch(const Mlp& mlp, const Mat& x) {
  if (mlp.w.empty()) {
    throw ConfigError("mlp_forward: empty model");
  }
  if (x.rows() != mlp.in_dim()) {
    throw DimensionError("mlp_forward: input size " + std::to_string(x.rows()) +
                         ", expected " + std::to_string(mlp.in_dim()));
  }
  Mat a = x;
  const int nlayers = mlp.num_layers();
  for (int l = 0; l < nlayers; ++l) {
    Mat z = mlp.w[l] * a;
    z.colwise() += mlp.b[l];
    if (l + 1 < nlayers) {
      a = z.array().tanh().matrix();
    } else {
      a = mlp.sigmoid_output ? sigmoid(std::move(z)) : std::move(z);
    }
  }
  if (!a.allFinite()) {
    throw NumericError("mlp_forward: non-finite output");
  }
  return a;
}

Vec mlp_forward(const Mlp& mlp, const Vec& x) {
  return mlp_forward_batch(mlp, x);
}

MlpGrads mlp_zero_grads(const Mlp& mlp) {
  MlpGrads g;
  for (int l = 0; l < mlp.num_layers(); ++l) {
    g.w.push_back(Mat::Zero(mlp.w[l].rows(), mlp.w[l].cols()));
    g.b.push_back(Vec::Zero(mlp.b[l].size()));
  }
  return g;
}

double mlp_mse_step(const Mlp& mlp, const Mat& inputs, const Mat& targets,
                    MlpGrads* grads, Mat* input_grad) {
  if (inputs.cols() != targets.cols() || targets.rows() != mlp.out_dim()) {
    throw DimensionError("mlp_mse_step: target shape mismatch");
  }
  if (inputs.cols() == 0) {
    throw DimensionError("mlp_mse_step: empty batch");
  }
  const int nlayers = mlp.num_layers();
  std::vector<Mat> act(nlayers + 1);
  act[0] = inputs;
  for (int l = 0; l < nlayers; ++l) {
    Mat z = mlp.w[l] * act[l];
    z.colwise() += mlp.b[l];
    if (l + 1 < nlayers) {
      act[l + 1] = z.array().tanh().matrix();
    } else {
      act[l + 1] = mlp.sigmoid_output ? sigmoid(std::move(z)) : std::move(z);
    }
  }
  const Mat err = act[nlayers] - targets;
  const double denom = static_cast<double>(err.size());
  const double loss = err.squaredNorm() / denom;

  Mat delta = (2.0 / denom) * err;
  if (mlp.sigmoid_output) {
    const auto& out = act[nlayers].array();
    delta = (delta.array() * out * (1.0 - out)).matrix();
  }
  for (int l = nlayers - 1; l >= 0; --l) {
    if (grads) {
      grads->w[l].noalias() += delta * act[l].transpose();
      grads->b[l] += delta.rowwise().sum();
    }
    if (l > 0) {
      Mat back = mlp.w[l].transpose() * delta;
      delta = (back.array() * (1.0 - act[l].array().square())).matrix();
    } else if (input_grad) {
      *input_grad = mlp.w[0].transpose() * delta;
    }
  }
  return loss;
}

int mlp_parameter_count(const Mlp& mlp) {
  int n = 0;
  for (int l = 0; l < mlp.num_layers(); ++l) {
    n += static_cast<int>(mlp.w[l].size() + mlp.b[l].size());
  }
  return n;
}

Vec mlp_get_parameters(const Mlp& mlp) {
  Vec theta(mlp_parameter_count(mlp));
  int k = 0;
  for (int l = 0; l < mlp.num_layers(); ++l) {
    for (int r = 0; r < mlp.w[l].rows(); ++r) {
      for (int c = 0; c < mlp.w[l].cols(); ++c) {
        theta[k++] = mlp.w[l](r, c);
      }
    }
    for (int i = 0; i < mlp.b[l].size(); ++i) {
      theta[k++] = mlp.b[l][i];
    }
  }
  return theta;
}

void mlp_set_parameters(Mlp& mlp, const Vec& theta) {
  if (theta.size() != mlp_parameter_count(mlp)) {
    throw DimensionError("mlp_set_parameters: wrong vector length");
  }
  int k = 0;
  for (int l = 0; l < mlp.num_layers(); ++l) {
    for (int r = 0; r < mlp.w[l].rows(); ++r) {
      for (int c = 0; c < mlp.w[l].cols(); ++c) {
        mlp.w[l](r, c) = theta[k++];
      }
    }
    for (int i = 0; i < mlp.b[l].size(); ++i) {
      mlp.b[l][i] = theta[k++];
    }
  }
}

Vec mlp_flatten_grads(const Mlp& mlp, const MlpGrads& grads) {
  Vec g(mlp_parameter_count(mlp));
  int k = 0;
  for (int l = 0; l < mlp.num_layers(); ++l) {
    for (int r = 0; r < grads.w[l].rows(); ++r) {
      for (int c = 0; c < grads.w[l].cols(); ++c) {
        g[k++] = grads.w[l](r, c);
      }
    }
    for (int i = 0; i < grads.b[l].size(); ++i) {
      g[k++] = grads.b[l][i];
    }
  }
  return g;
}

MlpTrainResult train_mlp(const Mlp& init, const Mat& inputs, const Mat& targets,
                         const TrainConfig& cfg) {
  if (inputs.cols() == 0) {
    throw DimensionError("train_mlp: empty dataset");
  }
  if (inputs.rows() != init.in_dim() || targets.rows() != init.out_dim() ||
      targets.cols() != inputs.cols()) {
    throw DimensionError("train_mlp: dataset shape mismatch");
  }
  if (cfg.iterations < 0 || cfg.batch_size < 1) {
    throw ConfigError("train_mlp: bad optimizer config");
  }
  MlpTrainResult out;
  out.mlp = init;
  if (cfg.iterations == 0) {
    return out;
  }
  const int n = static_cast<int>(inputs.cols());
  const int bsz = std::min(cfg.batch_size, n);
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + 0xBF58476D1CE4E5B9ull);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Vec theta = mlp_get_parameters(out.mlp);
  AdamState adam(theta.size());
  Mat batch(inputs.rows(), bsz);
  Mat target(targets.rows(), bsz);

  out.loss_curve.reserve(cfg.iterations);
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    for (int b = 0; b < bsz; ++b) {
      const int idx = pick(rng);
      batch.col(b) = inputs.col(idx);
      target.col(b) = targets.col(idx);
    }
    MlpGrads grads = mlp_zero_grads(out.mlp);
    const double loss = mlp_mse_step(out.mlp, batch, target, &grads);
    if (!std::isfinite(loss)) {
      throw NumericError("train_mlp: loss diverged at iteration " +
                         std::to_string(iter));
    }
    Vec g = mlp_flatten_grads(out.mlp, grads);
    adam.apply(theta, g, cfg);
    mlp_set_parameters(out.mlp, theta);
    out.loss_curve.push_back(loss);
  }
  return out;
}

}  // namespace impflow
