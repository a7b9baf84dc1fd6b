#include "impflow/flow/model.hpp"

#include <cmath>
#include <random>

namespace impflow {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec context_vector(const MappingContext& ctx) {
  Vec c(2);
  c << ctx.t, ctx.score;
  return c;
}

}  // namespace

Vec concat_squash_apply(const ConcatSquashLayer& layer, const Vec& x,
                        const MappingContext& ctx) {
  if (x.size() != layer.w.cols()) {
    throw DimensionError("concat_squash_apply: input size mismatch");
  }
  Vec c = context_vector(ctx);
  Vec gate = (layer.wg * c + layer.bg).unaryExpr([](double v) { return sigmoid(v); });
  return (layer.w * x + layer.b).cwiseProduct(gate) + layer.wc * c;
}

Vec CnfBlock::dynamics(const Vec& w, const MappingContext& ctx) const {
  Vec a = w;
  for (size_t l = 0; l < layers.size(); ++l) {
    a = concat_squash_apply(layers[l], a, ctx);
    if (l + 1 < layers.size()) {
      a = a.array().tanh();
    }
  }
  if (!a.allFinite()) {
    throw NumericError("dynamics: non-finite layer output");
  }
  return a;
}

CnfModel init_cnf_model(const FlowArchitecture& arch, AttributeKind attribute,
                        uint64_t seed, const SolverConfig& solver) {
  if (arch.latent_dim < 1 || arch.num_blocks < 1 || arch.hidden_width < 1 ||
      arch.layers_per_block < 1) {
    throw ConfigError("init_cnf_model: bad architecture");
  }
  if (solver.steps < 1) {
    throw ConfigError("init_cnf_model: solver steps must be positive");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](Mat& m, double scale) {
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) {
        m(r, c) = scale * normal(rng);
      }
    }
  };

  CnfModel model;
  model.arch = arch;
  model.attribute = attribute;
  model.solver = solver;
  model.blocks.resize(arch.num_blocks);
  for (auto& block : model.blocks) {
    block.layers.resize(arch.layers_per_block);
    for (int l = 0; l < arch.layers_per_block; ++l) {
      int in = l == 0 ? arch.latent_dim : arch.hidden_width;
      int out = l == arch.layers_per_block - 1 ? arch.latent_dim
                                               : arch.hidden_width;
      auto& layer = block.layers[l];
      layer.w = Mat(out, in);
      // Near-identity start: a small last layer keeps the initial velocity
      // field gentle, so the untrained flow is numerically invertible.
      double scale = 1.0 / std::sqrt(static_cast<double>(in));
      if (l == arch.layers_per_block - 1) {
        scale *= 0.1;
      }
      fill(layer.w, scale);
      layer.b = Vec::Zero(out);
      layer.wg = Mat(out, 2);
      fill(layer.wg, 0.5);
      layer.bg = Vec::Constant(out, 1.0);
      layer.wc = Mat(out, 2);
      fill(layer.wc, l == arch.layers_per_block - 1 ? 0.01 : 0.1);
    }
  }
  return model;
}

Vec dynamics_eval(const CnfModel& model, int block_index, const Vec& w,
                  const MappingContext& ctx) {
  if (block_index < 0 ||
      block_index >= static_cast<int>(model.blocks.size())) {
    throw DimensionError("dynamics_eval: block index out of range");
  }
  if (w.size() != model.arch.latent_dim) {
    throw DimensionError("dynamics_eval: latent size mismatch");
  }
  return model.blocks[block_index].dynamics(w, ctx);
}

int parameter_count(const CnfModel& model) {
  int n = 0;
  for (const auto& block : model.blocks) {
    for (const auto& layer : block.layers) {
      n += static_cast<int>(layer.w.size() + layer.b.size() + layer.wg.size() +
                            layer.bg.size() + layer.wc.size());
    }
  }
  return n;
}

namespace {

template <typename MatFn, typename VecFn>
void walk_parameters(const CnfModel& model, MatFn&& on_mat, VecFn&& on_vec) {
  for (const auto& block : model.blocks) {
    for (const auto& layer : block.layers) {
      on_mat(layer.w);
      on_vec(layer.b);
      on_mat(layer.wg);
      on_vec(layer.bg);
      on_mat(layer.wc);
    }
  }
}

}  // namespace

Vec get_parameters(const CnfModel& model) {
  Vec theta(parameter_count(model));
  int k = 0;
  walk_parameters(
      model,
      [&](const Mat& m) {
        for (int r = 0; r < m.rows(); ++r) {
          for (int c = 0; c < m.cols(); ++c) {
            theta[k++] = m(r, c);
          }
        }
      },
      [&](const Vec& v) {
        for (int i = 0; i < v.size(); ++i) {
          theta[k++] = v[i];
        }
      });
  return theta;
}

void set_parameters(CnfModel& model, const Vec& theta) {
  if (theta.size() != parameter_count(model)) {
    throw DimensionError("set_parameters: size mismatch");
  }
  int k = 0;
  for (auto& block : model.blocks) {
    for (auto& layer : block.layers) {
      auto read_mat = [&](Mat& m) {
        for (int r = 0; r < m.rows(); ++r) {
          for (int c = 0; c < m.cols(); ++c) {
            m(r, c) = theta[k++];
          }
        }
      };
      auto read_vec = [&](Vec& v) {
        for (int i = 0; i < v.size(); ++i) {
          v[i] = theta[k++];
        }
      };
      read_mat(layer.w);
      read_vec(layer.b);
      read_mat(layer.wg);
      read_vec(layer.bg);
      read_mat(layer.wc);
    }
  }
}

}  // namespace impflow
