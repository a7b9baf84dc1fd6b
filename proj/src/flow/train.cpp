#include "impflow/flow/train.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace impflow {
namespace {

// Tangent matrices carry one column per latent axis per sample: sample b owns
// columns [b*d, (b+1)*d). Gates and activation slopes are per sample, so they
// scale whole column groups.
void scale_groups(Mat& m, const Mat& s, int d) {
  for (int b = 0; b < s.cols(); ++b) {
    m.middleCols(b * d, d) =
        (m.middleCols(b * d, d).array().colwise() * s.col(b).array()).matrix();
  }
}

Mat group_rowsum_product(const Mat& m1, const Mat& m2, int d, int nb) {
  Mat r(m1.rows(), nb);
  for (int b = 0; b < nb; ++b) {
    r.col(b) = (m1.middleCols(b * d, d).array() * m2.middleCols(b * d, d).array())
                   .rowwise()
                   .sum();
  }
  return r;
}

Mat sigmoid(Mat m) {
  return m.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

struct LayerGrads {
  Mat w, wg, wc;
  Vec b, bg;
};
using BlockGrads = std::vector<LayerGrads>;

BlockGrads zero_block_grads(const CnfBlock& block) {
  BlockGrads g(block.layers.size());
  for (size_t l = 0; l < block.layers.size(); ++l) {
    const auto& layer = block.layers[l];
    g[l].w = Mat::Zero(layer.w.rows(), layer.w.cols());
    g[l].b = Vec::Zero(layer.b.size());
    g[l].wg = Mat::Zero(layer.wg.rows(), layer.wg.cols());
    g[l].bg = Vec::Zero(layer.bg.size());
    g[l].wc = Mat::Zero(layer.wc.rows(), layer.wc.cols());
  }
  return g;
}

// Everything the backward pass needs from one velocity evaluation.
struct StageTape {
  std::vector<Mat> a;    // a[l]: input of layer l; a[L]: stage output
  std::vector<Mat> z;    // pre-gate linear part, with bias
  std::vector<Mat> g;    // gates
  std::vector<Mat> tin;  // tangent inputs
  std::vector<Mat> tz;   // w * tin
  std::vector<Mat> ty;   // tz .* gate
};

Mat context_matrix(double t, const Vec& scores) {
  Mat c(2, scores.size());
  c.row(0).setConstant(t);
  c.row(1) = scores.transpose();
  return c;
}

// Velocity of the block for a batch of states, with the exact per-sample
// divergence when `trace` is given.
void stage_forward(const CnfBlock& block, double t, const Vec& scores,
                   const Mat& in, Mat* phi, Vec* trace, StageTape* tape) {
  const int nb = static_cast<int>(in.cols());
  const int d = static_cast<int>(in.rows());
  const bool want_trace = trace != nullptr;
  const size_t nlayers = block.layers.size();
  Mat c = context_matrix(t, scores);

  Mat a = in;
  Mat tg;
  if (want_trace) {
    tg = Mat::Zero(d, static_cast<Eigen::Index>(nb) * d);
    for (int b = 0; b < nb; ++b) {
      tg.middleCols(b * d, d).setIdentity();
    }
  }

  for (size_t l = 0; l < nlayers; ++l) {
    const auto& layer = block.layers[l];
    Mat z = layer.w * a;
    z.colwise() += layer.b;
    Mat gate = sigmoid((layer.wg * c).colwise() + layer.bg);
    Mat y = z.cwiseProduct(gate) + layer.wc * c;
    Mat tz, ty;
    if (want_trace) {
      tz = layer.w * tg;
      ty = tz;
      scale_groups(ty, gate, d);
    }
    if (tape) {
      tape->a.push_back(a);
      tape->z.push_back(std::move(z));
      tape->g.push_back(gate);
      tape->tin.push_back(std::move(tg));
      tape->tz.push_back(tz);
      tape->ty.push_back(ty);
    }
    if (l + 1 < nlayers) {
      a = y.array().tanh().matrix();
      if (want_trace) {
        Mat slope = (1.0 - a.array().square()).matrix();
        tg = std::move(ty);
        scale_groups(tg, slope, d);
      }
    } else {
      a = std::move(y);
      if (want_trace) {
        tg = std::move(ty);
      }
    }
  }
  if (tape) {
    tape->a.push_back(a);
  }
  if (want_trace) {
    for (int b = 0; b < nb; ++b) {
      (*trace)[b] = tg.block(0, b * d, d, d).trace();
    }
  }
  *phi = std::move(a);
}

// Pulls cotangents of (velocity, divergence) back to the stage input,
// accumulating parameter gradients on the way. The divergence path needs the
// mixed second-order terms: the tangent chain re-enters the primal chain
// through the tanh slopes.
Mat stage_backward(const CnfBlock& block, const StageTape& tape, double t,
                   const Vec& scores, const Mat& phi_bar, const Vec& trace_bar,
                   BlockGrads& grads) {
  const int nb = static_cast<int>(phi_bar.cols());
  const int d = static_cast<int>(tape.a[0].rows());
  const int nlayers = static_cast<int>(block.layers.size());
  Mat c = context_matrix(t, scores);

  Mat abar = phi_bar;
  Mat tbar = Mat::Zero(d, static_cast<Eigen::Index>(nb) * d);
  for (int b = 0; b < nb; ++b) {
    for (int i = 0; i < d; ++i) {
      tbar(i, b * d + i) = trace_bar[b];
    }
  }

  for (int l = nlayers - 1; l >= 0; --l) {
    const auto& layer = block.layers[l];
    Mat ybar, tybar;
    if (l + 1 < nlayers) {
      const Mat& post = tape.a[l + 1];  // tanh output
      Mat slope = (1.0 - post.array().square()).matrix();
      ybar = abar.cwiseProduct(slope);
      tybar = tbar;
      scale_groups(tybar, slope, d);
      Mat coupling = group_rowsum_product(tbar, tape.ty[l], d, nb);
      ybar += (-2.0 * post.array() * slope.array()).matrix().cwiseProduct(coupling);
    } else {
      ybar = abar;
      tybar = tbar;
    }

    Mat zbar = ybar.cwiseProduct(tape.g[l]);
    Mat gbar = ybar.cwiseProduct(tape.z[l]) +
               group_rowsum_product(tybar, tape.tz[l], d, nb);
    Mat tzbar = std::move(tybar);
    scale_groups(tzbar, tape.g[l], d);

    grads[l].wc.noalias() += ybar * c.transpose();
    grads[l].w.noalias() += zbar * tape.a[l].transpose();
    grads[l].w.noalias() += tzbar * tape.tin[l].transpose();
    grads[l].b += zbar.rowwise().sum();
    Mat ubar =
        (gbar.array() * tape.g[l].array() * (1.0 - tape.g[l].array())).matrix();
    grads[l].wg.noalias() += ubar * c.transpose();
    grads[l].bg += ubar.rowwise().sum();

    abar = layer.w.transpose() * zbar;
    tbar = layer.w.transpose() * tzbar;
  }
  return abar;
}

struct PathStep {
  Mat w;
  Mat phi1, phi2, phi3;
};

double nll_core(const CnfModel& model, const Mat& latents, const Vec& scores,
                Vec* grad_out) {
  const int d = model.arch.latent_dim;
  const int nb = static_cast<int>(latents.cols());
  if (latents.rows() != d) {
    throw DimensionError("nll_batch: latent dimension mismatch");
  }
  if (scores.size() != nb || nb == 0) {
    throw DimensionError("nll_batch: score count mismatch");
  }
  const int steps = model.solver.steps;
  if (steps < 1) {
    throw ConfigError("nll_batch: solver steps must be positive");
  }
  const double h = -1.0 / steps;
  const int nblocks = static_cast<int>(model.blocks.size());
  const bool need_grad = grad_out != nullptr;

  Mat state = latents;
  Vec ell = Vec::Zero(nb);
  // path[p] holds the steps of the p-th block processed (model order
  // nblocks-1 down to 0).
  std::vector<std::vector<PathStep>> path;

  for (int bi = nblocks - 1; bi >= 0; --bi) {
    const CnfBlock& block = model.blocks[bi];
    std::vector<PathStep> block_steps;
    double t = 1.0;
    for (int s = 0; s < steps; ++s) {
      Mat phi1, phi2, phi3, phi4;
      Vec tr1(nb), tr2(nb), tr3(nb), tr4(nb);
      stage_forward(block, t, scores, state, &phi1, &tr1, nullptr);
      stage_forward(block, t + 0.5 * h, scores, state + 0.5 * h * phi1, &phi2,
                    &tr2, nullptr);
      stage_forward(block, t + 0.5 * h, scores, state + 0.5 * h * phi2, &phi3,
                    &tr3, nullptr);
      stage_forward(block, t + h, scores, state + h * phi3, &phi4, &tr4,
                    nullptr);
      if (need_grad) {
        block_steps.push_back({state, phi1, phi2, phi3});
      }
      state += (h / 6.0) * (phi1 + 2.0 * phi2 + 2.0 * phi3 + phi4);
      ell += (h / 6.0) * (tr1 + 2.0 * tr2 + 2.0 * tr3 + tr4);
      t += h;
      if (!state.allFinite()) {
        throw NumericError("nll_batch: state diverged at step " +
                           std::to_string(s) + " of block " +
                           std::to_string(bi));
      }
    }
    if (need_grad) {
      path.push_back(std::move(block_steps));
    }
  }

  double total = 0.0;
  const double log_norm = 0.5 * d * std::log(2.0 * std::numbers::pi);
  for (int b = 0; b < nb; ++b) {
    total += 0.5 * state.col(b).squaredNorm() + log_norm - ell[b];
  }
  double loss = total / nb;
  if (!need_grad) {
    return loss;
  }

  std::vector<BlockGrads> grads;
  grads.reserve(nblocks);
  for (const auto& block : model.blocks) {
    grads.push_back(zero_block_grads(block));
  }

  Mat wbar = state / nb;
  const Vec ellbar = Vec::Constant(nb, -1.0 / nb);

  // Walk the computation backwards: block 0 was processed last.
  int pi = nblocks - 1;
  for (int bi = 0; bi < nblocks; ++bi, --pi) {
    const CnfBlock& block = model.blocks[bi];
    const auto& block_steps = path[pi];
    for (int s = steps - 1; s >= 0; --s) {
      const PathStep& st = block_steps[s];
      const double t = 1.0 + s * h;
      Mat wbar_n = wbar;
      Mat phibar1 = (h / 6.0) * wbar;
      Mat phibar2 = (h / 3.0) * wbar;
      Mat phibar3 = (h / 3.0) * wbar;
      Mat phibar4 = (h / 6.0) * wbar;
      const Vec tb16 = (h / 6.0) * ellbar;
      const Vec tb13 = (h / 3.0) * ellbar;

      {
        StageTape tape;
        Mat phi;
        Vec tr(nb);
        stage_forward(block, t + h, scores, st.w + h * st.phi3, &phi, &tr,
                      &tape);
        Mat xbar = stage_backward(block, tape, t + h, scores, phibar4, tb16,
                                  grads[bi]);
        wbar_n += xbar;
        phibar3 += h * xbar;
      }
      {
        StageTape tape;
        Mat phi;
        Vec tr(nb);
        stage_forward(block, t + 0.5 * h, scores, st.w + 0.5 * h * st.phi2,
                      &phi, &tr, &tape);
        Mat xbar = stage_backward(block, tape, t + 0.5 * h, scores, phibar3,
                                  tb13, grads[bi]);
        wbar_n += xbar;
        phibar2 += 0.5 * h * xbar;
      }
      {
        StageTape tape;
        Mat phi;
        Vec tr(nb);
        stage_forward(block, t + 0.5 * h, scores, st.w + 0.5 * h * st.phi1,
                      &phi, &tr, &tape);
        Mat xbar = stage_backward(block, tape, t + 0.5 * h, scores, phibar2,
                                  tb13, grads[bi]);
        wbar_n += xbar;
        phibar1 += 0.5 * h * xbar;
      }
      {
        StageTape tape;
        Mat phi;
        Vec tr(nb);
        stage_forward(block, t, scores, st.w, &phi, &tr, &tape);
        Mat xbar =
            stage_backward(block, tape, t, scores, phibar1, tb16, grads[bi]);
        wbar_n += xbar;
      }
      wbar = std::move(wbar_n);
    }
  }

  // Flatten in get_parameters() order.
  Vec& g = *grad_out;
  g.resize(parameter_count(model));
  int k = 0;
  for (int bi = 0; bi < nblocks; ++bi) {
    for (const auto& lg : grads[bi]) {
      for (int r = 0; r < lg.w.rows(); ++r) {
        for (int cidx = 0; cidx < lg.w.cols(); ++cidx) {
          g[k++] = lg.w(r, cidx);
        }
      }
      for (int i = 0; i < lg.b.size(); ++i) {
        g[k++] = lg.b[i];
      }
      for (int r = 0; r < lg.wg.rows(); ++r) {
        for (int cidx = 0; cidx < lg.wg.cols(); ++cidx) {
          g[k++] = lg.wg(r, cidx);
        }
      }
      for (int i = 0; i < lg.bg.size(); ++i) {
        g[k++] = lg.bg[i];
      }
      for (int r = 0; r < lg.wc.rows(); ++r) {
        for (int cidx = 0; cidx < lg.wc.cols(); ++cidx) {
          g[k++] = lg.wc(r, cidx);
        }
      }
    }
  }
  return loss;
}

}  // namespace

double nll_batch(const CnfModel& model, const Mat& latents, const Vec& scores) {
  return nll_core(model, latents, scores, nullptr);
}

double nll_batch_grad(const CnfModel& model, const Mat& latents,
                      const Vec& scores, Vec* grad) {
  if (grad == nullptr) {
    throw ConfigError("nll_batch_grad: grad output required");
  }
  return nll_core(model, latents, scores, grad);
}

FlowTrainResult train_mapper(const std::vector<FlowSample>& data,
                             const FlowArchitecture& arch,
                             AttributeKind attribute, const TrainConfig& cfg,
                             const SolverConfig& solver) {
  if (data.empty()) {
    throw DimensionError("train_mapper: empty dataset");
  }
  for (const auto& s : data) {
    if (s.latent.size() != arch.latent_dim) {
      throw DimensionError("train_mapper: latent dimension mismatch");
    }
    if (!(s.score >= 0.0 && s.score <= 1.0)) {
      throw ConfigError("train_mapper: score outside [0, 1]");
    }
  }
  if (cfg.iterations < 0 || cfg.batch_size < 1) {
    throw ConfigError("train_mapper: bad optimizer config");
  }

  FlowTrainResult out;
  out.model = init_cnf_model(arch, attribute, cfg.seed, solver);
  if (cfg.iterations == 0) {
    return out;
  }

  const int n = static_cast<int>(data.size());
  const int bsz = std::min(cfg.batch_size, n);
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Vec theta = get_parameters(out.model);
  Vec m = Vec::Zero(theta.size());
  Vec v = Vec::Zero(theta.size());
  Mat batch(arch.latent_dim, bsz);
  Vec scores(bsz);
  Vec grad;

  out.loss_curve.reserve(cfg.iterations);
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    for (int b = 0; b < bsz; ++b) {
      int idx = pick(rng);
      batch.col(b) = data[idx].latent;
      scores[b] = data[idx].score;
    }
    double loss = nll_batch_grad(out.model, batch, scores, &grad);
    if (!std::isfinite(loss)) {
      throw NumericError("train_mapper: loss diverged at iteration " +
                         std::to_string(iter));
    }
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    double c1 = 1.0 - std::pow(cfg.beta1, iter);
    double c2 = 1.0 - std::pow(cfg.beta2, iter);
    theta -= (cfg.learning_rate / c1) * m.cwiseQuotient(
                 ((v / c2).cwiseSqrt().array() + cfg.epsilon).matrix());
    set_parameters(out.model, theta);
    out.loss_curve.push_back(loss);
  }
  return out;
}

}  // namespace impflow
