#include "impflow/world/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "impflow/optim.hpp"
#include "impflow/world/render.hpp"

namespace impflow {
namespace {

constexpr int kE1Hidden = 96;

Vec pooled_column(const ImageGrid& image, int grid) {
  Mat pooled = pool_to_grid(image, grid);
  Vec out(grid * grid);
  int k = 0;
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      out[k++] = pooled(r, c);
    }
  }
  return out;
}

}  // namespace

EncoderModel make_encoder(uint64_t seed, int image_size) {
  if (image_size < 8 || image_size % 8 != 0) {
    throw ConfigError("make_encoder: image size must be a multiple of 8");
  }
  EncoderModel model;
  model.image_size = image_size;
  model.features.pool_sizes = {image_size, 16, 8, 4, 2, 1};
  if (image_size <= 16) {
    model.features.pool_sizes = {image_size, 8, 4, 2, 1};
  }
  model.e1 = make_mlp({feature_dim(model.features), kE1Hidden, model.latent_dim},
                      /*sigmoid_output=*/false, seed);
  const int cells = model.appearance_grid * model.appearance_grid;
  model.corrector = make_mlp({2 * model.appearance_channels * cells, 96,
                              image_size * image_size},
                             /*sigmoid_output=*/false, seed ^ 0xA511E9B3ull);
  std::mt19937_64 rng(seed * 0x2545F4914F6CDD1Dull + 3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  model.e2_scale = Vec(model.appearance_channels);
  model.e2_bias = Vec::Zero(model.appearance_channels);
  for (int c = 0; c < model.appearance_channels; ++c) {
    model.e2_scale[c] = 1.0 + 0.2 * gauss(rng);
  }
  return model;
}

Vec encode(const EncoderModel& model, const ImageGrid& image) {
  if (image.height != model.image_size || image.width != model.image_size) {
    throw DimensionError("encode: image size mismatch");
  }
  return mlp_forward(model.e1, extract_features(image, model.features));
}

Vec appearance_features(const EncoderModel& model, const ImageGrid& image) {
  if (image.height != model.image_size || image.width != model.image_size) {
    throw DimensionError("appearance_features: image size mismatch");
  }
  const int cells = model.appearance_grid * model.appearance_grid;
  Vec pooled = pooled_column(image, model.appearance_grid);
  Vec out(model.appearance_channels * cells);
  for (int c = 0; c < model.appearance_channels; ++c) {
    out.segment(c * cells, cells) =
        model.e2_scale[c] * pooled + Vec::Constant(cells, model.e2_bias[c]);
  }
  return out;
}

Vec appearance_code(const EncoderModel& model, const ImageGrid& xprime,
                    const ImageGrid& original) {
  Vec a = appearance_features(model, xprime);
  Vec b = appearance_features(model, original);
  Vec h(a.size() + b.size());
  h << a, b;
  return h;
}

ImageGrid invert_with_restoration(const EncoderModel& model, const Vec& w,
                                  const ImageGrid& original,
                                  const MixingMatrix& mixing) {
  if (!model.corrector_trained) {
    throw NotReadyError("invert_with_restoration: corrector not trained");
  }
  RenderConfig rc;
  rc.image_size = model.image_size;
  ImageGrid xprime = render_face(mixing.to_params(w), rc);
  Vec h = appearance_code(model, xprime, original);
  Vec delta = mlp_forward(model.corrector, h);
  ImageGrid out = xprime;
  for (int i = 0; i < out.size(); ++i) {
    out.pixels[i] = std::clamp(out.pixels[i] + delta[i], 0.0, 1.0);
  }
  return out;
}

EncoderTrainResult train_encoder(const EncoderModel& init,
                                 const std::vector<ImageGrid>& images,
                                 const Mat& latents, const TrainConfig& cfg) {
  if (images.empty() ||
      latents.cols() != static_cast<Eigen::Index>(images.size()) ||
      latents.rows() != init.latent_dim) {
    throw DimensionError("train_encoder: dataset shape mismatch");
  }
  const int n = static_cast<int>(images.size());
  Mat inputs(feature_dim(init.features), n);
  for (int i = 0; i < n; ++i) {
    inputs.col(i) = extract_features(images[i], init.features);
  }
  MlpTrainResult trained = train_mlp(init.e1, inputs, latents, cfg);
  EncoderTrainResult out;
  out.model = init;
  out.model.e1 = std::move(trained.mlp);
  out.model.e1_trained = cfg.iterations > 0;
  out.loss_curve = std::move(trained.loss_curve);
  return out;
}

std::vector<double> train_corrector(EncoderModel& model,
                                    const std::vector<ImageGrid>& images,
                                    const MixingMatrix& mixing,
                                    const TrainConfig& cfg) {
  if (images.empty()) {
    throw DimensionError("train_corrector: empty dataset");
  }
  if (cfg.iterations < 0 || cfg.batch_size < 1) {
    throw ConfigError("train_corrector: bad optimizer config");
  }
  const int n = static_cast<int>(images.size());
  const int cells = model.appearance_grid * model.appearance_grid;
  const int chans = model.appearance_channels;
  const int npix = model.image_size * model.image_size;

  // Reconstructions depend only on the frozen E1, so pool them once.
  Mat pooled_rec(cells, n);
  Mat pooled_orig(cells, n);
  Mat residual(npix, n);
  RenderConfig rc;
  rc.image_size = model.image_size;
  for (int i = 0; i < n; ++i) {
    Vec what = encode(model, images[i]);
    ImageGrid rec = render_face(mixing.to_params(what), rc);
    pooled_rec.col(i) = pooled_column(rec, model.appearance_grid);
    pooled_orig.col(i) = pooled_column(images[i], model.appearance_grid);
    for (int j = 0; j < npix; ++j) {
      residual(j, i) = images[i].pixels[j] - rec.pixels[j];
    }
  }

  std::vector<double> curve;
  if (cfg.iterations == 0) {
    return curve;
  }
  const int bsz = std::min(cfg.batch_size, n);
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + 0x94D049BB133111EBull);
  std::uniform_int_distribution<int> pick(0, n - 1);

  const int mlp_params = mlp_parameter_count(model.corrector);
  Vec theta(mlp_params + 2 * chans);
  theta.head(mlp_params) = mlp_get_parameters(model.corrector);
  theta.segment(mlp_params, chans) = model.e2_scale;
  theta.tail(chans) = model.e2_bias;
  AdamState adam(theta.size());

  Mat batch_rec(cells, bsz), batch_orig(cells, bsz), batch_res(npix, bsz);
  Mat code(2 * chans * cells, bsz);
  Mat code_grad;
  curve.reserve(cfg.iterations);
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    for (int b = 0; b < bsz; ++b) {
      const int idx = pick(rng);
      batch_rec.col(b) = pooled_rec.col(idx);
      batch_orig.col(b) = pooled_orig.col(idx);
      batch_res.col(b) = residual.col(idx);
    }
    for (int c = 0; c < chans; ++c) {
      code.middleRows(c * cells, cells) =
          (model.e2_scale[c] * batch_rec).array() + model.e2_bias[c];
      code.middleRows((chans + c) * cells, cells) =
          (model.e2_scale[c] * batch_orig).array() + model.e2_bias[c];
    }
    MlpGrads grads = mlp_zero_grads(model.corrector);
    const double loss =
        mlp_mse_step(model.corrector, code, batch_res, &grads, &code_grad);
    if (!std::isfinite(loss)) {
      throw NumericError("train_corrector: loss diverged at iteration " +
                         std::to_string(iter));
    }
    Vec g(theta.size());
    g.head(mlp_params) = mlp_flatten_grads(model.corrector, grads);
    for (int c = 0; c < chans; ++c) {
      const auto grec = code_grad.middleRows(c * cells, cells).array();
      const auto gorig = code_grad.middleRows((chans + c) * cells, cells).array();
      g[mlp_params + c] = (grec * batch_rec.array()).sum() +
                          (gorig * batch_orig.array()).sum();
      g[mlp_params + chans + c] = grec.sum() + gorig.sum();
    }
    adam.apply(theta, g, cfg);
    mlp_set_parameters(model.corrector, theta.head(mlp_params));
    model.e2_scale = theta.segment(mlp_params, chans);
    model.e2_bias = theta.tail(chans);
    curve.push_back(loss);
  }
  model.corrector_trained = true;
  return curve;
}

Vec identity_embed(const FaceParams& p) {
  return p.values.head(param::kIdentityDims);
}

Vec identity_embed(const Vec& w, const MixingMatrix& mixing) {
  return mixing.to_params(w).values.head(param::kIdentityDims);
}

std::function<Vec(const ImageGrid&)> make_image_identity_provider(
    const EncoderModel& model, const MixingMatrix& mixing) {
  return [&model, &mixing](const ImageGrid& image) {
    return identity_embed(encode(model, image), mixing);
  };
}

}  // namespace impflow
