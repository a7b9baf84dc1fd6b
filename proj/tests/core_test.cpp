#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <doctest.h>

#include "impflow/flow/ode.hpp"
#include "impflow/io/dataset_io.hpp"
#include "impflow/io/model_io.hpp"
#include "impflow/io/pgm.hpp"
#include "impflow/metrics/adas.hpp"
#include "impflow/metrics/frechet.hpp"
#include "impflow/metrics/identity.hpp"
#include "impflow/metrics/perceptual.hpp"
#include "impflow/metrics/report.hpp"
#include "impflow/pipeline/bundle.hpp"
#include "impflow/predictor/features.hpp"
#include "impflow/predictor/mlp.hpp"
#include "impflow/predictor/regressor.hpp"
#include "impflow/spectrum/bias.hpp"
#include "impflow/spectrum/histogram.hpp"
#include "impflow/util.hpp"
#include "impflow/world/encoder.hpp"
#include "impflow/world/filter.hpp"
#include "impflow/world/mixing.hpp"
#include "impflow/world/oracle.hpp"
#include "impflow/world/render.hpp"
#include "impflow/world/sample.hpp"
#include "oracles.hpp"

using namespace impflow;

namespace {

// Pinned at the first verified build; renderer output for all-zero params.
constexpr const char* kGoldenZeroChecksum = "3681f1c3e20f137d";

std::string quantized_checksum(const ImageGrid& img) {
  std::string bytes;
  bytes.reserve(img.pixels.size());
  for (double v : img.pixels) {
    bytes.push_back(static_cast<char>(static_cast<int>(v * 255.0 + 0.5)));
  }
  return to_hex(fnv1a64(bytes));
}

std::filesystem::path temp_dir(const char* tag) {
  auto p = std::filesystem::temp_directory_path() /
           (std::string("impflow_test_") + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64(std::string_view{}) == 14695981039346656037ull);
  CHECK(fnv1a64(std::string_view{"a"}) == 0xaf63dc4c8601ec8cull);
  CHECK(to_hex(0xaf63dc4c8601ec8cull) == "af63dc4c8601ec8c");
  CHECK(to_hex(0) == "0000000000000000");
}

TEST_CASE("attribute tags round-trip") {
  for (AttributeKind a : kAllAttributes) {
    CHECK(attribute_from_string(to_string(a)) == a);
  }
  CHECK_THROWS_AS(attribute_from_string("charisma"), ConfigError);
}

// ---- renderer ----

TEST_CASE("render determinism and golden image") {
  FaceParams p;
  ImageGrid a = render_face(p);
  ImageGrid b = render_face(p);
  CHECK(a.pixels == b.pixels);
  CHECK(quantized_checksum(a) == kGoldenZeroChecksum);
}

TEST_CASE("render clamps out-of-range params and bounds pixels") {
  FaceParams p;
  p[param::kSmile] = 3.0;
  RenderOutput out = render_face_detailed(p);
  CHECK(out.clamped);
  for (double v : out.image.pixels) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  FaceParams q;
  q[param::kSmile] = std::nan("");
  CHECK_THROWS_AS(render_face(q), NumericError);
}

TEST_CASE("smile raises the upper mouth band intensity") {
  auto band_mean = [](const ImageGrid& im) {
    double v = 0.0;
    int n = 0;
    for (int r = 18; r <= 20; ++r) {
      for (int c = 8; c < 24; ++c) {
        v += im.at(r, c);
        ++n;
      }
    }
    return v / n;
  };
  double prev = -1.0;
  for (int i = 0; i <= 10; ++i) {
    FaceParams p;
    p[param::kSmile] = -1.0 + 0.2 * i;
    const double v = band_mean(render_face(p));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("foreground energy is a fraction") {
  const double e = foreground_energy(render_face(FaceParams{}));
  CHECK(e > 0.0);
  CHECK(e < 1.0);
  ImageGrid blank;
  CHECK(foreground_energy(blank) == 0.0);
}

// ---- truth scores ----

TEST_CASE("truth score examples") {
  FaceParams zero;
  for (AttributeKind a : kAllAttributes) {
    CHECK(truth_score(zero, a) == doctest::Approx(0.5).epsilon(1e-12));
  }
  FaceParams smiley;
  smiley[param::kSmile] = 1.0;
  CHECK(truth_score(smiley, AttributeKind::kTrustworthiness) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-1.5))).epsilon(1e-12));
}

TEST_CASE("truth score matches scalar oracle at random points") {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    FaceParams p;
    for (int j = 0; j < param::kCount; ++j) {
      p[j] = u(rng);
    }
    const double smile = p[param::kSmile], brow = p[param::kBrowAngle],
                 eyes = p[param::kEyeOpenness],
                 wrinkle = p[param::kWrinkleDensity],
                 beard = p[param::kFacialHair];
    CHECK(truth_score(p, AttributeKind::kTrustworthiness) ==
          doctest::Approx(oracle::trust(smile, brow, eyes, wrinkle))
              .epsilon(1e-12));
    CHECK(truth_score(p, AttributeKind::kDominance) ==
          doctest::Approx(oracle::dominance(smile, brow, wrinkle, beard))
              .epsilon(1e-12));
    CHECK(truth_score(p, AttributeKind::kAttractiveness) ==
          doctest::Approx(oracle::attractiveness(smile, eyes, wrinkle))
              .epsilon(1e-12));
  }
}

TEST_CASE("truth score monotone in each covariate with the fixed sign") {
  struct Slope {
    AttributeKind attr;
    int index;
    int sign;
  };
  const Slope slopes[] = {
      {AttributeKind::kTrustworthiness, param::kSmile, +1},
      {AttributeKind::kTrustworthiness, param::kBrowAngle, -1},
      {AttributeKind::kTrustworthiness, param::kWrinkleDensity, -1},
      {AttributeKind::kTrustworthiness, param::kEyeOpenness, +1},
      {AttributeKind::kDominance, param::kBrowAngle, +1},
      {AttributeKind::kDominance, param::kFacialHair, +1},
      {AttributeKind::kDominance, param::kWrinkleDensity, +1},
      {AttributeKind::kDominance, param::kSmile, -1},
      {AttributeKind::kAttractiveness, param::kSmile, +1},
      {AttributeKind::kAttractiveness, param::kEyeOpenness, +1},
      {AttributeKind::kAttractiveness, param::kWrinkleDensity, -1},
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  for (const Slope& s : slopes) {
    for (int i = 0; i < 100; ++i) {
      FaceParams p;
      for (int j = 0; j < param::kCount; ++j) {
        p[j] = u(rng);
      }
      FaceParams hi = p, lo = p;
      hi[s.index] += h;
      lo[s.index] -= h;
      const double d = truth_score(hi, s.attr) - truth_score(lo, s.attr);
      CHECK(d * s.sign > 0.0);
    }
  }
  // identity parameters never move the score
  FaceParams p;
  FaceParams q;
  q[param::kFaceWidth] = 0.9;
  q[param::kHairMarker] = -0.7;
  for (AttributeKind a : kAllAttributes) {
    CHECK(truth_score(p, a) == truth_score(q, a));
  }
}

// ---- mixing matrix ----

TEST_CASE("mixing matrix is benign and invertible") {
  for (uint64_t seed : {1ull, 7ull, 77ull, 123ull}) {
    MixingMatrix m = MixingMatrix::generate(seed);
    CHECK(std::abs(m.m.determinant()) > 1e-6);
    CHECK(m.condition_number() < 50.0);
    FaceParams p;
    p[param::kSmile] = 0.4;
    p[param::kNoseLength] = -0.3;
    const Vec w = m.to_latent(p);
    CHECK((m.to_params(w).values - p.values).cwiseAbs().maxCoeff() < 1e-10);
  }
  // different seeds mix differently
  CHECK((MixingMatrix::generate(1).m - MixingMatrix::generate(2).m)
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

// ---- sampling ----

TEST_CASE("sample_dataset determinism and bounds") {
  WorldConfig world;
  SampleSet a = sample_dataset(40, 5, false, world);
  SampleSet b = sample_dataset(40, 5, false, world);
  REQUIRE(a.size() == 40);
  for (int i = 0; i < 40; ++i) {
    CHECK((a.params[i].values - b.params[i].values).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(a.images[i].pixels == b.images[i].pixels);
    CHECK(a.params[i].values.cwiseAbs().maxCoeff() <= 1.0);
    for (int k = 0; k < 3; ++k) {
      CHECK(a.scores[i][k] ==
            truth_score(a.params[i], static_cast<AttributeKind>(k)));
    }
  }
  CHECK((sample_dataset(40, 6, false, world).params[0].values -
         a.params[0].values)
            .cwiseAbs()
            .maxCoeff() > 0.0);
  CHECK_THROWS_AS(sample_dataset(0, 5, false, world), ConfigError);
}

TEST_CASE("adult_only folds wrinkle density non-negative") {
  SampleSet s = sample_dataset(200, 3, true, WorldConfig{});
  for (const auto& p : s.params) {
    CHECK(p[param::kWrinkleDensity] >= 0.0);
  }
}

TEST_CASE("covariate scale shrinks covariates only") {
  WorldConfig narrow;
  narrow.covariate_scale = 0.45;
  SampleSet wide = sample_dataset(100, 9, false, WorldConfig{});
  SampleSet slim = sample_dataset(100, 9, false, narrow);
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < param::kIdentityDims; ++j) {
      CHECK(slim.params[i][j] == wide.params[i][j]);
    }
    for (int j = param::kIdentityDims; j < param::kCount; ++j) {
      CHECK(slim.params[i][j] ==
            doctest::Approx(0.45 * wide.params[i][j]).epsilon(1e-12));
    }
  }
}

// ---- quality filter ----

TEST_CASE("quality filter thresholds") {
  std::vector<QualityRecord> recs = {
      {0.5, 0.9},    // keep
      {0.5, 0.84},   // identity reject (bar is exclusive)
      {0.5, 0.85},   // boundary: not strictly above
      {0.1, 0.99},   // energy reject
      {0.1, 0.5},    // fails both, counts as energy
      {0.2, 0.851},  // keep (energy boundary inclusive)
  };
  QualityReport r = quality_filter(recs, 0.2, 0.85);
  CHECK(r.total == 6);
  CHECK(r.kept == 2);
  CHECK(r.rejected_identity == 2);
  CHECK(r.rejected_energy == 2);
  CHECK(r.keep ==
        std::vector<bool>({true, false, false, false, false, true}));
  // all-pass input comes back untouched
  std::vector<QualityRecord> good(4, {0.9, 0.99});
  QualityReport all = quality_filter(good, 0.2, 0.85);
  CHECK(all.kept == 4);
}

// ---- identity embeddings ----

TEST_CASE("identity embedding invariances") {
  MixingMatrix m = MixingMatrix::generate(77);
  FaceParams p;
  p[param::kFaceWidth] = 0.3;
  p[param::kChinShape] = -0.6;
  p[param::kSmile] = 0.2;
  FaceParams q = p;
  q[param::kSmile] = -0.9;
  q[param::kFacialHair] = 0.8;
  CHECK(cosine_similarity(identity_embed(p), identity_embed(q)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK((identity_embed(m.to_latent(p), m) - identity_embed(p))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  Vec a = Vec::Zero(6), b = Vec::Zero(6);
  a[0] = 1.0;
  b[1] = 1.0;
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
}

// ---- features / mlp / regressor ----

TEST_CASE("pool_to_grid averages regions") {
  ImageGrid img(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      img.at(r, c) = r * 4 + c;
    }
  }
  Mat g = pool_to_grid(img, 2);
  CHECK(g(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(g(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
  CHECK_THROWS_AS(pool_to_grid(img, 3), DimensionError);
}

TEST_CASE("feature dimension matches pool sizes") {
  FeatureMapConfig cfg;
  int expect = 0;
  for (int s : cfg.pool_sizes) {
    expect += s * s;
  }
  CHECK(feature_dim(cfg) == expect);
  ImageGrid img(32, 32);
  CHECK(extract_features(img, cfg).size() == expect);
}

TEST_CASE("mlp forward matches scalar evaluation") {
  Mlp mlp = make_mlp({2, 3, 2}, false, 99);
  // overwrite with hand values so the oracle is easy to follow
  mlp.w[0] << 0.5, -0.2, 0.1, 0.4, -0.3, 0.2;
  mlp.b[0] << 0.1, -0.1, 0.0;
  mlp.w[1] << 1.0, 0.5, -0.5, -1.0, 0.0, 2.0;
  mlp.b[1] << 0.2, -0.2;
  Vec x(2);
  x << 0.3, -0.7;
  Vec y = mlp_forward(mlp, x);
  const double h0 = std::tanh(0.5 * 0.3 + -0.2 * -0.7 + 0.1);
  const double h1 = std::tanh(0.1 * 0.3 + 0.4 * -0.7 + -0.1);
  const double h2 = std::tanh(-0.3 * 0.3 + 0.2 * -0.7 + 0.0);
  CHECK(y[0] ==
        doctest::Approx(1.0 * h0 + 0.5 * h1 - 0.5 * h2 + 0.2).epsilon(1e-12));
  CHECK(y[1] ==
        doctest::Approx(-1.0 * h0 + 0.0 * h1 + 2.0 * h2 - 0.2).epsilon(1e-12));
  // sigmoid head squashes
  Mlp sq = make_mlp({2, 3, 2}, true, 99);
  Vec ys = mlp_forward(sq, x);
  CHECK(ys[0] == doctest::Approx(0.5));  // zero-init final layer
}

TEST_CASE("mlp gradient matches finite differences") {
  Mlp mlp = make_mlp({3, 4, 2}, true, 5);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.5);
  Vec theta = mlp_get_parameters(mlp);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    theta[i] += g(rng);
  }
  mlp_set_parameters(mlp, theta);
  Mat x(3, 5), t(2, 5);
  for (int i = 0; i < 15; ++i) {
    x(i % 3, i / 3) = g(rng);
  }
  for (int i = 0; i < 10; ++i) {
    t(i % 2, i / 2) = 0.3 + 0.1 * (i % 4);
  }
  MlpGrads grads = mlp_zero_grads(mlp);
  mlp_mse_step(mlp, x, t, &grads, nullptr);
  Vec analytic = mlp_flatten_grads(mlp, grads);
  Mlp probe = mlp;
  Vec fd = oracle::fd_gradient(
      [&](const Vec& th) {
        mlp_set_parameters(probe, th);
        return mlp_mse_step(probe, x, t, nullptr, nullptr);
      },
      theta, 1e-6);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double denom = std::max(1e-8, std::abs(fd[i]));
    CHECK(std::abs(analytic[i] - fd[i]) / denom < 1e-4);
  }
}

TEST_CASE("mlp training determinism and zero-iteration identity") {
  Mat x(2, 30), t(1, 30);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    x(0, i) = g(rng);
    x(1, i) = g(rng);
    t(0, i) = 0.5 + 0.2 * std::tanh(x(0, i) - x(1, i));
  }
  Mlp init = make_mlp({2, 6, 1}, true, 17);
  TrainConfig cfg;
  cfg.iterations = 0;
  MlpTrainResult same = train_mlp(init, x, t, cfg);
  CHECK((mlp_get_parameters(same.mlp) - mlp_get_parameters(init))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  cfg.iterations = 300;
  cfg.batch_size = 10;
  MlpTrainResult a = train_mlp(init, x, t, cfg);
  MlpTrainResult b = train_mlp(init, x, t, cfg);
  CHECK((mlp_get_parameters(a.mlp) - mlp_get_parameters(b.mlp))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
}

TEST_CASE("untrained regressor predicts one half") {
  RegressorModel model = make_regressor(AttributeKind::kDominance, 4);
  ImageGrid img = render_face(FaceParams{});
  CHECK(predict_score(model, img) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(predict_score(model, img) == predict_score(model, img));
}

TEST_CASE("r_squared examples and invariances") {
  CHECK(r_squared({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == doctest::Approx(1.0));
  CHECK(r_squared({1.0, 1.0, 1.0}, {0.0, 1.0, 2.0}) == doctest::Approx(0.0));
  CHECK(r_squared({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}) == doctest::Approx(0.5));
  // permutation invariance (identical permutation on both lists)
  CHECK(r_squared({1.0, 0.0, 1.0}, {2.0, 0.0, 1.0}) ==
        doctest::Approx(r_squared({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0})));
  CHECK_THROWS_AS(r_squared({1.0, 2.0}, {3.0, 3.0}), NumericError);
  CHECK_THROWS_AS(r_squared({1.0}, {1.0, 2.0}), DimensionError);
}

TEST_CASE("regressor training rejects bad scores and zero iterations is identity") {
  SampleSet s = sample_dataset(10, 2, false, WorldConfig{});
  std::vector<ScoredSample> samples;
  for (int i = 0; i < 10; ++i) {
    samples.push_back({s.images[i], s.scores[i][0], "t"});
  }
  TrainConfig cfg;
  cfg.iterations = 0;
  RegressorModel init = make_regressor(AttributeKind::kTrustworthiness, 9);
  RegressorTrainResult r =
      train_regressor(samples, AttributeKind::kTrustworthiness, cfg, &init);
  CHECK((mlp_get_parameters(r.model.mlp) - mlp_get_parameters(init.mlp))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  samples[3].score = 1.4;
  CHECK_THROWS_AS(
      train_regressor(samples, AttributeKind::kTrustworthiness, cfg),
      ConfigError);
  CHECK_THROWS_AS(
      train_regressor({}, AttributeKind::kTrustworthiness, cfg),
      DimensionError);
}

// ---- encoder basics ----

TEST_CASE("untrained encoder maps to zero") {
  EncoderModel enc = make_encoder(12, 32);
  ImageGrid img = render_face(FaceParams{});
  Vec w = encode(enc, img);
  CHECK(w.size() == 12);
  CHECK(w.cwiseAbs().maxCoeff() == 0.0);  // zero-init output layer
  ImageGrid small(16, 16);
  CHECK_THROWS_AS(encode(enc, small), DimensionError);
}

TEST_CASE("appearance code shape and zero-corrector restoration") {
  EncoderModel enc = make_encoder(5, 32);
  ImageGrid img = render_face(FaceParams{});
  Vec feats = appearance_features(enc, img);
  CHECK(feats.size() == enc.appearance_channels * 64);
  Vec code = appearance_code(enc, img, img);
  CHECK(code.size() == 2 * enc.appearance_channels * 64);

  MixingMatrix mixing = MixingMatrix::generate(77);
  FaceParams p;
  p[param::kSmile] = 0.5;
  Vec w = mixing.to_latent(p);
  CHECK_THROWS_AS(invert_with_restoration(enc, w, img, mixing),
                  NotReadyError);
  enc.corrector_trained = true;
  mlp_set_parameters(enc.corrector,
                     Vec::Zero(mlp_parameter_count(enc.corrector)));
  ImageGrid restored = invert_with_restoration(enc, w, img, mixing);
  ImageGrid plain = render_face(mixing.to_params(w));
  CHECK(restored.pixels == plain.pixels);
}

// ---- metric kernels ----

TEST_CASE("cosine and identity similarity examples") {
  Vec a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
  Vec c(2);
  c << 1.0, 1.0;
  CHECK(cosine_similarity(a, c) == doctest::Approx(0.707107).epsilon(1e-6));
  CHECK(identity_similarity({{a, a}, {a, c}}) ==
        doctest::Approx((1.0 + 0.707107) / 2.0).epsilon(1e-6));
  // scale invariance
  CHECK(cosine_similarity(3.0 * a, 0.5 * c) ==
        doctest::Approx(cosine_similarity(a, c)).epsilon(1e-12));
  Vec z = Vec::Zero(2);
  CHECK_THROWS_AS(cosine_similarity(a, z), NumericError);
  Vec d3 = Vec::Zero(3);
  CHECK_THROWS_AS(cosine_similarity(a, d3), DimensionError);
}

TEST_CASE("perceptual distance formula reduction") {
  // single layer, 1x1 spatial, unit weights: PD = squared distance of the
  // (already normalized) channel vectors
  LayerFeatures la;
  la.height = 1;
  la.width = 1;
  la.channels = 2;
  la.values = {1.0, 0.0};
  la.channel_weights = {1.0, 1.0};
  LayerFeatures lb = la;
  lb.values = {0.0, 1.0};
  FeatureStack a{{la}}, b{{lb}};
  CHECK(perceptual_distance(a, a) == doctest::Approx(0.0));
  CHECK(perceptual_distance(a, b) == doctest::Approx(2.0));
  CHECK(perceptual_distance(a, b) == doctest::Approx(perceptual_distance(b, a)));
  LayerFeatures wrong = la;
  wrong.channels = 1;
  wrong.values = {1.0};
  wrong.channel_weights = {1.0};
  CHECK_THROWS_AS(perceptual_distance(a, FeatureStack{{wrong}}),
                  DimensionError);
}

TEST_CASE("perceptual pyramid is deterministic and self-distance is zero") {
  PerceptualPyramid pyr = PerceptualPyramid::create(2024, 32);
  ImageGrid img = render_face(FaceParams{});
  FeatureStack fa = pyr.extract(img);
  FeatureStack fb = pyr.extract(img);
  CHECK(perceptual_distance(fa, fb) == doctest::Approx(0.0));
  REQUIRE(fa.layers.size() == 3);
  CHECK(fa.layers[0].height == 32);
  CHECK(fa.layers[1].height == 16);
  CHECK(fa.layers[2].height == 8);
  // a visible edit has nonzero distance
  FaceParams p;
  p[param::kSmile] = 1.0;
  FeatureStack fc = pyr.extract(render_face(p));
  CHECK(perceptual_distance(fa, fc) > 0.0);
  CHECK(pyr.pooled_features(img).size() == 18);
}

TEST_CASE("gaussian estimation and matrix square root") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat samples(3, 500);
  for (int i = 0; i < 1500; ++i) {
    samples(i % 3, i / 3) = g(rng);
  }
  GaussianStats s = estimate_gaussian(samples);
  CHECK(s.n == 500);
  CHECK((s.sigma - s.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Mat m(1, 1);
  m << 4.0;
  CHECK(sqrtm_psd(m)(0, 0) == doctest::Approx(2.0));
  // random PSD up to dim 16: sqrt squared reconstructs
  for (int dim : {2, 5, 16}) {
    Mat a(dim, dim);
    for (int i = 0; i < dim * dim; ++i) {
      a(i % dim, i / dim) = g(rng);
    }
    Mat psd = a * a.transpose();
    Mat r = sqrtm_psd(psd);
    CHECK((r * r - psd).cwiseAbs().maxCoeff() < 1e-6);
  }
  Mat neg(2, 2);
  neg << -1.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(sqrtm_psd(neg), NumericError);
  CHECK_THROWS_AS(estimate_gaussian(Mat(3, 1)), DimensionError);
}

TEST_CASE("frechet distance examples") {
  GaussianStats a, b;
  a.mu = Vec::Zero(1);
  a.sigma = Mat::Identity(1, 1);
  a.n = 10;
  b = a;
  CHECK(frechet_distance(a, a) == doctest::Approx(0.0).epsilon(1e-6));
  b.mu[0] = 1.0;
  CHECK(frechet_distance(a, b) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(frechet_distance(a, b, FidForm::kPrintedSqrt) ==
        doctest::Approx(1.0).epsilon(1e-6));

  // diagonal closed form, dimension 3
  GaussianStats c, d;
  c.mu = Vec(3);
  c.mu << 0.1, -0.2, 0.3;
  d.mu = Vec(3);
  d.mu << -0.3, 0.4, 0.0;
  Vec v1(3), v2(3);
  v1 << 0.5, 1.0, 2.0;
  v2 << 1.5, 0.25, 1.0;
  c.sigma = v1.asDiagonal();
  d.sigma = v2.asDiagonal();
  c.n = d.n = 10;
  const double expect = oracle::frechet_diagonal(
      {0.1, -0.2, 0.3}, {0.5, 1.0, 2.0}, {-0.3, 0.4, 0.0}, {1.5, 0.25, 1.0});
  CHECK(frechet_distance(c, d) == doctest::Approx(expect).epsilon(1e-6));
  // symmetry and translation invariance
  CHECK(frechet_distance(d, c) ==
        doctest::Approx(frechet_distance(c, d)).epsilon(1e-6));
  GaussianStats ct = c, dt = d;
  ct.mu.array() += 5.0;
  dt.mu.array() += 5.0;
  CHECK(frechet_distance(ct, dt) ==
        doctest::Approx(frechet_distance(c, d)).epsilon(1e-9));
  GaussianStats wrong = c;
  wrong.mu = Vec::Zero(2);
  wrong.sigma = Mat::Identity(2, 2);
  CHECK_THROWS_AS(frechet_distance(c, wrong), DimensionError);
}

TEST_CASE("adas examples") {
  CHECK(adas({0.5, 0.6}, {0.5, 0.6}) == doctest::Approx(0.0));
  CHECK(adas({0.5, 0.6}, {0.4, 0.7}) == doctest::Approx(0.1));
  // permutation invariance
  CHECK(adas({0.6, 0.5}, {0.7, 0.4}) == doctest::Approx(0.1));
  CHECK_THROWS_AS(adas({0.5}, {0.5, 0.5}), DimensionError);
  CHECK(target_score(0.9, 0.4) == doctest::Approx(1.0));
  CHECK(target_score(0.05, -0.2) == doctest::Approx(0.0));
  CHECK(target_score(0.5, 0.1) == doctest::Approx(0.6));
}

TEST_CASE("adjacent pair protocol on identical images") {
  // all edits identical to the original: IS 1, PD 0, FID 0, 4 pairs
  SpectrumImageSet set;
  set.lambdas = {-0.2, -0.1, 0.0, 0.1, 0.2};
  ImageGrid a = render_face(FaceParams{});
  FaceParams p2;
  p2[param::kSmile] = 0.7;
  p2[param::kFaceWidth] = -0.5;
  ImageGrid b = render_face(p2);
  set.images.assign(5, {a, b});

  PerceptualPyramid pyr = PerceptualPyramid::create(2024, 32);
  MetricProviders prov;
  prov.identity = [](const ImageGrid& img) {
    Vec v(static_cast<Eigen::Index>(img.pixels.size()));
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = img.pixels[i] + 0.01;
    }
    return v;
  };
  prov.features = [&](const ImageGrid& img) { return pyr.extract(img); };
  prov.pooled = [&](const ImageGrid& img) { return pyr.pooled_features(img); };
  prov.score = [](const ImageGrid&) { return 0.5; };

  MetricsReport rep = adjacent_pair_eval(set, prov, "trustworthiness", "unit");
  REQUIRE(rep.pairs.size() == 4);
  CHECK(rep.is == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.pd == doctest::Approx(0.0).epsilon(1e-9));
  // Edits pool the same two images four times over; the unbiased covariance
  // of a duplicated sample shrinks slightly, so the distance is tiny but not
  // exactly zero (the identical-stats kernel case is checked elsewhere).
  CHECK(rep.fid < 1e-3);
  // averages equal the mean of per-pair values
  double mis = 0.0, mpd = 0.0;
  for (const auto& pr : rep.pairs) {
    mis += pr.is;
    mpd += pr.pd;
  }
  CHECK(rep.is == doctest::Approx(mis / 4.0).epsilon(1e-12));
  CHECK(rep.pd == doctest::Approx(mpd / 4.0).epsilon(1e-12));
  // adas: scores constant, targets shifted by lambda
  CHECK(rep.adas == doctest::Approx(0.15).epsilon(1e-9));

  nlohmann::ordered_json j = report_to_json(rep);
  CHECK(j["attribute"] == "trustworthiness");
  CHECK(j["pairs"].size() == 4);
  CHECK(j.contains("is"));
  CHECK(j.contains("pd"));
  CHECK(j.contains("fid"));
  CHECK(j.contains("adas"));

  SpectrumImageSet bad = set;
  bad.lambdas = {-0.2, -0.1, 0.1, 0.2};  // no zero entry
  bad.images.resize(4);
  CHECK_THROWS_AS(adjacent_pair_eval(bad, prov, "trustworthiness", "unit"),
                  ConfigError);
}

// ---- histogram ----

TEST_CASE("score histogram examples") {
  ScoreHistogram h = score_histogram(std::vector<double>(10, 0.5), 10);
  CHECK(h.total == 10);
  int nonzero = 0;
  for (int c : h.counts) {
    if (c > 0) {
      ++nonzero;
    }
  }
  CHECK(nonzero == 1);
  CHECK(h.counts[5] == 10);
  CHECK(h.mass_mid == doctest::Approx(1.0));

  std::vector<double> scores = {0.0, 0.05, 0.45, 0.55, 0.95, 1.0};
  ScoreHistogram g = score_histogram(scores, 20);
  int sum = 0;
  for (int c : g.counts) {
    sum += c;
  }
  CHECK(sum == 6);
  CHECK(g.mass_mid == doctest::Approx(2.0 / 6.0));
  // permutation invariance
  std::vector<double> shuffled = {1.0, 0.45, 0.0, 0.95, 0.05, 0.55};
  CHECK(score_histogram(shuffled, 20).counts == g.counts);
  CHECK_THROWS_AS(score_histogram({}, 10), ConfigError);
  CHECK_THROWS_AS(score_histogram({1.2}, 10), ConfigError);
}

// ---- pearson / bias ----

TEST_CASE("pearson matches scalar oracle and flags degeneracy") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 7.0};
  std::vector<double> y = {2.1, 3.9, 6.2, 8.1, 13.5};
  CHECK(pearson(x, y) == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
  std::vector<double> anti = {5.0, 4.0, 3.0, 2.0, 1.0};
  CHECK(pearson(x, anti) < 0.0);
  bool degenerate = false;
  CHECK(pearson({1.0, 1.0, 1.0}, {2.1, 3.9, 6.2}, &degenerate) == 0.0);
  CHECK(degenerate);
  CHECK_THROWS_AS(pearson({1.0, 1.0}, {2.0, 2.0}), NumericError);
  CHECK_THROWS_AS(pearson({1.0}, {2.0}), DimensionError);
}

TEST_CASE("bias report on synthetic planted edits") {
  // plant: smile moves with +2*lambda, wrinkle with -1*lambda, rest frozen
  std::vector<EditDelta> edits;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int i = 0; i < 60; ++i) {
    const double l = u(rng);
    EditDelta e;
    e.lambda = l;
    e.attribute = AttributeKind::kTrustworthiness;
    e.edited = e.original;
    e.edited[param::kSmile] += 2.0 * l;
    e.edited[param::kWrinkleDensity] += -1.0 * l;
    edits.push_back(e);
  }
  BiasReport r = bias_correlation_report(edits);
  const auto& cb = r.per_attribute.at(AttributeKind::kTrustworthiness);
  CHECK(cb[param::kSmile - param::kIdentityDims].correlation ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cb[param::kSmile - param::kIdentityDims].sign == 1);
  CHECK(cb[param::kWrinkleDensity - param::kIdentityDims].correlation ==
        doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(cb[param::kWrinkleDensity - param::kIdentityDims].sign == -1);
  // frozen covariates come back degenerate with zero correlation
  CHECK(cb[param::kBrowAngle - param::kIdentityDims].degenerate);
  CHECK(cb[param::kBrowAngle - param::kIdentityDims].correlation == 0.0);
  CHECK(cb[param::kBrowAngle - param::kIdentityDims].sign == 0);
  CHECK(r.edit_counts.at(AttributeKind::kTrustworthiness) == 60);

  // invariant to positive rescaling of lambda
  std::vector<EditDelta> scaled = edits;
  for (auto& e : scaled) {
    e.lambda *= 3.0;
  }
  BiasReport rs = bias_correlation_report(scaled);
  CHECK(rs.per_attribute.at(AttributeKind::kTrustworthiness)[0].correlation ==
        doctest::Approx(cb[0].correlation).epsilon(1e-12));

  // fewer than 30 edits for a present attribute is refused
  edits.resize(20);
  CHECK_THROWS_AS(bias_correlation_report(edits), ConfigError);

  nlohmann::ordered_json j = bias_report_to_json(r);
  CHECK(j.contains("trustworthiness"));
}

// ---- pgm / dataset io ----

TEST_CASE("pgm round trip") {
  auto dir = temp_dir("pgm");
  ImageGrid img(8, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      img.at(r, c) = (r * 8 + c) / 63.0;
    }
  }
  const std::string path = (dir / "img.pgm").string();
  write_pgm(img, path);
  ImageGrid back = read_pgm(path);
  REQUIRE(back.height == 8);
  REQUIRE(back.width == 8);
  for (int i = 0; i < 64; ++i) {
    CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 1.0 / 255);
  }
  CHECK_THROWS_AS(read_pgm((dir / "missing.pgm").string()), IoError);
  std::ofstream bad(dir / "bad.pgm");
  bad << "P2\n8 8\n255\n";
  bad.close();
  CHECK_THROWS_AS(read_pgm((dir / "bad.pgm").string()), IoError);
}

TEST_CASE("dataset write and load round trip") {
  auto dir = temp_dir("dataset");
  WorldConfig world;
  world.covariate_scale = 0.45;
  SampleSet set = sample_dataset(6, 42, true, world);
  write_dataset(dir.string(), set, world, 42, true);
  LoadedDataset ds = load_dataset(dir.string());
  CHECK(ds.n == 6);
  CHECK(ds.sample_seed == 42);
  CHECK(ds.adult_only);
  CHECK(ds.world.covariate_scale == doctest::Approx(0.45));
  CHECK(ds.world.mixing_seed == world.mixing_seed);
  REQUIRE(ds.records.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK((ds.records[i].params.values - set.params[i].values)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    for (int k = 0; k < 3; ++k) {
      CHECK(ds.records[i].scores[k] ==
            doctest::Approx(set.scores[i][k]).epsilon(1e-12));
    }
    ImageGrid img = load_record_image(ds, i);
    for (size_t j = 0; j < img.pixels.size(); ++j) {
      CHECK(std::abs(img.pixels[j] - set.images[i].pixels[j]) <= 1.0 / 255);
    }
  }
  CHECK_THROWS_AS(load_dataset((dir / "nope").string()), IoError);
}

TEST_CASE("world hash keys on world identity only") {
  WorldConfig a;
  WorldConfig b = a;
  CHECK(world_hash(a) == world_hash(b));
  b.mixing_seed = 78;
  CHECK(world_hash(a) != world_hash(b));
  WorldConfig c = a;
  c.covariate_scale = 0.45;  // sampling knob, not world identity
  CHECK(world_hash(a) == world_hash(c));
}

// ---- model io ----

TEST_CASE("flow model save and load round trip") {
  auto dir = temp_dir("flowio");
  FlowArchitecture arch;
  arch.latent_dim = 4;
  arch.num_blocks = 2;
  arch.hidden_width = 6;
  arch.layers_per_block = 2;
  CnfModel model = init_cnf_model(arch, AttributeKind::kDominance, 33);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.3);
  Vec theta = get_parameters(model);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    theta[i] += g(rng);
  }
  set_parameters(model, theta);
  const std::string path = (dir / "flow.bin").string();
  save_flow_model(model, path);
  CnfModel back = load_flow_model(path);
  CHECK(back.attribute == AttributeKind::kDominance);
  CHECK(back.arch.num_blocks == 2);
  CHECK(back.solver.steps == model.solver.steps);
  // float32 storage: parameters match to single precision
  Vec tb = get_parameters(back);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    CHECK(tb[i] == doctest::Approx(theta[i]).epsilon(1e-6));
  }
  // quantization is idempotent: a second save/load round trip is exact
  save_flow_model(back, path);
  CnfModel again = load_flow_model(path);
  CHECK((get_parameters(again) - tb).cwiseAbs().maxCoeff() == 0.0);
  // behaviour carries over
  Vec z = Vec::Ones(4);
  CHECK((forward_map(back, z, 0.5) - forward_map(again, z, 0.5))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // corrupting the trailer is detected
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(-1, std::ios::end);
  f.put('X');
  f.close();
  CHECK_THROWS_AS(load_flow_model(path), IoError);
  CHECK_THROWS_AS(load_flow_model((dir / "missing.bin").string()), IoError);
}

TEST_CASE("regressor and encoder and mixing io round trips") {
  auto dir = temp_dir("modelio");
  RegressorModel reg = make_regressor(AttributeKind::kAttractiveness, 3);
  const std::string rpath = (dir / "reg.bin").string();
  save_regressor(reg, rpath);
  RegressorModel rback = load_regressor(rpath);
  CHECK(rback.attribute == AttributeKind::kAttractiveness);
  ImageGrid img = render_face(FaceParams{});
  CHECK(predict_score(rback, img) == doctest::Approx(predict_score(reg, img)));

  EncoderModel enc = make_encoder(4, 32);
  enc.e1_trained = true;
  const std::string epath = (dir / "enc.bin").string();
  save_encoder(enc, epath);
  EncoderModel eback = load_encoder(epath);
  CHECK(eback.e1_trained);
  CHECK_FALSE(eback.corrector_trained);
  CHECK(eback.image_size == 32);
  CHECK((encode(eback, img) - encode(enc, img)).cwiseAbs().maxCoeff() <
        1e-6);

  MixingMatrix mixing = MixingMatrix::generate(123);
  const std::string mpath = (dir / "mix.bin").string();
  save_mixing(mixing, mpath);
  MixingMatrix mback = load_mixing(mpath);
  CHECK(mback.seed == 123);
  // doubles survive exactly
  CHECK((mback.m - mixing.m).cwiseAbs().maxCoeff() == 0.0);
  CHECK((mback.inverse - mixing.inverse).cwiseAbs().maxCoeff() == 0.0);

  // truncation detection
  std::filesystem::resize_file(rpath, 10);
  CHECK_THROWS_AS(load_regressor(rpath), IoError);
}

// ---- bundle ----

TEST_CASE("bundle save and load round trip") {
  auto dir = temp_dir("bundle");
  WorldConfig world;
  ModelBundle bundle = make_bundle(world);
  bundle.regressors[AttributeKind::kTrustworthiness] =
      make_regressor(AttributeKind::kTrustworthiness, 6);
  FlowArchitecture arch;
  arch.latent_dim = 12;
  arch.num_blocks = 2;
  arch.hidden_width = 8;
  arch.layers_per_block = 2;
  bundle.mappers[AttributeKind::kTrustworthiness] =
      init_cnf_model(arch, AttributeKind::kTrustworthiness, 17);
  const std::string bdir = (dir / "b").string();
  CHECK_FALSE(bundle_exists(bdir));
  save_bundle(bundle, bdir);
  CHECK(bundle_exists(bdir));
  ModelBundle back = load_bundle(bdir);
  CHECK(back.hash == bundle.hash);
  CHECK(back.world.mixing_seed == world.mixing_seed);
  CHECK_FALSE(back.has_encoder);
  REQUIRE(back.regressors.count(AttributeKind::kTrustworthiness) == 1);
  REQUIRE(back.mappers.count(AttributeKind::kTrustworthiness) == 1);

  // bit-identical predictions on 10 probe images
  SampleSet probes = sample_dataset(10, 91, false, world);
  ModelBundle twice = load_bundle(bdir);
  for (int i = 0; i < 10; ++i) {
    const double p1 = predict_score(
        back.regressors.at(AttributeKind::kTrustworthiness), probes.images[i]);
    const double p2 = predict_score(
        twice.regressors.at(AttributeKind::kTrustworthiness),
        probes.images[i]);
    CHECK(p1 == p2);
  }

  // truncated component file is a corrupt bundle
  std::filesystem::resize_file(std::filesystem::path(bdir) / "mixing.bin", 8);
  CHECK_THROWS_AS(load_bundle(bdir), IoError);
  CHECK_THROWS_AS(load_bundle((dir / "absent").string()), IoError);
}
