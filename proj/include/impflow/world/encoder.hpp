#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "impflow/predictor/features.hpp"
#include "impflow/predictor/mlp.hpp"
#include "impflow/train_config.hpp"
#include "impflow/types.hpp"
#include "impflow/world/mixing.hpp"

namespace impflow {

// Latent extraction and identity-restorative inversion. E1 regresses the
// latent from pooled image features. The appearance path mean-pools an image
// to an 8x8 map and mixes it into `appearance_channels` channels with a
// learned per-channel affine; codes of the reconstruction and the original
// are concatenated and drive an additive image-space corrector.
struct EncoderModel {
  FeatureMapConfig features;  // E1 input pools, finest level keeps raw pixels
  int image_size = 32;
  int latent_dim = 12;
  Mlp e1;
  int appearance_channels = 8;
  int appearance_grid = 8;
  Vec e2_scale, e2_bias;  // per channel, trained with the corrector
  Mlp corrector;
  bool e1_trained = false;
  bool corrector_trained = false;
};

EncoderModel make_encoder(uint64_t seed, int image_size = 32);

Vec encode(const EncoderModel& model, const ImageGrid& image);

// Channel block for one image: appearance_channels maps of grid*grid values.
Vec appearance_features(const EncoderModel& model, const ImageGrid& image);
// Fused code: features of the reconstruction, then of the original.
Vec appearance_code(const EncoderModel& model, const ImageGrid& xprime,
                    const ImageGrid& original);

// render(M^-1 w) plus the learned residual correction, clamped to [0, 1].
ImageGrid invert_with_restoration(const EncoderModel& model, const Vec& w,
                                  const ImageGrid& original,
                                  const MixingMatrix& mixing);

struct EncoderTrainResult {
  EncoderModel model;
  std::vector<double> loss_curve;
};

// Fits E1 to (image, latent) pairs; latents are columns.
EncoderTrainResult train_encoder(const EncoderModel& init,
                                 const std::vector<ImageGrid>& images,
                                 const Mat& latents, const TrainConfig& cfg);

// Joint training of the corrector and the appearance affine against pixel
// reconstruction error; uses the model's own E1 to build reconstructions.
std::vector<double> train_corrector(EncoderModel& model,
                                    const std::vector<ImageGrid>& images,
                                    const MixingMatrix& mixing,
                                    const TrainConfig& cfg);

// Identity embeddings: the identity half of the parameter vector.
Vec identity_embed(const FaceParams& p);
Vec identity_embed(const Vec& w, const MixingMatrix& mixing);

// Image-route embedding used where only pixels are available. The provider
// references model and mixing; both must outlive it.
std::function<Vec(const ImageGrid&)> make_image_identity_provider(
    const EncoderModel& model, const MixingMatrix& mixing);

}  // namespace impflow
