#pragma once

#include <utility>
#include <vector>

#include "impflow/flow/model.hpp"
#include "impflow/predictor/regressor.hpp"
#include "impflow/types.hpp"
#include "impflow/world/encoder.hpp"
#include "impflow/world/mixing.hpp"

namespace impflow {

struct SpectrumEntry {
  double lambda = 0.0;
  Vec latent;
  double target_score = 0.0;
  double predicted_score = 0.0;     // regressor on the restored image
  double truth_score = 0.0;         // oracle on the decoded parameters
  double identity_similarity = 0.0; // image route, against the original
  bool clamped = false;             // target score hit the [0, 1] bound
  ImageGrid image;
};

struct SpectrumResult {
  AttributeKind attribute = AttributeKind::kTrustworthiness;
  double original_score = 0.0;  // predicted score of the input image
  Vec original_latent;
  std::vector<SpectrumEntry> entries;
};

// Edits the encoded input across the grid and reconstructs every point. Grid
// values must be strictly increasing and within the edit bound [-0.4, 0.4].
SpectrumResult build_spectrum(const ImageGrid& original,
                              const std::vector<double>& grid,
                              const CnfModel& mapper,
                              const RegressorModel& regressor,
                              const EncoderModel& encoder,
                              const MixingMatrix& mixing);

// Latent differences between adjacent spectrum entries; af points from the
// lower-lambda entry to the higher one and rf is its exact negation.
struct DiffVector {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  Vec af;
  Vec rf;
};

std::vector<DiffVector> diff_vectors(const SpectrumResult& spectrum);

// Applies a difference vector to a base latent and reconstructs both variants
// (base + af first). The base's plain render anchors the appearance code.
std::pair<ImageGrid, ImageGrid> render_diff(const DiffVector& diff,
                                            const Vec& base,
                                            const EncoderModel& encoder,
                                            const MixingMatrix& mixing);

}  // namespace impflow
