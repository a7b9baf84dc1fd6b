#include "impflow/spectrum/spectrum.hpp"

#include <cmath>

#include "impflow/flow/edit.hpp"
#include "impflow/metrics/identity.hpp"
#include "impflow/world/oracle.hpp"
#include "impflow/world/render.hpp"

namespace impflow {

SpectrumResult build_spectrum(const ImageGrid& original,
                              const std::vector<double>& grid,
                              const CnfModel& mapper,
                              const RegressorModel& regressor,
                              const EncoderModel& encoder,
                              const MixingMatrix& mixing) {
  if (grid.empty()) {
    throw ConfigError("build_spectrum: empty grid");
  }
  for (size_t k = 0; k < grid.size(); ++k) {
    if (std::abs(grid[k]) > 0.4 + 1e-12) {
      throw ConfigError("build_spectrum: lambda outside [-0.4, 0.4]");
    }
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw ConfigError("build_spectrum: grid not strictly increasing");
    }
  }

  SpectrumResult out;
  out.attribute = mapper.attribute;
  out.original_latent = encode(encoder, original);
  out.original_score = predict_score(regressor, original);
  Vec original_embed = identity_embed(encode(encoder, original), mixing);

  for (double lambda : grid) {
    SpectrumEntry entry;
    entry.lambda = lambda;
    EditResult edit =
        edit_latent(mapper, out.original_latent, out.original_score, lambda);
    entry.latent = edit.latent;
    entry.target_score = edit.target_score;
    entry.clamped = edit.clamped;
    entry.image = invert_with_restoration(encoder, edit.latent, original, mixing);
    entry.predicted_score = predict_score(regressor, entry.image);
    entry.truth_score = truth_score(mixing.to_params(edit.latent), mapper.attribute);
    entry.identity_similarity = cosine_similarity(
        original_embed, identity_embed(encode(encoder, entry.image), mixing));
    out.entries.push_back(std::move(entry));
  }
  return out;
}

std::vector<DiffVector> diff_vectors(const SpectrumResult& spectrum) {
  if (spectrum.entries.size() < 2) {
    throw ConfigError("diff_vectors: need at least two spectrum entries");
  }
  std::vector<DiffVector> out;
  for (size_t k = 0; k + 1 < spectrum.entries.size(); ++k) {
    const auto& lo = spectrum.entries[k];
    const auto& hi = spectrum.entries[k + 1];
    DiffVector d;
    d.lambda_lo = lo.lambda;
    d.lambda_hi = hi.lambda;
    d.af = hi.latent - lo.latent;
    d.rf = -d.af;
    out.push_back(std::move(d));
  }
  return out;
}

std::pair<ImageGrid, ImageGrid> render_diff(const DiffVector& diff,
                                            const Vec& base,
                                            const EncoderModel& encoder,
                                            const MixingMatrix& mixing) {
  if (diff.af.size() != base.size()) {
    throw DimensionError("render_diff: latent size mismatch");
  }
  RenderConfig rc;
  rc.image_size = encoder.image_size;
  ImageGrid anchor = render_face(mixing.to_params(base), rc);
  return {invert_with_restoration(encoder, base + diff.af, anchor, mixing),
          invert_with_restoration(encoder, base + diff.rf, anchor, mixing)};
}

}  // namespace impflow
