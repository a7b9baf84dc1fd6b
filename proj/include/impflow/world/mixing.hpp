#pragma once

#include <cstdint>

#include "impflow/types.hpp"

namespace impflow {

// Seeded invertible map between face parameters and the latent space the flow
// operates in (w = M * p). Construction guarantees a benign conditioning so
// round trips through the inverse stay accurate.
struct MixingMatrix {
  uint64_t seed = 0;
  Mat m;        // 12 x 12
  Mat inverse;  // cached M^{-1}

  static MixingMatrix generate(uint64_t seed);

  Vec to_latent(const FaceParams& p) const;
  FaceParams to_params(const Vec& w) const;
  double condition_number() const;
};

}  // namespace impflow
