#pragma once

#include "impflow/types.hpp"

namespace impflow {

struct RenderConfig {
  int image_size = 32;
  int supersample = 2;  // samples per axis per pixel
};

struct RenderOutput {
  ImageGrid image;
  bool clamped = false;  // true if any parameter was outside [-1, 1]
};

// Rasterizes the parametric face sprite. Parameters outside [-1, 1] are
// clamped; non-finite parameters are an error.
RenderOutput render_face_detailed(const FaceParams& p, const RenderConfig& cfg = {});
ImageGrid render_face(const FaceParams& p, const RenderConfig& cfg = {});

// Fraction of pixels above the background level; detection stand-in in [0, 1].
double foreground_energy(const ImageGrid& image);

}  // namespace impflow
