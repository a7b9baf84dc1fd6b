#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace impflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error hierarchy. Everything user-facing throws one of these; the CLI maps
// ConfigError to exit code 2 and the rest to 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NotReadyError : Error {
  using Error::Error;
};

enum class AttributeKind { kTrustworthiness = 0, kDominance = 1, kAttractiveness = 2 };

inline constexpr std::array<AttributeKind, 3> kAllAttributes = {
    AttributeKind::kTrustworthiness, AttributeKind::kDominance,
    AttributeKind::kAttractiveness};

const char* to_string(AttributeKind kind);
AttributeKind attribute_from_string(const std::string& name);

// Conditioning vector handed to the flow dynamics: integration time plus the
// (constant along a trajectory) attribute score.
struct MappingContext {
  double t = 0.0;
  double score = 0.0;
};

struct ImageGrid {
  int height = 32;
  int width = 32;
  std::vector<double> pixels;  // row-major intensities in [0, 1]

  ImageGrid() : pixels(static_cast<size_t>(height * width), 0.0) {}
  ImageGrid(int h, int w)
      : height(h), width(w), pixels(static_cast<size_t>(h) * w, 0.0) {}

  double& at(int r, int c) { return pixels[static_cast<size_t>(r) * width + c]; }
  double at(int r, int c) const {
    return pixels[static_cast<size_t>(r) * width + c];
  }
  int size() const { return height * width; }
};

namespace param {
// Identity block.
inline constexpr int kFaceWidth = 0;
inline constexpr int kEyeSpacing = 1;
inline constexpr int kNoseLength = 2;
inline constexpr int kChinShape = 3;
inline constexpr int kSkinTone = 4;
inline constexpr int kHairMarker = 5;
// Covariate block.
inline constexpr int kSmile = 6;
inline constexpr int kBrowAngle = 7;
inline constexpr int kEyeOpenness = 8;
inline constexpr int kWrinkleDensity = 9;
inline constexpr int kFacialHair = 10;
inline constexpr int kHeadTilt = 11;

inline constexpr int kIdentityDims = 6;
inline constexpr int kCount = 12;
}  // namespace param

// Normalized face parameters, each nominally in [-1, 1]. Index layout is the
// param:: block above: entries 0..5 identity, 6..11 covariates.
struct FaceParams {
  Vec values;

  FaceParams() : values(Vec::Zero(param::kCount)) {}
  explicit FaceParams(Vec v);

  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
};

}  // namespace impflow
