#include "impflow/world/mixing.hpp"

#include <cmath>
#include <random>

namespace impflow {

MixingMatrix MixingMatrix::generate(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Mat g(param::kCount, param::kCount);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      g(r, c) = normal(rng);
    }
  }

  // Orthogonal base from the QR factorization, then a mild per-axis scale so
  // the map is not an isometry. Condition number is bounded by the scale
  // spread (about 1.6), far inside the < 50 requirement.
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  std::uniform_real_distribution<double> spread(std::log(0.8), std::log(1.25));
  Vec scales(param::kCount);
  for (int i = 0; i < scales.size(); ++i) {
    scales[i] = std::exp(spread(rng));
  }

  MixingMatrix out;
  out.seed = seed;
  out.m = q * scales.asDiagonal();
  out.inverse = out.m.inverse();

  double det = out.m.determinant();
  if (std::abs(det) <= 1e-6) {
    throw NumericError("MixingMatrix: determinant too small");
  }
  if (out.condition_number() >= 50.0) {
    throw NumericError("MixingMatrix: condition number out of range");
  }
  return out;
}

Vec MixingMatrix::to_latent(const FaceParams& p) const {
  if (p.values.size() != m.cols()) {
    throw DimensionError("MixingMatrix::to_latent: bad parameter size");
  }
  return m * p.values;
}

FaceParams MixingMatrix::to_params(const Vec& w) const {
  if (w.size() != m.rows()) {
    throw DimensionError("MixingMatrix::to_params: bad latent size");
  }
  return FaceParams(inverse * w);
}

double MixingMatrix::condition_number() const {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  return sv(0) / sv(sv.size() - 1);
}

}  // namespace impflow
