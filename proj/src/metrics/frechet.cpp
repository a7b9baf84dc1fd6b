#include "impflow/metrics/frechet.hpp"

#include <cmath>

namespace impflow {
namespace {

constexpr double kEigenFloor = -1e-8;
constexpr double kSymmetryTol = 1e-9;

}  // namespace

GaussianStats estimate_gaussian(const Mat& samples) {
  const int n = static_cast<int>(samples.cols());
  if (n < 2) {
    throw DimensionError("estimate_gaussian: need at least two samples");
  }
  GaussianStats s;
  s.n = n;
  s.mu = samples.rowwise().mean();
  Mat centered = samples.colwise() - s.mu;
  s.sigma = (centered * centered.transpose()) / (n - 1);
  s.sigma = 0.5 * (s.sigma + s.sigma.transpose());
  return s;
}

Mat sqrtm_psd(const Mat& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("sqrtm_psd: matrix not square");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() >
      kSymmetryTol * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw NumericError("sqrtm_psd: matrix not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) {
    throw NumericError("sqrtm_psd: eigendecomposition failed");
  }
  Vec vals = eig.eigenvalues();
  for (int i = 0; i < vals.size(); ++i) {
    if (vals[i] < kEigenFloor * (1.0 + vals.cwiseAbs().maxCoeff())) {
      throw NumericError("sqrtm_psd: matrix has a significantly negative eigenvalue");
    }
    vals[i] = std::sqrt(std::max(vals[i], 0.0));
  }
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

double frechet_distance(const GaussianStats& s1, const GaussianStats& s2,
                        FidForm form) {
  if (s1.mu.size() != s2.mu.size() || s1.sigma.rows() != s2.sigma.rows()) {
    throw DimensionError("frechet_distance: dimension mismatch");
  }
  const Mat root1 = sqrtm_psd(s1.sigma);
  const Mat cross = sqrtm_psd(root1 * s2.sigma * root1);
  const double value = (s1.mu - s2.mu).squaredNorm() +
                       (s1.sigma + s2.sigma - 2.0 * cross).trace();
  if (form == FidForm::kPrintedSqrt) {
    return std::sqrt(std::max(value, 0.0));
  }
  return value;
}

}  // namespace impflow
