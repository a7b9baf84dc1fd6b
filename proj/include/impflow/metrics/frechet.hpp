#pragma once

#include "impflow/types.hpp"

namespace impflow {

struct GaussianStats {
  Vec mu;
  Mat sigma;
  int n = 0;
};

// Sample mean and unbiased covariance; samples are columns, at least two.
GaussianStats estimate_gaussian(const Mat& samples);

// Square root of a symmetric PSD matrix via eigendecomposition. Eigenvalues
// in [-1e-8, 0) are clamped to zero; more negative ones are an error.
Mat sqrtm_psd(const Mat& m);

// kStandard is the usual squared form; kPrintedSqrt takes the square root of
// the whole expression, the variant some write-ups quote.
enum class FidForm { kStandard, kPrintedSqrt };

double frechet_distance(const GaussianStats& s1, const GaussianStats& s2,
                        FidForm form = FidForm::kStandard);

}  // namespace impflow
