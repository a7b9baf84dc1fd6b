#include "impflow/metrics/identity.hpp"

namespace impflow {

double cosine_similarity(const Vec& a, const Vec& b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw DimensionError("cosine_similarity: length mismatch");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw NumericError("cosine_similarity: zero-norm vector");
  }
  return a.dot(b) / (na * nb);
}

double identity_similarity(const std::vector<std::pair<Vec, Vec>>& pairs) {
  if (pairs.empty()) {
    throw DimensionError("identity_similarity: no pairs");
  }
  double total = 0.0;
  for (const auto& [o, e] : pairs) {
    total += cosine_similarity(o, e);
  }
  return total / pairs.size();
}

}  // namespace impflow
