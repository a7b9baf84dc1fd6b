#pragma once

#include <array>
#include <map>
#include <vector>

#include <json.hpp>

#include "impflow/types.hpp"

namespace impflow {

struct EditDelta {
  FaceParams original;
  FaceParams edited;
  double lambda = 0.0;
  AttributeKind attribute = AttributeKind::kTrustworthiness;
};

struct CovariateBias {
  double correlation = 0.0;
  bool degenerate = false;  // zero variance on either side
  int sign = 0;             // -1 / 0 / +1, zero when weak or degenerate
};

struct BiasReport {
  std::map<AttributeKind, std::array<CovariateBias, 6>> per_attribute;
  std::map<AttributeKind, int> edit_counts;
};

// Pearson correlation; sets *degenerate instead of throwing when either input
// has zero variance (the correlation is then reported as 0).
double pearson(const std::vector<double>& x, const std::vector<double>& y,
               bool* degenerate = nullptr);

// Correlates lambda with each covariate delta (edited minus original), per
// attribute. Every attribute present needs at least 30 edits. Signs use a
// +/-0.05 dead zone.
BiasReport bias_correlation_report(const std::vector<EditDelta>& edits);

nlohmann::ordered_json bias_report_to_json(const BiasReport& report);

}  // namespace impflow
