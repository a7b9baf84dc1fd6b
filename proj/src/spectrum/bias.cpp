#include "impflow/spectrum/bias.hpp"

#include <cmath>
#include <string>

namespace impflow {
namespace {

constexpr int kMinEditsPerAttribute = 30;
constexpr double kSignDeadZone = 0.05;

constexpr const char* kCovariateNames[6] = {
    "smile", "brow_angle", "eye_openness",
    "wrinkle_density", "facial_hair", "head_tilt"};

}  // namespace

double pearson(const std::vector<double>& x, const std::vector<double>& y,
               bool* degenerate) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DimensionError("pearson: need two equal-length series");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (degenerate) {
    *degenerate = false;
  }
  if (sxx == 0.0 || syy == 0.0) {
    if (!degenerate) {
      throw NumericError("pearson: zero variance");
    }
    *degenerate = true;
    return 0.0;
  }
  return sxy / std::sqrt(sxx * syy);
}

BiasReport bias_correlation_report(const std::vector<EditDelta>& edits) {
  if (edits.empty()) {
    throw ConfigError("bias_correlation_report: no edits");
  }
  std::map<AttributeKind, std::vector<const EditDelta*>> grouped;
  for (const auto& e : edits) {
    grouped[e.attribute].push_back(&e);
  }
  BiasReport report;
  for (const auto& [attr, group] : grouped) {
    if (static_cast<int>(group.size()) < kMinEditsPerAttribute) {
      throw ConfigError(std::string("bias_correlation_report: fewer than 30 edits for ") +
                        to_string(attr));
    }
    std::vector<double> lambdas(group.size());
    for (size_t i = 0; i < group.size(); ++i) {
      lambdas[i] = group[i]->lambda;
    }
    std::array<CovariateBias, 6> row;
    for (int c = 0; c < 6; ++c) {
      std::vector<double> deltas(group.size());
      for (size_t i = 0; i < group.size(); ++i) {
        const int idx = param::kIdentityDims + c;
        deltas[i] = group[i]->edited.values[idx] - group[i]->original.values[idx];
      }
      CovariateBias bias;
      bias.correlation = pearson(lambdas, deltas, &bias.degenerate);
      if (!bias.degenerate && std::abs(bias.correlation) > kSignDeadZone) {
        bias.sign = bias.correlation > 0.0 ? 1 : -1;
      }
      row[c] = bias;
    }
    report.per_attribute[attr] = row;
    report.edit_counts[attr] = static_cast<int>(group.size());
  }
  return report;
}

nlohmann::ordered_json bias_report_to_json(const BiasReport& report) {
  nlohmann::ordered_json j;
  for (const auto& [attr, row] : report.per_attribute) {
    nlohmann::ordered_json block;
    block["edits"] = report.edit_counts.at(attr);
    for (int c = 0; c < 6; ++c) {
      nlohmann::ordered_json entry;
      entry["correlation"] = row[c].correlation;
      entry["degenerate"] = row[c].degenerate;
      entry["sign"] = row[c].sign;
      block[kCovariateNames[c]] = entry;
    }
    j[to_string(attr)] = block;
  }
  return j;
}

}  // namespace impflow
