#include "impflow/metrics/report.hpp"

#include <cmath>

#include "impflow/metrics/adas.hpp"
#include "impflow/metrics/frechet.hpp"
#include "impflow/metrics/identity.hpp"

namespace impflow {
namespace {

int find_zero_lambda(const std::vector<double>& lambdas) {
  for (size_t k = 0; k < lambdas.size(); ++k) {
    if (std::abs(lambdas[k]) < 1e-12) {
      return static_cast<int>(k);
    }
  }
  return -1;
}

}  // namespace

MetricsReport adjacent_pair_eval(const SpectrumImageSet& set,
                                 const MetricProviders& providers,
                                 const std::string& attribute,
                                 const std::string& dataset_tag) {
  const int nk = static_cast<int>(set.lambdas.size());
  if (nk < 2 || set.images.size() != set.lambdas.size()) {
    throw ConfigError("adjacent_pair_eval: incomplete spectrum");
  }
  for (int k = 1; k < nk; ++k) {
    if (!(set.lambdas[k] > set.lambdas[k - 1])) {
      throw ConfigError("adjacent_pair_eval: lambdas not strictly increasing");
    }
  }
  const int k0 = find_zero_lambda(set.lambdas);
  if (k0 < 0) {
    throw ConfigError("adjacent_pair_eval: spectrum is missing the original at 0");
  }
  const int ns = static_cast<int>(set.images[0].size());
  if (ns == 0) {
    throw ConfigError("adjacent_pair_eval: empty sample set");
  }
  for (const auto& row : set.images) {
    if (static_cast<int>(row.size()) != ns) {
      throw DimensionError("adjacent_pair_eval: ragged image rows");
    }
  }
  if (!providers.identity || !providers.features || !providers.pooled ||
      !providers.score) {
    throw ConfigError("adjacent_pair_eval: missing provider");
  }

  MetricsReport report;
  report.attribute = attribute;
  report.dataset_tag = dataset_tag;
  report.lambdas = set.lambdas;

  for (int k = 0; k + 1 < nk; ++k) {
    PairMetrics pair;
    pair.lambda_lo = set.lambdas[k];
    pair.lambda_hi = set.lambdas[k + 1];
    double is_sum = 0.0;
    double pd_sum = 0.0;
    for (int i = 0; i < ns; ++i) {
      const ImageGrid& a = set.images[k][i];
      const ImageGrid& b = set.images[k + 1][i];
      is_sum += cosine_similarity(providers.identity(a), providers.identity(b));
      pd_sum += perceptual_distance(providers.features(a), providers.features(b));
    }
    pair.is = is_sum / ns;
    pair.pd = pd_sum / ns;
    report.pairs.push_back(pair);
  }
  double is_total = 0.0, pd_total = 0.0;
  for (const auto& pair : report.pairs) {
    is_total += pair.is;
    pd_total += pair.pd;
  }
  report.is = is_total / report.pairs.size();
  report.pd = pd_total / report.pairs.size();

  std::vector<double> original_scores(ns);
  for (int i = 0; i < ns; ++i) {
    original_scores[i] = providers.score(set.images[k0][i]);
  }
  double adas_total = 0.0;
  int adas_count = 0;
  for (int k = 0; k < nk; ++k) {
    if (k == k0) {
      continue;
    }
    std::vector<double> edited(ns), target(ns);
    for (int i = 0; i < ns; ++i) {
      edited[i] = providers.score(set.images[k][i]);
      target[i] = target_score(original_scores[i], set.lambdas[k]);
    }
    const double value = adas(edited, target);
    report.adas_per_lambda.push_back({set.lambdas[k], value});
    adas_total += value * ns;
    adas_count += ns;
  }
  report.adas = adas_count > 0 ? adas_total / adas_count : 0.0;

  const Eigen::Index fdim = providers.pooled(set.images[k0][0]).size();
  Mat originals(fdim, ns);
  Mat edits(fdim, static_cast<Eigen::Index>(ns) * (nk - 1));
  int col = 0;
  for (int i = 0; i < ns; ++i) {
    originals.col(i) = providers.pooled(set.images[k0][i]);
  }
  for (int k = 0; k < nk; ++k) {
    if (k == k0) {
      continue;
    }
    for (int i = 0; i < ns; ++i) {
      edits.col(col++) = providers.pooled(set.images[k][i]);
    }
  }
  report.fid =
      frechet_distance(estimate_gaussian(originals), estimate_gaussian(edits));
  return report;
}

nlohmann::ordered_json report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["attribute"] = report.attribute;
  j["dataset"] = report.dataset_tag;
  j["lambdas"] = report.lambdas;
  j["is"] = report.is;
  j["pd"] = report.pd;
  j["fid"] = report.fid;
  j["adas"] = report.adas;
  j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& pair : report.pairs) {
    nlohmann::ordered_json p;
    p["lambda_lo"] = pair.lambda_lo;
    p["lambda_hi"] = pair.lambda_hi;
    p["is"] = pair.is;
    p["pd"] = pair.pd;
    j["pairs"].push_back(p);
  }
  j["adas_per_lambda"] = nlohmann::ordered_json::array();
  for (const auto& entry : report.adas_per_lambda) {
    nlohmann::ordered_json p;
    p["lambda"] = entry.lambda;
    p["adas"] = entry.adas;
    j["adas_per_lambda"].push_back(p);
  }
  return j;
}

}  // namespace impflow
