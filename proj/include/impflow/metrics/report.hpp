#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "impflow/metrics/perceptual.hpp"
#include "impflow/types.hpp"

namespace impflow {

struct PairMetrics {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double is = 0.0;
  double pd = 0.0;
};

struct LambdaAdas {
  double lambda = 0.0;
  double adas = 0.0;
};

struct MetricsReport {
  std::string attribute;
  std::string dataset_tag;
  std::vector<double> lambdas;
  std::vector<PairMetrics> pairs;
  std::vector<LambdaAdas> adas_per_lambda;
  double is = 0.0;    // mean over adjacent pairs
  double pd = 0.0;    // mean over adjacent pairs
  double fid = 0.0;   // originals vs pooled edits
  double adas = 0.0;  // mean over all edits
};

// Pluggable embedding/feature providers so the protocol is independent of the
// toy world.
struct MetricProviders {
  std::function<Vec(const ImageGrid&)> identity;
  std::function<FeatureStack(const ImageGrid&)> features;
  std::function<Vec(const ImageGrid&)> pooled;   // distribution features
  std::function<double(const ImageGrid&)> score;
};

// One edit ladder per sample: images[k][i] is sample i edited at lambdas[k].
// lambdas must be strictly increasing and include 0 (the originals).
struct SpectrumImageSet {
  std::vector<double> lambdas;
  std::vector<std::vector<ImageGrid>> images;
};

MetricsReport adjacent_pair_eval(const SpectrumImageSet& set,
                                 const MetricProviders& providers,
                                 const std::string& attribute,
                                 const std::string& dataset_tag = {});

nlohmann::ordered_json report_to_json(const MetricsReport& report);

}  // namespace impflow
