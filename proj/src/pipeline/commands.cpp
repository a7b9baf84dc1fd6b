#include "impflow/pipeline/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "impflow/flow/edit.hpp"
#include "impflow/flow/train.hpp"
#include "impflow/io/dataset_io.hpp"
#include "impflow/io/pgm.hpp"
#include "impflow/metrics/report.hpp"
#include "impflow/pipeline/bundle.hpp"
#include "impflow/spectrum/histogram.hpp"
#include "impflow/spectrum/spectrum.hpp"
#include "impflow/util.hpp"
#include "impflow/world/filter.hpp"
#include "impflow/world/oracle.hpp"

namespace impflow {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr uint64_t kPerceptualSeed = 2024;

std::string hash_flags(const std::string& canonical) {
  return to_hex(fnv1a64(canonical));
}

void write_json_file(const ordered_json& j, const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path());
  }
  std::ofstream out(p);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << j.dump(2) << "\n";
  if (!out) {
    throw IoError("failed writing " + path);
  }
}

ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

ModelBundle open_or_create_bundle(const std::string& dir,
                                  const LoadedDataset& ds) {
  if (bundle_exists(dir)) {
    ModelBundle bundle = load_bundle(dir);
    if (bundle.hash != world_hash(ds.world)) {
      throw ConfigError("bundle " + dir + " was trained for world " +
                        bundle.hash + " but dataset " + ds.dir + " is world " +
                        world_hash(ds.world));
    }
    return bundle;
  }
  return make_bundle(ds.world);
}

const CnfModel& require_mapper(const ModelBundle& bundle, AttributeKind attr) {
  auto it = bundle.mappers.find(attr);
  if (it == bundle.mappers.end()) {
    throw ConfigError(std::string("bundle has no trained mapper for ") +
                      to_string(attr));
  }
  return it->second;
}

const RegressorModel& require_regressor(const ModelBundle& bundle,
                                        AttributeKind attr) {
  auto it = bundle.regressors.find(attr);
  if (it == bundle.regressors.end()) {
    throw ConfigError(std::string("bundle has no trained regressor for ") +
                      to_string(attr));
  }
  return it->second;
}

void require_encoder(const ModelBundle& bundle) {
  if (!bundle.has_encoder || !bundle.encoder.e1_trained ||
      !bundle.encoder.corrector_trained) {
    throw ConfigError("bundle has no trained encoder; run train-mapper first");
  }
}

std::vector<double> parse_delta_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) {
      continue;
    }
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad delta value: " + item);
    }
    if (pos != item.size()) {
      throw ConfigError("bad delta value: " + item);
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw ConfigError("empty delta list");
  }
  return out;
}

std::vector<double> parse_range(const std::string& text) {
  double lo = 0, hi = 0, step = 0;
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
      !std::getline(ss, c, ':')) {
    throw ConfigError("range must be lo:hi:step, got " + text);
  }
  try {
    lo = std::stod(a);
    hi = std::stod(b);
    step = std::stod(c);
  } catch (const std::exception&) {
    throw ConfigError("range must be numeric lo:hi:step, got " + text);
  }
  if (step <= 0 || hi < lo) {
    throw ConfigError("range needs hi >= lo and step > 0");
  }
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int k = 0; k < count; ++k) {
    double v = lo + k * step;
    if (std::abs(v) < 1e-12) {
      v = 0.0;
    }
    grid.push_back(v);
  }
  return grid;
}

// ---- gen-data ----

struct GenDataOpts {
  int n = 5000;
  uint64_t seed = 1;
  bool adult_only = false;
  std::string out;
  double covariate_scale = 1.0;
  uint64_t mixing_seed = 77;
  int image_size = 32;
};

void cmd_gen_data(const GenDataOpts& o) {
  WorldConfig world;
  world.mixing_seed = o.mixing_seed;
  world.image_size = o.image_size;
  world.covariate_scale = o.covariate_scale;
  SampleSet set = sample_dataset(o.n, o.seed, o.adult_only, world);
  write_dataset(o.out, set, world, o.seed, o.adult_only);
  std::cout << "wrote " << o.n << " faces to " << o.out << " (world "
            << world_hash(world) << ")\n";
}

// ---- train-attr ----

struct TrainAttrOpts {
  std::string attr;
  std::string data;
  int iters = 4000;
  std::string out;
  uint64_t seed = 1;
  int batch = 50;
  double lr = 1e-3;
};

void cmd_train_attr(const TrainAttrOpts& o) {
  const AttributeKind attr = attribute_from_string(o.attr);
  LoadedDataset ds = load_dataset(o.data);
  ModelBundle bundle = open_or_create_bundle(o.out, ds);

  std::vector<ScoredSample> samples;
  samples.reserve(ds.records.size());
  for (size_t i = 0; i < ds.records.size(); ++i) {
    ScoredSample s;
    s.image = load_record_image(ds, static_cast<int>(i));
    s.score = ds.records[i].scores[static_cast<int>(attr)];
    s.source = ds.dir;
    samples.push_back(std::move(s));
  }

  TrainConfig cfg;
  cfg.iterations = o.iters;
  cfg.batch_size = o.batch;
  cfg.learning_rate = o.lr;
  cfg.seed = o.seed;
  RegressorTrainResult result = train_regressor(samples, attr, cfg);
  bundle.regressors[attr] = result.model;
  save_bundle(bundle, o.out);
  bundle = load_bundle(o.out);  // continue from the serialized precision

  std::vector<double> preds, targets;
  for (const auto& s : samples) {
    preds.push_back(predict_score(bundle.regressors.at(attr), s.image));
    targets.push_back(s.score);
  }
  std::cout << "trained " << to_string(attr) << " regressor on "
            << samples.size() << " faces";
  if (!result.loss_curve.empty()) {
    std::cout << ": final loss " << result.loss_curve.back();
  }
  std::cout << ", train r2 " << r_squared(preds, targets) << "\n";
}

// ---- train-mapper ----

struct TrainMapperOpts {
  std::string attr;
  std::string data;
  int iters = 4000;
  std::string out;
  uint64_t seed = 1;
  int batch = 50;
  double lr = 1e-3;
  int encoder_iters = 6000;
  int corrector_iters = 1500;
};

void cmd_train_mapper(const TrainMapperOpts& o) {
  const AttributeKind attr = attribute_from_string(o.attr);
  LoadedDataset ds = load_dataset(o.data);
  ModelBundle bundle = open_or_create_bundle(o.out, ds);

  std::vector<ImageGrid> images;
  images.reserve(ds.records.size());
  for (size_t i = 0; i < ds.records.size(); ++i) {
    images.push_back(load_record_image(ds, static_cast<int>(i)));
  }

  if (!bundle.has_encoder || !bundle.encoder.e1_trained) {
    Mat latents(param::kCount, static_cast<Eigen::Index>(ds.records.size()));
    for (size_t i = 0; i < ds.records.size(); ++i) {
      latents.col(static_cast<Eigen::Index>(i)) =
          bundle.mixing.to_latent(ds.records[i].params);
    }
    TrainConfig ecfg;
    ecfg.iterations = o.encoder_iters;
    ecfg.batch_size = o.batch;
    ecfg.learning_rate = o.lr;
    ecfg.seed = o.seed;
    EncoderModel fresh = make_encoder(o.seed * 977 + 5, ds.world.image_size);
    EncoderTrainResult etrained = train_encoder(fresh, images, latents, ecfg);
    bundle.encoder = std::move(etrained.model);
    TrainConfig ccfg = ecfg;
    ccfg.iterations = o.corrector_iters;
    std::vector<double> ccurve =
        train_corrector(bundle.encoder, images, bundle.mixing, ccfg);
    bundle.has_encoder = true;
    save_bundle(bundle, o.out);
    bundle = load_bundle(o.out);
    std::cout << "trained encoder on " << images.size() << " faces";
    if (!etrained.loss_curve.empty()) {
      std::cout << ": latent loss " << etrained.loss_curve.back();
    }
    if (!ccurve.empty()) {
      std::cout << ", pixel loss " << ccurve.back();
    }
    std::cout << "\n";
  }

  std::vector<QualityRecord> quality;
  std::vector<Vec> encoded;
  quality.reserve(images.size());
  encoded.reserve(images.size());
  for (size_t i = 0; i < images.size(); ++i) {
    QualityRecord q;
    q.energy = foreground_energy(images[i]);
    Vec what = encode(bundle.encoder, images[i]);
    Vec truth = identity_embed(ds.records[i].params);
    Vec est = identity_embed(what, bundle.mixing);
    const double tn = truth.norm();
    const double en = est.norm();
    q.identity_similarity =
        (tn == 0.0 || en == 0.0) ? 0.0 : truth.dot(est) / (tn * en);
    quality.push_back(q);
    encoded.push_back(std::move(what));
  }
  QualityReport filter = quality_filter(quality, ds.world.energy_threshold,
                                        ds.world.identity_threshold);
  std::cout << "quality filter kept " << filter.kept << " of " << filter.total
            << " (" << filter.rejected_energy << " low energy, "
            << filter.rejected_identity << " low identity)\n";
  if (filter.kept == 0) {
    throw NumericError("quality filter rejected every sample");
  }

  std::vector<FlowSample> flow_data;
  flow_data.reserve(filter.kept);
  for (size_t i = 0; i < images.size(); ++i) {
    if (!filter.keep[i]) {
      continue;
    }
    flow_data.push_back(
        {encoded[i], ds.records[i].scores[static_cast<int>(attr)]});
  }

  TrainConfig cfg;
  cfg.iterations = o.iters;
  cfg.batch_size = o.batch;
  cfg.learning_rate = o.lr;
  cfg.seed = o.seed;
  FlowArchitecture arch;
  FlowTrainResult result = train_mapper(flow_data, arch, attr, cfg);
  bundle.mappers[attr] = result.model;
  save_bundle(bundle, o.out);
  bundle = load_bundle(o.out);
  std::cout << "trained " << to_string(attr) << " mapper on "
            << flow_data.size() << " latents";
  if (!result.loss_curve.empty()) {
    std::cout << ": final nll " << result.loss_curve.back();
  }
  std::cout << "\n";
}

// ---- edit ----

struct EditOpts {
  std::string image;
  std::string attr;
  double delta = 0.0;
  std::string bundle;
  std::string out;
};

void cmd_edit(const EditOpts& o) {
  const AttributeKind attr = attribute_from_string(o.attr);
  ModelBundle bundle = load_bundle(o.bundle);
  require_encoder(bundle);
  const CnfModel& mapper = require_mapper(bundle, attr);
  const RegressorModel& regressor = require_regressor(bundle, attr);

  ImageGrid x = read_pgm(o.image);
  Vec what = encode(bundle.encoder, x);
  const double original = predict_score(regressor, x);
  EditResult edit = edit_latent(mapper, what, original, o.delta);
  ImageGrid out =
      invert_with_restoration(bundle.encoder, edit.latent, x, bundle.mixing);
  write_pgm(out, o.out);
  std::cout << "score " << original << " -> target " << edit.target_score
            << (edit.clamped ? " (clamped)" : "") << "; wrote " << o.out
            << "\n";
}

// ---- eval ----

struct EvalOpts {
  std::string set;
  std::string deltas = "-0.2,-0.1,0.1,0.2";
  std::string bundle;
  std::string report;
  std::string attr = "all";
};

void cmd_eval(const EvalOpts& o) {
  LoadedDataset ds = load_dataset(o.set);
  ModelBundle bundle = load_bundle(o.bundle);
  require_encoder(bundle);

  std::vector<std::string> warnings;
  if (bundle.hash != world_hash(ds.world)) {
    warnings.push_back("world hash mismatch: dataset " + world_hash(ds.world) +
                       " vs bundle " + bundle.hash);
  }

  std::vector<AttributeKind> attrs;
  if (o.attr == "all") {
    for (const auto& [attr, mapper] : bundle.mappers) {
      attrs.push_back(attr);
    }
    if (attrs.empty()) {
      throw ConfigError("bundle has no trained mappers");
    }
  } else {
    attrs.push_back(attribute_from_string(o.attr));
  }

  std::vector<double> lambdas = parse_delta_list(o.deltas);
  lambdas.push_back(0.0);
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  for (double l : lambdas) {
    if (std::abs(l) > 0.4 + 1e-12) {
      throw ConfigError("delta outside [-0.4, 0.4]");
    }
  }

  std::vector<ImageGrid> originals;
  originals.reserve(ds.records.size());
  for (size_t i = 0; i < ds.records.size(); ++i) {
    originals.push_back(load_record_image(ds, static_cast<int>(i)));
  }

  const PerceptualPyramid pyramid =
      PerceptualPyramid::create(kPerceptualSeed, ds.world.image_size);

  ordered_json reports = ordered_json::object();
  for (AttributeKind attr : attrs) {
    const CnfModel& mapper = require_mapper(bundle, attr);
    const RegressorModel& regressor = require_regressor(bundle, attr);

    SpectrumImageSet set;
    set.lambdas = lambdas;
    set.images.resize(lambdas.size());
    std::vector<double> original_scores;
    for (size_t i = 0; i < originals.size(); ++i) {
      const ImageGrid& x = originals[i];
      Vec what = encode(bundle.encoder, x);
      const double so = predict_score(regressor, x);
      original_scores.push_back(so);
      for (size_t k = 0; k < lambdas.size(); ++k) {
        if (lambdas[k] == 0.0) {
          set.images[k].push_back(x);
          continue;
        }
        EditResult edit = edit_latent(mapper, what, so, lambdas[k]);
        set.images[k].push_back(invert_with_restoration(
            bundle.encoder, edit.latent, x, bundle.mixing));
      }
    }

    MetricProviders providers;
    providers.identity = make_image_identity_provider(bundle.encoder, bundle.mixing);
    providers.features = [&pyramid](const ImageGrid& img) {
      return pyramid.extract(img);
    };
    providers.pooled = [&pyramid](const ImageGrid& img) {
      return pyramid.pooled_features(img);
    };
    providers.score = [&regressor](const ImageGrid& img) {
      return predict_score(regressor, img);
    };
    MetricsReport report =
        adjacent_pair_eval(set, providers, to_string(attr), ds.dir);
    ordered_json rj = report_to_json(report);
    ScoreHistogram hist = score_histogram(original_scores, 20);
    rj["score_histogram"] = {
        {"bins", hist.bins}, {"counts", hist.counts}, {"mass_mid", hist.mass_mid}};
    reports[to_string(attr)] = rj;
    std::cout << "eval " << to_string(attr) << ": is " << report.is << ", pd "
              << report.pd << ", fid " << report.fid << ", adas "
              << report.adas << "\n";
  }

  ordered_json j;
  j["tool_version"] = kToolVersion;
  j["command"] = "eval";
  j["run_config_hash"] =
      hash_flags("cmd=eval;set=" + o.set + ";deltas=" + o.deltas +
                 ";bundle=" + o.bundle + ";attr=" + o.attr);
  j["bundle"] = {{"dir", o.bundle}, {"world_hash", bundle.hash}};
  j["dataset"] =
      {{"dir", ds.dir}, {"world_hash", world_hash(ds.world)}, {"n", ds.n}};
  j["warnings"] = warnings;
  j["reports"] = reports;
  write_json_file(j, o.report);
  std::cout << "wrote report to " << o.report << "\n";
}

// ---- spectrum ----

struct SpectrumOpts {
  std::string image;
  std::string attr;
  std::string range = "-0.4:0.4:0.1";
  std::string bundle;
  std::string out;
};

void cmd_spectrum(const SpectrumOpts& o) {
  const AttributeKind attr = attribute_from_string(o.attr);
  ModelBundle bundle = load_bundle(o.bundle);
  require_encoder(bundle);
  const CnfModel& mapper = require_mapper(bundle, attr);
  const RegressorModel& regressor = require_regressor(bundle, attr);

  ImageGrid x = read_pgm(o.image);
  std::vector<double> grid = parse_range(o.range);
  SpectrumResult spectrum =
      build_spectrum(x, grid, mapper, regressor, bundle.encoder, bundle.mixing);

  const int n = static_cast<int>(spectrum.entries.size());
  const int side = x.height;
  ImageGrid montage(side, n * side + (n - 1));
  for (int r = 0; r < montage.height; ++r) {
    for (int c = 0; c < montage.width; ++c) {
      montage.at(r, c) = 1.0;
    }
  }
  for (int k = 0; k < n; ++k) {
    const ImageGrid& tile = spectrum.entries[k].image;
    const int off = k * (side + 1);
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        montage.at(r, off + c) = tile.at(r, c);
      }
    }
  }
  write_pgm(montage, o.out + ".pgm");

  ordered_json j;
  j["tool_version"] = kToolVersion;
  j["command"] = "spectrum";
  j["run_config_hash"] =
      hash_flags("cmd=spectrum;image=" + o.image + ";attr=" + o.attr +
                 ";range=" + o.range + ";bundle=" + o.bundle);
  j["bundle"] = {{"dir", o.bundle}, {"world_hash", bundle.hash}};
  j["attribute"] = to_string(attr);
  j["original_score"] = spectrum.original_score;
  auto column = [&](auto getter) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : spectrum.entries) {
      arr.push_back(getter(e));
    }
    return arr;
  };
  j["lambdas"] = column([](const SpectrumEntry& e) { return e.lambda; });
  j["target_scores"] =
      column([](const SpectrumEntry& e) { return e.target_score; });
  j["predicted_scores"] =
      column([](const SpectrumEntry& e) { return e.predicted_score; });
  j["truth_scores"] =
      column([](const SpectrumEntry& e) { return e.truth_score; });
  j["identity_similarities"] =
      column([](const SpectrumEntry& e) { return e.identity_similarity; });
  j["clamped"] = column([](const SpectrumEntry& e) { return e.clamped; });
  write_json_file(j, o.out + ".json");
  std::cout << "wrote " << o.out << ".pgm and " << o.out << ".json (" << n
            << " steps)\n";
}

// ---- report ----

struct ReportOpts {
  std::string inputs;
  std::string out;
};

void cmd_report(const ReportOpts& o) {
  std::vector<std::string> paths;
  std::stringstream ss(o.inputs);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      paths.push_back(item);
    }
  }
  if (paths.empty()) {
    throw ConfigError("no input reports given");
  }

  ordered_json merged = ordered_json::array();
  std::map<std::string, std::map<std::string, std::pair<double, int>>> sums;
  for (const auto& path : paths) {
    ordered_json j = read_json_file(path);
    if (!j.contains("reports") || !j["reports"].is_object()) {
      throw IoError("not an evaluation report: " + path);
    }
    for (const auto& [attr, rep] : j["reports"].items()) {
      for (const char* key : {"is", "pd", "fid", "adas"}) {
        if (rep.contains(key)) {
          auto& slot = sums[attr][key];
          slot.first += rep[key].get<double>();
          slot.second += 1;
        }
      }
    }
    merged.push_back({{"path", path}, {"report", j}});
  }

  ordered_json summary = ordered_json::object();
  for (const auto& [attr, metrics] : sums) {
    ordered_json entry = ordered_json::object();
    for (const char* key : {"is", "pd", "fid", "adas"}) {
      auto it = metrics.find(key);
      if (it != metrics.end() && it->second.second > 0) {
        entry[key] = it->second.first / it->second.second;
      }
    }
    summary[attr] = entry;
  }

  ordered_json j;
  j["tool_version"] = kToolVersion;
  j["command"] = "report";
  j["run_config_hash"] = hash_flags("cmd=report;inputs=" + o.inputs);
  j["inputs"] = paths;
  j["summary"] = summary;
  j["reports"] = merged;
  write_json_file(j, o.out);
  std::cout << "merged " << paths.size() << " reports into " << o.out << "\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"score-conditioned latent face editing pipeline"};
  app.name("impflow");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  GenDataOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "sample a toy dataset");
  gen_cmd->add_option("--n", gen.n, "faces to sample")->required();
  gen_cmd->add_option("--seed", gen.seed, "sampling seed");
  gen_cmd->add_flag("--adult-only", gen.adult_only,
                    "restrict wrinkle density to be non-negative");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--covariate-scale", gen.covariate_scale,
                      "shrink covariates toward neutral (0, 1]");
  gen_cmd->add_option("--mixing-seed", gen.mixing_seed, "latent space seed");
  gen_cmd->add_option("--image-size", gen.image_size, "raster side length");

  TrainAttrOpts ta;
  CLI::App* ta_cmd =
      app.add_subcommand("train-attr", "train a score regressor into a bundle");
  ta_cmd->add_option("--attr", ta.attr, "trust | dominance | attractiveness")
      ->required();
  ta_cmd->add_option("--data", ta.data, "dataset directory")->required();
  ta_cmd->add_option("--iters", ta.iters, "optimizer iterations");
  ta_cmd->add_option("--out", ta.out, "bundle directory")->required();
  ta_cmd->add_option("--seed", ta.seed, "training seed");
  ta_cmd->add_option("--batch", ta.batch, "minibatch size");
  ta_cmd->add_option("--lr", ta.lr, "learning rate");

  TrainMapperOpts tm;
  CLI::App* tm_cmd = app.add_subcommand(
      "train-mapper", "train the flow mapper (and encoder if missing)");
  tm_cmd->add_option("--attr", tm.attr, "trust | dominance | attractiveness")
      ->required();
  tm_cmd->add_option("--data", tm.data, "dataset directory")->required();
  tm_cmd->add_option("--iters", tm.iters, "optimizer iterations");
  tm_cmd->add_option("--out", tm.out, "bundle directory")->required();
  tm_cmd->add_option("--seed", tm.seed, "training seed");
  tm_cmd->add_option("--batch", tm.batch, "minibatch size");
  tm_cmd->add_option("--lr", tm.lr, "learning rate");
  tm_cmd->add_option("--encoder-iters", tm.encoder_iters,
                     "latent encoder iterations");
  tm_cmd->add_option("--corrector-iters", tm.corrector_iters,
                     "restoration corrector iterations");

  EditOpts ed;
  CLI::App* ed_cmd = app.add_subcommand("edit", "edit one face image");
  ed_cmd->add_option("--image", ed.image, "input PGM")->required();
  ed_cmd->add_option("--attr", ed.attr, "attribute to move")->required();
  ed_cmd->add_option("--delta", ed.delta, "score change in [-0.4, 0.4]")
      ->required();
  ed_cmd->add_option("--bundle", ed.bundle, "bundle directory")->required();
  ed_cmd->add_option("--out", ed.out, "output PGM")->required();

  EvalOpts ev;
  CLI::App* ev_cmd =
      app.add_subcommand("eval", "run the adjacent-pair evaluation protocol");
  ev_cmd->add_option("--set", ev.set, "evaluation dataset directory")
      ->required();
  ev_cmd->add_option("--deltas", ev.deltas, "comma-separated lambda values");
  ev_cmd->add_option("--bundle", ev.bundle, "bundle directory")->required();
  ev_cmd->add_option("--report", ev.report, "output JSON path")->required();
  ev_cmd->add_option("--attr", ev.attr, "one attribute or 'all'");

  SpectrumOpts sp;
  CLI::App* sp_cmd =
      app.add_subcommand("spectrum", "render a transformation spectrum");
  sp_cmd->add_option("--image", sp.image, "input PGM")->required();
  sp_cmd->add_option("--attr", sp.attr, "attribute to sweep")->required();
  sp_cmd->add_option("--range", sp.range, "lambda grid as lo:hi:step");
  sp_cmd->add_option("--bundle", sp.bundle, "bundle directory")->required();
  sp_cmd->add_option("--out", sp.out, "output prefix (.pgm/.json)")->required();

  ReportOpts rp;
  CLI::App* rp_cmd =
      app.add_subcommand("report", "merge evaluation reports");
  rp_cmd->add_option("--inputs", rp.inputs, "comma-separated report JSONs")
      ->required();
  rp_cmd->add_option("--out", rp.out, "merged JSON path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (gen_cmd->parsed()) {
      cmd_gen_data(gen);
    } else if (ta_cmd->parsed()) {
      cmd_train_attr(ta);
    } else if (tm_cmd->parsed()) {
      cmd_train_mapper(tm);
    } else if (ed_cmd->parsed()) {
      cmd_edit(ed);
    } else if (ev_cmd->parsed()) {
      cmd_eval(ev);
    } else if (sp_cmd->parsed()) {
      cmd_spectrum(sp);
    } else if (rp_cmd->parsed()) {
      cmd_report(rp);
    }
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace impflow
