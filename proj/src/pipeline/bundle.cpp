#include "impflow/pipeline/bundle.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "impflow/io/dataset_io.hpp"
#include "impflow/io/model_io.hpp"
#include "impflow/util.hpp"

namespace impflow {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr int kBundleVersion = 1;

ordered_json world_to_json(const WorldConfig& world) {
  ordered_json j;
  j["mixing_seed"] = world.mixing_seed;
  j["image_size"] = world.image_size;
  j["renderer_version"] = world.renderer_version;
  j["covariate_scale"] = world.covariate_scale;
  j["energy_threshold"] = world.energy_threshold;
  j["identity_threshold"] = world.identity_threshold;
  return j;
}

WorldConfig world_from_json(const ordered_json& j) {
  WorldConfig world;
  world.mixing_seed = j.at("mixing_seed").get<uint64_t>();
  world.image_size = j.at("image_size").get<int>();
  world.renderer_version = j.at("renderer_version").get<int>();
  world.covariate_scale = j.at("covariate_scale").get<double>();
  world.energy_threshold = j.at("energy_threshold").get<double>();
  world.identity_threshold = j.at("identity_threshold").get<double>();
  return world;
}

std::string regressor_file(AttributeKind attr) {
  return std::string("regressor_") + to_string(attr) + ".bin";
}

std::string mapper_file(AttributeKind attr) {
  return std::string("mapper_") + to_string(attr) + ".bin";
}

}  // namespace

ModelBundle make_bundle(const WorldConfig& world) {
  ModelBundle bundle;
  bundle.world = world;
  bundle.hash = world_hash(world);
  bundle.mixing = MixingMatrix::generate(world.mixing_seed);
  return bundle;
}

bool bundle_exists(const std::string& dir) {
  return fs::exists(fs::path(dir) / "manifest.json");
}

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path root(dir);

  save_mixing(bundle.mixing, (root / "mixing.bin").string());
  if (bundle.has_encoder) {
    save_encoder(bundle.encoder, (root / "encoder.bin").string());
  }
  for (const auto& [attr, model] : bundle.regressors) {
    save_regressor(model, (root / regressor_file(attr)).string());
  }
  for (const auto& [attr, model] : bundle.mappers) {
    save_flow_model(model, (root / mapper_file(attr)).string());
  }

  ordered_json manifest;
  manifest["format"] = "impflow-bundle";
  manifest["version"] = kBundleVersion;
  manifest["tool_version"] = kToolVersion;
  manifest["world"] = world_to_json(bundle.world);
  manifest["world_hash"] = bundle.hash;
  manifest["mixing"] = "mixing.bin";
  manifest["encoder"] =
      bundle.has_encoder ? ordered_json("encoder.bin") : ordered_json(nullptr);
  ordered_json regs = ordered_json::object();
  for (const auto& [attr, model] : bundle.regressors) {
    regs[to_string(attr)] = regressor_file(attr);
  }
  manifest["regressors"] = regs;
  ordered_json maps = ordered_json::object();
  for (const auto& [attr, model] : bundle.mappers) {
    maps[to_string(attr)] = mapper_file(attr);
  }
  manifest["mappers"] = maps;

  std::ofstream out(root / "manifest.json");
  if (!out) {
    throw IoError("cannot write bundle manifest in " + dir);
  }
  out << manifest.dump(2) << "\n";
  if (!out) {
    throw IoError("failed writing bundle manifest in " + dir);
  }
}

ModelBundle load_bundle(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream in(root / "manifest.json");
  if (!in) {
    throw IoError("no bundle manifest in " + dir);
  }
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt bundle manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != "impflow-bundle" ||
      manifest.value("version", 0) != kBundleVersion) {
    throw IoError("unsupported bundle format in " + dir);
  }

  ModelBundle bundle;
  bundle.world = world_from_json(manifest.at("world"));
  bundle.hash = manifest.at("world_hash").get<std::string>();
  if (bundle.hash != world_hash(bundle.world)) {
    throw IoError("corrupt bundle: world hash mismatch in " + dir);
  }
  bundle.mixing =
      load_mixing((root / manifest.at("mixing").get<std::string>()).string());
  if (bundle.mixing.seed != bundle.world.mixing_seed) {
    throw IoError("corrupt bundle: mixing seed mismatch in " + dir);
  }
  if (!manifest.at("encoder").is_null()) {
    bundle.encoder =
        load_encoder((root / manifest.at("encoder").get<std::string>()).string());
    bundle.has_encoder = true;
  }
  for (const auto& [name, file] : manifest.at("regressors").items()) {
    const AttributeKind attr = attribute_from_string(name);
    RegressorModel model =
        load_regressor((root / file.get<std::string>()).string());
    if (model.attribute != attr) {
      throw IoError("corrupt bundle: regressor tag mismatch for " + name);
    }
    bundle.regressors.emplace(attr, std::move(model));
  }
  for (const auto& [name, file] : manifest.at("mappers").items()) {
    const AttributeKind attr = attribute_from_string(name);
    CnfModel model = load_flow_model((root / file.get<std::string>()).string());
    if (model.attribute != attr) {
      throw IoError("corrupt bundle: mapper tag mismatch for " + name);
    }
    bundle.mappers.emplace(attr, std::move(model));
  }
  return bundle;
}

}  // namespace impflow
