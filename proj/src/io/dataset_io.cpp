#include "impflow/io/dataset_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "impflow/io/pgm.hpp"
#include "impflow/util.hpp"

namespace fs = std::filesystem;

namespace impflow {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::map<std::string, std::string> parse_keyvalue(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path);
  }
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError("bad config line in " + path + ": " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& require(const std::map<std::string, std::string>& kv,
                           const std::string& key, const std::string& path) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw IoError("missing key '" + key + "' in " + path);
  }
  return it->second;
}

}  // namespace

std::string world_hash(const WorldConfig& world) {
  std::ostringstream os;
  os << "mixing_seed=" << world.mixing_seed << ";image_size=" << world.image_size
     << ";renderer_version=" << world.renderer_version;
  return to_hex(fnv1a64(os.str()));
}

void write_world_config(const std::string& path, const WorldConfig& world,
                        uint64_t sample_seed, int n, bool adult_only) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write config " + path);
  }
  out << "format_version=1\n";
  out << "mixing_seed=" << world.mixing_seed << "\n";
  out << "sample_seed=" << sample_seed << "\n";
  out << "n=" << n << "\n";
  out << "adult_only=" << (adult_only ? 1 : 0) << "\n";
  out << "covariate_scale=" << format_double(world.covariate_scale) << "\n";
  out << "image_size=" << world.image_size << "\n";
  out << "renderer_version=" << world.renderer_version << "\n";
  out << "energy_threshold=" << format_double(world.energy_threshold) << "\n";
  out << "identity_threshold=" << format_double(world.identity_threshold)
      << "\n";
}

void write_dataset(const std::string& dir, const SampleSet& set,
                   const WorldConfig& world, uint64_t sample_seed,
                   bool adult_only) {
  fs::create_directories(fs::path(dir) / "images");
  write_world_config((fs::path(dir) / "world.cfg").string(), world, sample_seed,
                     set.size(), adult_only);

  std::ofstream tsv(fs::path(dir) / "dataset.tsv");
  if (!tsv) {
    throw IoError("cannot write dataset.tsv in " + dir);
  }
  tsv << "id";
  for (int j = 0; j < param::kCount; ++j) {
    tsv << "\tp" << j;
  }
  tsv << "\tscore_trust\tscore_dom\tscore_attr\timg_path\n";

  char name[32];
  for (int i = 0; i < set.size(); ++i) {
    std::snprintf(name, sizeof(name), "images/img%05d.pgm", i);
    write_pgm(set.images[i], (fs::path(dir) / name).string());
    tsv << i;
    for (int j = 0; j < param::kCount; ++j) {
      tsv << "\t" << format_double(set.params[i][j]);
    }
    for (double s : set.scores[i]) {
      tsv << "\t" << format_double(s);
    }
    tsv << "\t" << name << "\n";
  }
  if (!tsv) {
    throw IoError("short write to dataset.tsv in " + dir);
  }
}

LoadedDataset load_dataset(const std::string& dir) {
  LoadedDataset ds;
  ds.dir = dir;

  std::string cfg_path = (fs::path(dir) / "world.cfg").string();
  auto kv = parse_keyvalue(cfg_path);
  ds.world.mixing_seed = std::stoull(require(kv, "mixing_seed", cfg_path));
  ds.sample_seed = std::stoull(require(kv, "sample_seed", cfg_path));
  ds.n = std::stoi(require(kv, "n", cfg_path));
  ds.adult_only = require(kv, "adult_only", cfg_path) != "0";
  ds.world.covariate_scale = std::stod(require(kv, "covariate_scale", cfg_path));
  ds.world.image_size = std::stoi(require(kv, "image_size", cfg_path));
  ds.world.renderer_version =
      std::stoi(require(kv, "renderer_version", cfg_path));
  ds.world.energy_threshold =
      std::stod(require(kv, "energy_threshold", cfg_path));
  ds.world.identity_threshold =
      std::stod(require(kv, "identity_threshold", cfg_path));

  std::string tsv_path = (fs::path(dir) / "dataset.tsv").string();
  std::ifstream tsv(tsv_path);
  if (!tsv) {
    throw IoError("cannot open " + tsv_path);
  }
  std::string line;
  if (!std::getline(tsv, line)) {
    throw IoError("empty dataset.tsv in " + dir);
  }
  while (std::getline(tsv, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    FaceRecord rec;
    auto next = [&]() {
      if (!std::getline(row, cell, '\t')) {
        throw IoError("short row in " + tsv_path);
      }
      return cell;
    };
    rec.id = std::stoi(next());
    for (int j = 0; j < param::kCount; ++j) {
      rec.params[j] = std::stod(next());
    }
    for (double& s : rec.scores) {
      s = std::stod(next());
    }
    rec.image_path = next();
    ds.records.push_back(std::move(rec));
  }
  if (static_cast<int>(ds.records.size()) != ds.n) {
    throw IoError("dataset.tsv row count does not match world.cfg n");
  }
  return ds;
}

ImageGrid load_record_image(const LoadedDataset& ds, int index) {
  if (index < 0 || index >= static_cast<int>(ds.records.size())) {
    throw DimensionError("load_record_image: index out of range");
  }
  return read_pgm((fs::path(ds.dir) / ds.records[index].image_path).string());
}

}  // namespace impflow
