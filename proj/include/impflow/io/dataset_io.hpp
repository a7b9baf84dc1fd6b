#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "impflow/types.hpp"
#include "impflow/world/sample.hpp"

namespace impflow {

struct FaceRecord {
  int id = 0;
  FaceParams params;
  std::array<double, 3> scores{};  // indexed by AttributeKind
  std::string image_path;          // relative to the dataset directory
};

struct LoadedDataset {
  std::string dir;
  WorldConfig world;
  uint64_t sample_seed = 0;
  int n = 0;
  bool adult_only = false;
  std::vector<FaceRecord> records;
};

// Dataset directory layout: dataset.tsv + world.cfg + images/*.pgm. The TSV
// has one row per face: id, p0..p11, the three scores, image path.
void write_dataset(const std::string& dir, const SampleSet& set,
                   const WorldConfig& world, uint64_t sample_seed,
                   bool adult_only);
LoadedDataset load_dataset(const std::string& dir);
ImageGrid load_record_image(const LoadedDataset& ds, int index);

// Identity of the latent space / renderer combination. Two datasets sampled
// with different seeds from the same world share this hash.
std::string world_hash(const WorldConfig& world);

void write_world_config(const std::string& path, const WorldConfig& world,
                        uint64_t sample_seed, int n, bool adult_only);

}  // namespace impflow
