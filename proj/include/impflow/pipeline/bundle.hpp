#pragma once

#include <map>
#include <string>

#include "impflow/flow/model.hpp"
#include "impflow/predictor/regressor.hpp"
#include "impflow/world/encoder.hpp"
#include "impflow/world/mixing.hpp"
#include "impflow/world/sample.hpp"

namespace impflow {

// Everything trained against one world: the mixing matrix, the inversion
// encoder and the per-attribute regressors and flow mappers. The embedded
// world hash ties components together; loading verifies it.
struct ModelBundle {
  WorldConfig world;
  std::string hash;
  MixingMatrix mixing;
  EncoderModel encoder;
  bool has_encoder = false;
  std::map<AttributeKind, RegressorModel> regressors;
  std::map<AttributeKind, CnfModel> mappers;
};

// Fresh bundle for a world: generates the mixing matrix and the hash.
ModelBundle make_bundle(const WorldConfig& world);

// Directory layout: manifest.json plus one binary file per component.
void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

bool bundle_exists(const std::string& dir);

}  // namespace impflow
