#pragma once

#include <string>

#include "impflow/flow/model.hpp"
#include "impflow/predictor/regressor.hpp"
#include "impflow/world/encoder.hpp"
#include "impflow/world/mixing.hpp"

namespace impflow {

// Versioned little-endian binary formats. Network parameters are stored as
// 32-bit floats (the mixing matrix keeps full doubles so its inverse stays
// sharp); every file ends in a fixed trailer so truncation is detectable.
void save_flow_model(const CnfModel& model, const std::string& path);
CnfModel load_flow_model(const std::string& path);

void save_regressor(const RegressorModel& model, const std::string& path);
RegressorModel load_regressor(const std::string& path);

void save_encoder(const EncoderModel& model, const std::string& path);
EncoderModel load_encoder(const std::string& path);

void save_mixing(const MixingMatrix& mixing, const std::string& path);
MixingMatrix load_mixing(const std::string& path);

}  // namespace impflow
