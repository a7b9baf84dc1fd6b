#include "impflow/util.hpp"

#include "impflow/types.hpp"

namespace impflow {

std::string to_hex(uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

const char* to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::kTrustworthiness:
      return "trustworthiness";
    case AttributeKind::kDominance:
      return "dominance";
    case AttributeKind::kAttractiveness:
      return "attractiveness";
  }
  throw ConfigError("unknown attribute kind");
}

AttributeKind attribute_from_string(const std::string& name) {
  if (name == "trust" || name == "trustworthiness") {
    return AttributeKind::kTrustworthiness;
  }
  if (name == "dominance" || name == "dom") {
    return AttributeKind::kDominance;
  }
  if (name == "attractiveness" || name == "attract") {
    return AttributeKind::kAttractiveness;
  }
  throw ConfigError("unknown attribute: " + name);
}

FaceParams::FaceParams(Vec v) : values(std::move(v)) {
  if (values.size() != param::kCount) {
    throw DimensionError("FaceParams expects 12 entries, got " +
                         std::to_string(values.size()));
  }
}

}  // namespace impflow
