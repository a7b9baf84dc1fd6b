#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace impflow {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr uint32_t kFlowFormatVersion = 1;
inline constexpr uint32_t kRegressorFormatVersion = 1;
inline constexpr uint32_t kEncoderFormatVersion = 1;
inline constexpr int kRendererVersion = 1;

// FNV-1a, used for config hashes and golden-image checksums.
inline uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t fnv1a64(const void* data, size_t n) {
  return fnv1a64(std::string_view(static_cast<const char*>(data), n));
}

std::string to_hex(uint64_t value);

}  // namespace impflow
