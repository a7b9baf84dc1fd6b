#pragma once

#include <string>

#include "impflow/types.hpp"

namespace impflow {

// Binary PGM (P5, maxval 255). Intensities are quantized with round-to-nearest
// on write and mapped back to [0, 1] on read.
void write_pgm(const ImageGrid& image, const std::string& path);
ImageGrid read_pgm(const std::string& path);

}  // namespace impflow
