#include "impflow/io/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

namespace impflow {

void write_pgm(const ImageGrid& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("write_pgm: cannot open " + path);
  }
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> row(image.width);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      double v = std::clamp(image.at(r, c), 0.0, 1.0);
      row[c] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) {
    throw IoError("write_pgm: short write to " + path);
  }
}

ImageGrid read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("read_pgm: cannot open " + path);
  }
  std::string magic;
  in >> magic;
  if (magic != "P5") {
    throw IoError("read_pgm: not a binary PGM: " + path);
  }
  int width = 0, height = 0, maxval = 0;
  in >> width >> height >> maxval;
  if (!in || width <= 0 || height <= 0 || maxval != 255) {
    throw IoError("read_pgm: bad header in " + path);
  }
  in.get();  // single whitespace after maxval

  ImageGrid image(height, width);
  std::vector<unsigned char> buf(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw IoError("read_pgm: truncated pixel data in " + path);
  }
  for (size_t i = 0; i < buf.size(); ++i) {
    image.pixels[i] = buf[i] / 255.0;
  }
  return image;
}

}  // namespace impflow
