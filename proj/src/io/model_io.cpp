#include "impflow/io/model_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include "impflow/util.hpp"

namespace impflow {
namespace {

constexpr char kFlowMagic[8] = {'I', 'M', 'P', 'F', 'L', 'O', 'W', '1'};
constexpr char kRegrMagic[8] = {'I', 'M', 'P', 'R', 'E', 'G', 'R', '1'};
constexpr char kEncdMagic[8] = {'I', 'M', 'P', 'E', 'N', 'C', 'D', '1'};
constexpr char kMixmMagic[8] = {'I', 'M', 'P', 'M', 'I', 'X', 'M', '1'};
constexpr char kTrailer[4] = {'T', 'A', 'I', 'L'};

class Writer {
 public:
  explicit Writer(const std::string& path)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) {
      throw IoError("cannot open " + path + " for writing");
    }
  }

  void bytes(const char* data, size_t n) {
    out_.write(data, static_cast<std::streamsize>(n));
  }
  void u8(uint8_t v) { bytes(reinterpret_cast<const char*>(&v), 1); }
  void u32(uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                 static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    bytes(b, 4);
  }
  void u64(uint64_t v) {
    u32(static_cast<uint32_t>(v));
    u32(static_cast<uint32_t>(v >> 32));
  }
  void f32(double v) { u32(std::bit_cast<uint32_t>(static_cast<float>(v))); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void f32_vec(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      f32(v[i]);
    }
  }

  void finish() {
    bytes(kTrailer, 4);
    out_.flush();
    if (!out_) {
      throw IoError("write failed for " + path_);
    }
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) {
      throw IoError("cannot open " + path);
    }
  }

  void bytes(char* data, size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw IoError("truncated file: " + path_);
    }
  }
  uint8_t u8() {
    char b;
    bytes(&b, 1);
    return static_cast<uint8_t>(b);
  }
  uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
  }
  uint64_t u64() {
    const uint64_t lo = u32();
    return lo | (static_cast<uint64_t>(u32()) << 32);
  }
  double f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Vec f32_vec(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = f32();
    }
    return v;
  }

  void expect_magic(const char (&magic)[8], const char* what) {
    char got[8];
    bytes(got, 8);
    for (int i = 0; i < 8; ++i) {
      if (got[i] != magic[i]) {
        throw IoError(std::string("not a ") + what + " file: " + path_);
      }
    }
  }
  void expect_version(uint32_t expected) {
    const uint32_t got = u32();
    if (got != expected) {
      throw IoError("unsupported format version " + std::to_string(got) +
                    " in " + path_);
    }
  }
  void expect_trailer() {
    char got[4];
    bytes(got, 4);
    for (int i = 0; i < 4; ++i) {
      if (got[i] != kTrailer[i]) {
        throw IoError("corrupt file (bad trailer): " + path_);
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
};

void write_mlp(Writer& w, const Mlp& mlp) {
  w.u32(static_cast<uint32_t>(mlp.num_layers()));
  w.u32(static_cast<uint32_t>(mlp.in_dim()));
  for (const auto& layer : mlp.w) {
    w.u32(static_cast<uint32_t>(layer.rows()));
  }
  w.u8(mlp.sigmoid_output ? 1 : 0);
  const Vec theta = mlp_get_parameters(mlp);
  w.u32(static_cast<uint32_t>(theta.size()));
  w.f32_vec(theta);
}

Mlp read_mlp(Reader& r) {
  const uint32_t nlayers = r.u32();
  if (nlayers == 0 || nlayers > 64) {
    throw IoError("corrupt file (layer count): " + r.path());
  }
  std::vector<int> widths;
  widths.push_back(static_cast<int>(r.u32()));
  for (uint32_t l = 0; l < nlayers; ++l) {
    widths.push_back(static_cast<int>(r.u32()));
  }
  const bool sigmoid = r.u8() != 0;
  Mlp mlp = make_mlp(widths, sigmoid, 0);
  const uint32_t count = r.u32();
  if (count != static_cast<uint32_t>(mlp_parameter_count(mlp))) {
    throw IoError("corrupt file (parameter count): " + r.path());
  }
  mlp_set_parameters(mlp, r.f32_vec(count));
  return mlp;
}

}  // namespace

void save_flow_model(const CnfModel& model, const std::string& path) {
  Writer w(path);
  w.bytes(kFlowMagic, 8);
  w.u32(kFlowFormatVersion);
  w.u32(static_cast<uint32_t>(model.attribute));
  w.u32(static_cast<uint32_t>(model.arch.latent_dim));
  w.u32(static_cast<uint32_t>(model.arch.num_blocks));
  w.u32(static_cast<uint32_t>(model.arch.hidden_width));
  w.u32(static_cast<uint32_t>(model.arch.layers_per_block));
  w.u32(static_cast<uint32_t>(model.solver.steps));
  w.f64(model.solver.tolerance);
  const Vec theta = get_parameters(model);
  w.u32(static_cast<uint32_t>(theta.size()));
  w.f32_vec(theta);
  w.finish();
}

CnfModel load_flow_model(const std::string& path) {
  Reader r(path);
  r.expect_magic(kFlowMagic, "flow model");
  r.expect_version(kFlowFormatVersion);
  const uint32_t attr = r.u32();
  if (attr > 2) {
    throw IoError("corrupt file (attribute tag): " + path);
  }
  FlowArchitecture arch;
  arch.latent_dim = static_cast<int>(r.u32());
  arch.num_blocks = static_cast<int>(r.u32());
  arch.hidden_width = static_cast<int>(r.u32());
  arch.layers_per_block = static_cast<int>(r.u32());
  SolverConfig solver;
  solver.steps = static_cast<int>(r.u32());
  solver.tolerance = r.f64();
  CnfModel model =
      init_cnf_model(arch, static_cast<AttributeKind>(attr), 0, solver);
  const uint32_t count = r.u32();
  if (count != static_cast<uint32_t>(parameter_count(model))) {
    throw IoError("corrupt file (parameter count): " + path);
  }
  set_parameters(model, r.f32_vec(count));
  r.expect_trailer();
  return model;
}

void save_regressor(const RegressorModel& model, const std::string& path) {
  Writer w(path);
  w.bytes(kRegrMagic, 8);
  w.u32(kRegressorFormatVersion);
  w.u32(static_cast<uint32_t>(model.attribute));
  w.u32(static_cast<uint32_t>(model.features.pool_sizes.size()));
  for (int s : model.features.pool_sizes) {
    w.u32(static_cast<uint32_t>(s));
  }
  write_mlp(w, model.mlp);
  w.finish();
}

RegressorModel load_regressor(const std::string& path) {
  Reader r(path);
  r.expect_magic(kRegrMagic, "regressor");
  r.expect_version(kRegressorFormatVersion);
  const uint32_t attr = r.u32();
  if (attr > 2) {
    throw IoError("corrupt file (attribute tag): " + path);
  }
  RegressorModel model;
  model.attribute = static_cast<AttributeKind>(attr);
  const uint32_t npools = r.u32();
  if (npools == 0 || npools > 16) {
    throw IoError("corrupt file (pool count): " + path);
  }
  model.features.pool_sizes.clear();
  for (uint32_t i = 0; i < npools; ++i) {
    model.features.pool_sizes.push_back(static_cast<int>(r.u32()));
  }
  model.mlp = read_mlp(r);
  if (model.mlp.in_dim() != feature_dim(model.features) ||
      model.mlp.out_dim() != 1) {
    throw IoError("corrupt file (shape mismatch): " + path);
  }
  r.expect_trailer();
  return model;
}

void save_encoder(const EncoderModel& model, const std::string& path) {
  Writer w(path);
  w.bytes(kEncdMagic, 8);
  w.u32(kEncoderFormatVersion);
  w.u32(static_cast<uint32_t>(model.image_size));
  w.u32(static_cast<uint32_t>(model.latent_dim));
  w.u32(static_cast<uint32_t>(model.features.pool_sizes.size()));
  for (int s : model.features.pool_sizes) {
    w.u32(static_cast<uint32_t>(s));
  }
  write_mlp(w, model.e1);
  w.u32(static_cast<uint32_t>(model.appearance_channels));
  w.u32(static_cast<uint32_t>(model.appearance_grid));
  w.f32_vec(model.e2_scale);
  w.f32_vec(model.e2_bias);
  write_mlp(w, model.corrector);
  w.u8(model.e1_trained ? 1 : 0);
  w.u8(model.corrector_trained ? 1 : 0);
  w.finish();
}

EncoderModel load_encoder(const std::string& path) {
  Reader r(path);
  r.expect_magic(kEncdMagic, "encoder");
  r.expect_version(kEncoderFormatVersion);
  EncoderModel model;
  model.image_size = static_cast<int>(r.u32());
  model.latent_dim = static_cast<int>(r.u32());
  const uint32_t npools = r.u32();
  if (npools == 0 || npools > 16) {
    throw IoError("corrupt file (pool count): " + path);
  }
  model.features.pool_sizes.clear();
  for (uint32_t i = 0; i < npools; ++i) {
    model.features.pool_sizes.push_back(static_cast<int>(r.u32()));
  }
  model.e1 = read_mlp(r);
  model.appearance_channels = static_cast<int>(r.u32());
  model.appearance_grid = static_cast<int>(r.u32());
  if (model.appearance_channels < 1 || model.appearance_channels > 1024) {
    throw IoError("corrupt file (channel count): " + path);
  }
  model.e2_scale = r.f32_vec(model.appearance_channels);
  model.e2_bias = r.f32_vec(model.appearance_channels);
  model.corrector = read_mlp(r);
  model.e1_trained = r.u8() != 0;
  model.corrector_trained = r.u8() != 0;
  r.expect_trailer();
  if (model.e1.in_dim() != feature_dim(model.features) ||
      model.e1.out_dim() != model.latent_dim) {
    throw IoError("corrupt file (shape mismatch): " + path);
  }
  return model;
}

void save_mixing(const MixingMatrix& mixing, const std::string& path) {
  Writer w(path);
  w.bytes(kMixmMagic, 8);
  w.u32(1);
  w.u64(mixing.seed);
  w.u32(static_cast<uint32_t>(mixing.m.rows()));
  for (Eigen::Index r = 0; r < mixing.m.rows(); ++r) {
    for (Eigen::Index c = 0; c < mixing.m.cols(); ++c) {
      w.f64(mixing.m(r, c));
    }
  }
  w.finish();
}

MixingMatrix load_mixing(const std::string& path) {
  Reader r(path);
  r.expect_magic(kMixmMagic, "mixing matrix");
  r.expect_version(1);
  MixingMatrix mixing;
  mixing.seed = r.u64();
  const uint32_t dim = r.u32();
  if (dim != param::kCount) {
    throw IoError("corrupt file (dimension): " + path);
  }
  mixing.m = Mat(dim, dim);
  for (uint32_t row = 0; row < dim; ++row) {
    for (uint32_t col = 0; col < dim; ++col) {
      mixing.m(row, col) = r.f64();
    }
  }
  r.expect_trailer();
  mixing.inverse = mixing.m.inverse();
  return mixing;
}

}  // namespace impflow
