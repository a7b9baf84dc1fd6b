#pragma once

#include <cstdint>
#include <vector>

#include "impflow/types.hpp"

namespace impflow {

// Gate-bias conditioning layer: f(x, c) = (W x + b) .* sigmoid(Wg c + bg)
// + Wc c. The context c never multiplies the state directly, so the layer is
// affine in x for a fixed context.
struct ConcatSquashLayer {
  Mat w;   // out x in
  Vec b;   // out
  Mat wg;  // out x 2
  Vec bg;  // out
  Mat wc;  // out x 2

  int in_dim() const { return static_cast<int>(w.cols()); }
  int out_dim() const { return static_cast<int>(w.rows()); }
};

Vec concat_squash_apply(const ConcatSquashLayer& layer, const Vec& x,
                        const MappingContext& ctx);

struct SolverConfig {
  int steps = 16;           // fixed-step RK4 per block
  double tolerance = 1e-3;  // advertised round-trip accuracy
};

struct FlowArchitecture {
  int latent_dim = 12;
  int num_blocks = 4;
  int hidden_width = 24;
  int layers_per_block = 3;
};

// One ODE velocity field: a stack of conditioning layers with tanh between
// them (none after the last).
struct CnfBlock {
  std::vector<ConcatSquashLayer> layers;

  Vec dynamics(const Vec& w, const MappingContext& ctx) const;
};

struct CnfModel {
  FlowArchitecture arch;
  AttributeKind attribute = AttributeKind::kTrustworthiness;
  SolverConfig solver;
  std::vector<CnfBlock> blocks;
};

CnfModel init_cnf_model(const FlowArchitecture& arch, AttributeKind attribute,
                        uint64_t seed, const SolverConfig& solver = {});

// Velocity of one block at (w, ctx); block_index selects the block.
Vec dynamics_eval(const CnfModel& model, int block_index, const Vec& w,
                  const MappingContext& ctx);

// Flat parameter vector in a fixed order (blocks, then layers, then
// w row-major / b / wg row-major / bg / wc row-major). Used by the optimizer
// and by finite-difference checks.
int parameter_count(const CnfModel& model);
Vec get_parameters(const CnfModel& model);
void set_parameters(CnfModel& model, const Vec& theta);

}  // namespace impflow
