#pragma once

// Binary parameter container.
//
// Layout (all little-endian):
//   "MOLB1"
//   u32 d1, u32 d2, u32 L, u32 p
//   u32 K      (0xFFFFFFFF = unbounded)
//   f64 kappa  (+inf = unbounded)
//   f64 R      (+inf = unbounded)
//   L x { u32 rows, u32 cols, rows*cols f64 weights (row-major), rows f64 biases }

#include <string>

#include "molab/binary_io.hpp"
#include "molab/core/mlp.hpp"

namespace molab {

struct MlpCheckpoint {
  NetworkClassSpec spec;
  MlpParameters<double> params;
};

void encode_mlp(io::ByteWriter& out, const NetworkClassSpec& spec, const MlpParameters<double>& params);
MlpCheckpoint decode_mlp(io::ByteReader& in);

void write_mlp_checkpoint(const std::string& path, const NetworkClassSpec& spec,
                          const MlpParameters<double>& params);
MlpCheckpoint read_mlp_checkpoint(const std::string& path);

/// Smallest class spec (unbounded K, kappa, R) that contains the given parameters.
NetworkClassSpec spec_of(const MlpParameters<double>& params);

}  // namespace molab
