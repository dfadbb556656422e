#include "molab/core/checkpoint.hpp"

#include <fstream>
#include <iterator>
#include <limits>

namespace molab {

namespace io {

std::vector<char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const char> data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace io

namespace {

constexpr std::string_view kMagic = "MOLB1";
constexpr std::uint32_t kUnboundedCount = 0xFFFFFFFFu;

}  // namespace

NetworkClassSpec spec_of(const MlpParameters<double>& params) {
  NetworkClassSpec s;
  s.input_dim = params.input_dim();
  s.output_dim = params.output_dim();
  s.depth = params.depth();
  s.width = 1;
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l)
    s.width = std::max(s.width, static_cast<int>(params.layers[l].weight.rows()));
  return s;
}

void encode_mlp(io::ByteWriter& out, const NetworkClassSpec& spec, const MlpParameters<double>& params) {
  if (params.depth() != spec.depth) throw DimensionError("checkpoint: depth does not match class spec");
  out.bytes(kMagic);
  out.u32(static_cast<std::uint32_t>(spec.input_dim));
  out.u32(static_cast<std::uint32_t>(spec.output_dim));
  out.u32(static_cast<std::uint32_t>(spec.depth));
  out.u32(static_cast<std::uint32_t>(spec.width));
  out.u32(spec.sparsity_budget ? static_cast<std::uint32_t>(*spec.sparsity_budget) : kUnboundedCount);
  out.f64(spec.weight_bound.value_or(std::numeric_limits<double>::infinity()));
  out.f64(spec.output_bound.value_or(std::numeric_limits<double>::infinity()));
  for (const auto& layer : params.layers) {
    out.u32(static_cast<std::uint32_t>(layer.weight.rows()));
    out.u32(static_cast<std::uint32_t>(layer.weight.cols()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out.f64(layer.weight(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out.f64(layer.bias(r));
  }
}

MlpCheckpoint decode_mlp(io::ByteReader& in) {
  if (in.bytes(kMagic.size()) != kMagic) throw FormatError("bad magic in network container");
  MlpCheckpoint ck;
  ck.spec.input_dim = static_cast<int>(in.u32());
  ck.spec.output_dim = static_cast<int>(in.u32());
  ck.spec.depth = static_cast<int>(in.u32());
  ck.spec.width = static_cast<int>(in.u32());
  if (std::uint32_t k = in.u32(); k != kUnboundedCount) ck.spec.sparsity_budget = k;
  if (double kappa = in.f64(); std::isfinite(kappa)) ck.spec.weight_bound = kappa;
  if (double r = in.f64(); std::isfinite(r)) ck.spec.output_bound = r;
  if (ck.spec.depth < 1 || ck.spec.depth > 4096) throw FormatError("implausible network depth");

  int expected_in = ck.spec.input_dim;
  for (int l = 0; l < ck.spec.depth; ++l) {
    const auto rows = static_cast<Eigen::Index>(in.u32());
    const auto cols = static_cast<Eigen::Index>(in.u32());
    if (cols != expected_in) throw FormatError("layer shapes do not chain");
    if (static_cast<std::size_t>(rows * cols + rows) * 8 > in.remaining()) throw FormatError("truncated file");
    DenseLayer<double> layer{MatrixXd(rows, cols), VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = in.f64();
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = in.f64();
    expected_in = static_cast<int>(rows);
    ck.params.layers.push_back(std::move(layer));
  }
  if (expected_in != ck.spec.output_dim) throw FormatError("final layer does not match output dimension");
  return ck;
}

void write_mlp_checkpoint(const std::string& path, const NetworkClassSpec& spec,
                          const MlpParameters<double>& params) {
  io::ByteWriter w;
  encode_mlp(w, spec, params);
  io::write_file(path, w.data());
}

MlpCheckpoint read_mlp_checkpoint(const std::string& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes);
  auto ck = decode_mlp(r);
  if (r.remaining() != 0) throw FormatError("trailing bytes after network container");
  return ck;
}

}  // namespace molab
