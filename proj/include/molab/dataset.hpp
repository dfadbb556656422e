#pragma once

// Operator-learning datasets: (alpha encoding, u0 sensors, target field) triples.
//
// Container layout (little-endian), see docs/formats.md:
//   "MOLD1" u32 version
//   u8 family, u8 mode, u8 role
//   u32 n_alpha, u32 n_ic, u64 record count
//   u32 alpha length, u32 u sensors, u32 nt, u32 nx
//   records: u32 payload length, payload, u32 CRC32(payload)
//   payload: u64 alpha_seed, u64 ic_seed, f64 alpha[], f64 u[], f64 target[nt*nx] (time-major)

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "molab/pde.hpp"

namespace molab {

enum class SplitRole : std::uint8_t { Train = 0, Test = 1 };
std::string_view to_string(SplitRole r);
SplitRole parse_role(std::string_view name);

struct OperatorSample {
  AlphaEncoding alpha;
  VectorXd u_sensors;
  SolutionField target;
  std::uint64_t alpha_seed = 0;
  std::uint64_t ic_seed = 0;

  bool operator==(const OperatorSample& o) const {
    return alpha == o.alpha && u_sensors == o.u_sensors && target == o.target && alpha_seed == o.alpha_seed &&
           ic_seed == o.ic_seed;
  }
};

/// Samples are stored alpha-major: index a * n_ic + c.
struct DatasetSplit {
  PdeFamily family = PdeFamily::ConservationLaw;
  SampleMode mode = SampleMode::In;
  SplitRole role = SplitRole::Train;
  int n_alpha = 0;
  int n_ic = 0;
  std::vector<OperatorSample> samples;

  bool operator==(const DatasetSplit&) const = default;
};

struct BuildOptions {
  SolverOptions solver;
  int max_retries = 5;
  int threads = 1;
  std::ostream* log = nullptr;  // retry notes; std::clog when null
};

std::uint64_t alpha_seed_for(std::uint64_t base_seed, SplitRole role, int alpha_index);
std::uint64_t ic_seed_for(std::uint64_t base_seed, SplitRole role, int alpha_index, int ic_index);

DatasetSplit build_split(PdeFamily family, SplitRole role, SampleMode mode, int n_alpha, int n_ic,
                         std::uint64_t base_seed, const BuildOptions& options = {});

std::vector<char> encode_dataset(const DatasetSplit& split);
DatasetSplit decode_dataset(std::span<const char> bytes);
void write_dataset(const DatasetSplit& split, const std::string& path);
DatasetSplit read_dataset(const std::string& path);

/// Header and value statistics, one "key: value" per line.
void print_dataset_summary(const DatasetSplit& split, std::ostream& out);

}  // namespace molab
