#include "molab/dataset.hpp"

#include <zlib.h>

#include <atomic>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <thread>

#include "molab/binary_io.hpp"
#include "molab/seeds.hpp"

namespace molab {

std::string_view to_string(SplitRole r) { return r == SplitRole::Train ? "train" : "test"; }

SplitRole parse_role(std::string_view name) {
  if (name == "train") return SplitRole::Train;
  if (name == "test") return SplitRole::Test;
  throw DomainError("unknown split role '" + std::string(name) + "' (expected train or test)");
}

namespace {
constexpr std::uint64_t kRoleTag[2] = {0x7261696E, 0x74657374};
constexpr std::string_view kMagic = "MOLD1";
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc32_of(std::span<const char> data) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}
}  // namespace

std::uint64_t alpha_seed_for(std::uint64_t base_seed, SplitRole role, int alpha_index) {
  return derive_seed(base_seed, {kRoleTag[static_cast<int>(role)], static_cast<std::uint64_t>(alpha_index)});
}

std::uint64_t ic_seed_for(std::uint64_t base_seed, SplitRole role, int alpha_index, int ic_index) {
  return derive_seed(base_seed, {kRoleTag[static_cast<int>(role)], static_cast<std::uint64_t>(alpha_index),
                                 static_cast<std::uint64_t>(ic_index)});
}

DatasetSplit build_split(PdeFamily family, SplitRole role, SampleMode mode, int n_alpha, int n_ic,
                         std::uint64_t base_seed, const BuildOptions& options) {
  if (n_alpha < 1 || n_ic < 1) throw DomainError("n_alpha and n_ic must be >= 1");
  DatasetSplit split;
  split.family = family;
  split.mode = mode;
  split.role = role;
  split.n_alpha = n_alpha;
  split.n_ic = n_ic;
  split.samples.resize(static_cast<std::size_t>(n_alpha) * n_ic);

  std::vector<AlphaEncoding> alphas(n_alpha);
  std::vector<std::uint64_t> alpha_seeds(n_alpha);
  for (int a = 0; a < n_alpha; ++a) {
    alpha_seeds[a] = alpha_seed_for(base_seed, role, a);
    alphas[a] = sample_parameters(family, mode, alpha_seeds[a]);
  }

  std::mutex log_mutex;
  std::ostream& log = options.log ? *options.log : std::clog;
  auto build_one = [&](std::size_t idx) {
    const int a = static_cast<int>(idx / n_ic), c = static_cast<int>(idx % n_ic);
    std::uint64_t ic_seed = ic_seed_for(base_seed, role, a, c);
    for (int attempt = 0;; ++attempt) {
      try {
        const InitialCondition ic = sample_initial_condition(ic_seed);
        OperatorSample& s = split.samples[idx];
        s.alpha = alphas[a];
        s.u_sensors = ic.sensors();
        s.target = solve(alphas[a], ic, options.solver);
        s.alpha_seed = alpha_seeds[a];
        s.ic_seed = ic_seed;
        return;
      } catch (const SolverError& e) {
        if (attempt >= options.max_retries) throw;
        const std::uint64_t bumped = derive_seed(ic_seed, {static_cast<std::uint64_t>(attempt + 1)});
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "sample " << idx << " (alpha " << a << ", ic " << c << "): " << e.what() << "; retrying with ic seed "
            << bumped << '\n';
        ic_seed = bumped;
      }
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < split.samples.size(); ++i) build_one(i);
    return split;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < split.samples.size();) {
        try {
          build_one(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = split.samples.size();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return split;
}

std::vector<char> encode_dataset(const DatasetSplit& split) {
  const int alpha_len = alpha_length(split.family);
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u8(static_cast<std::uint8_t>(split.family));
  w.u8(static_cast<std::uint8_t>(split.mode));
  w.u8(static_cast<std::uint8_t>(split.role));
  w.u32(static_cast<std::uint32_t>(split.n_alpha));
  w.u32(static_cast<std::uint32_t>(split.n_ic));
  w.u64(split.samples.size());
  w.u32(static_cast<std::uint32_t>(alpha_len));
  w.u32(grid::kUSensors);
  w.u32(grid::kEvalNt);
  w.u32(grid::kEvalNx);
  for (const auto& s : split.samples) {
    if (s.alpha.values.size() != alpha_len || s.u_sensors.size() != grid::kUSensors)
      throw DimensionError("sample shapes do not match the split family");
    io::ByteWriter rec;
    rec.u64(s.alpha_seed);
    rec.u64(s.ic_seed);
    rec.f64s({s.alpha.values.data(), static_cast<std::size_t>(s.alpha.values.size())});
    rec.f64s({s.u_sensors.data(), static_cast<std::size_t>(s.u_sensors.size())});
    const VectorXd flat = s.target.flat();
    rec.f64s({flat.data(), static_cast<std::size_t>(flat.size())});
    w.u32(static_cast<std::uint32_t>(rec.size()));
    w.data().insert(w.data().end(), rec.data().begin(), rec.data().end());
    w.u32(crc32_of(rec.data()));
  }
  return std::move(w.data());
}

DatasetSplit decode_dataset(std::span<const char> bytes) {
  io::ByteReader r(bytes);
  if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) throw FormatError("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw FormatError("unsupported version " + std::to_string(version));
  DatasetSplit split;
  const std::uint8_t fam = r.u8(), mode = r.u8(), role = r.u8();
  if (fam > 4 || mode > 1 || role > 1) throw FormatError("invalid header tags");
  split.family = static_cast<PdeFamily>(fam);
  split.mode = static_cast<SampleMode>(mode);
  split.role = static_cast<SplitRole>(role);
  split.n_alpha = static_cast<int>(r.u32());
  split.n_ic = static_cast<int>(r.u32());
  const std::uint64_t count = r.u64();
  const std::uint32_t alpha_len = r.u32(), n_u = r.u32(), nt = r.u32(), nx = r.u32();
  if (alpha_len != static_cast<std::uint32_t>(alpha_length(split.family)) || n_u != grid::kUSensors ||
      nt != grid::kEvalNt || nx != grid::kEvalNx)
    throw FormatError("record dimensions do not match the declared family");
  const std::size_t payload = 16 + 8 * (alpha_len + n_u + static_cast<std::size_t>(nt) * nx);
  if (count > r.remaining() / (payload + 8)) throw FormatError("truncated file");

  split.samples.resize(count);
  VectorXd flat(nt * nx);
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint32_t len = r.u32();
    if (len != payload) throw FormatError("record " + std::to_string(k) + " has unexpected length");
    if (r.remaining() < std::size_t{len} + 4) throw FormatError("truncated file");
    const std::size_t start = r.position();
    io::ByteReader rec(bytes.subspan(start, len));
    r.bytes(len);
    if (crc32_of(bytes.subspan(start, len)) != r.u32())
      throw FormatError("checksum mismatch in record " + std::to_string(k));
    OperatorSample& s = split.samples[k];
    s.alpha_seed = rec.u64();
    s.ic_seed = rec.u64();
    s.alpha.family = split.family;
    s.alpha.values.resize(alpha_len);
    rec.f64s({s.alpha.values.data(), alpha_len});
    s.u_sensors.resize(n_u);
    rec.f64s({s.u_sensors.data(), n_u});
    rec.f64s({flat.data(), static_cast<std::size_t>(flat.size())});
    s.target = SolutionField::from_flat(flat);
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last record");
  return split;
}

void write_dataset(const DatasetSplit& split, const std::string& path) { io::write_file(path, encode_dataset(split)); }

DatasetSplit read_dataset(const std::string& path) {
  const auto bytes = io::read_file(path);
  return decode_dataset(bytes);
}

void print_dataset_summary(const DatasetSplit& split, std::ostream& out) {
  out << "family: " << to_string(split.family) << '\n'
      << "mode: " << to_string(split.mode) << '\n'
      << "role: " << to_string(split.role) << '\n'
      << "n_alpha: " << split.n_alpha << '\n'
      << "n_ic: " << split.n_ic << '\n'
      << "records: " << split.samples.size() << '\n'
      << "alpha_length: " << alpha_length(split.family) << '\n'
      << "grid: " << grid::kEvalNt << "x" << grid::kEvalNx << '\n';
  if (split.samples.empty()) return;
  double amin = INFINITY, amax = -INFINITY, tmin = INFINITY, tmax = -INFINITY, sq = 0;
  std::size_t n = 0;
  for (const auto& s : split.samples) {
    amin = std::min(amin, s.alpha.values.minCoeff());
    amax = std::max(amax, s.alpha.values.maxCoeff());
    tmin = std::min(tmin, s.target.values.minCoeff());
    tmax = std::max(tmax, s.target.values.maxCoeff());
    sq += s.target.values.squaredNorm();
    n += static_cast<std::size_t>(s.target.values.size());
  }
  out << std::setprecision(6) << "alpha_range: [" << amin << ", " << amax << "]\n"
      << "target_range: [" << tmin << ", " << tmax << "]\n"
      << "target_rms: " << std::sqrt(sq / static_cast<double>(n)) << '\n';
}

}  // namespace molab
