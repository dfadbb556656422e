#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "molab/dataset.hpp"

using namespace molab;

namespace {
std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("molab_ds_" + name)).string();
}

BuildOptions quiet(std::ostream& log) {
  BuildOptions o;
  o.solver.nx_fine = 128;
  o.log = &log;
  return o;
}
}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("split sizes and alpha-major order") {
  std::ostringstream log;
  const auto split = build_split(PdeFamily::KleinGordon, SplitRole::Test, SampleMode::In, 3, 2, 11, quiet(log));
  REQUIRE(split.samples.size() == 6);
  CHECK(split.samples[0].alpha_seed == split.samples[1].alpha_seed);
  CHECK(split.samples[1].alpha_seed != split.samples[2].alpha_seed);
  CHECK(split.samples[2].alpha_seed == alpha_seed_for(11, SplitRole::Test, 1));
  CHECK(split.samples[3].ic_seed == ic_seed_for(11, SplitRole::Test, 1, 1));
  CHECK(split.samples[0].u_sensors.size() == 64);
  CHECK(split.samples[0].alpha.values.size() == 3);
  CHECK_THROWS_AS(build_split(PdeFamily::KleinGordon, SplitRole::Test, SampleMode::In, 0, 2, 11), DomainError);
}

TEST_CASE("one-sample split is self-consistent") {
  std::ostringstream log;
  const auto opt = quiet(log);
  const auto split =
      build_split(PdeFamily::DiffusionReactionAdvection, SplitRole::Train, SampleMode::In, 1, 1, 5, opt);
  REQUIRE(split.samples.size() == 1);
  const auto& s = split.samples[0];
  const auto ic = sample_initial_condition(s.ic_seed);
  CHECK(s.u_sensors == ic.sensors());
  CHECK(s.target == solve(s.alpha, ic, opt.solver));
  CHECK(s.alpha == sample_parameters(PdeFamily::DiffusionReactionAdvection, SampleMode::In, s.alpha_seed));
}

TEST_CASE("train and test roles draw disjoint alphas") {
  for (int a = 0; a < 50; ++a)
    for (int b = 0; b < 50; ++b) CHECK(alpha_seed_for(3, SplitRole::Train, a) != alpha_seed_for(3, SplitRole::Test, b));
}

TEST_CASE("container round-trip and determinism") {
  std::ostringstream log;
  const auto a = build_split(PdeFamily::ParametricWave, SplitRole::Train, SampleMode::In, 2, 2, 9, quiet(log));
  const auto b = build_split(PdeFamily::ParametricWave, SplitRole::Train, SampleMode::In, 2, 2, 9, quiet(log));
  CHECK(encode_dataset(a) == encode_dataset(b));
  const auto path = temp_path("rt.mold");
  write_dataset(a, path);
  CHECK(read_dataset(path) == a);
  std::filesystem::remove(path);

  auto opts = quiet(log);
  opts.threads = 3;
  const auto c = build_split(PdeFamily::ParametricWave, SplitRole::Train, SampleMode::In, 2, 2, 9, opts);
  CHECK(encode_dataset(c) == encode_dataset(a));
}

TEST_CASE("empty split is a valid container") {
  DatasetSplit empty;
  empty.family = PdeFamily::KleinGordon;
  const auto bytes = encode_dataset(empty);
  CHECK(decode_dataset(bytes) == empty);
}

TEST_CASE("corruption is reported") {
  std::ostringstream log;
  const auto split = build_split(PdeFamily::KleinGordon, SplitRole::Train, SampleMode::In, 1, 1, 2, quiet(log));
  const auto good = encode_dataset(split);

  auto bad = good;
  bad[0] ^= 0x20;
  CHECK_THROWS_WITH_AS(decode_dataset(bad), doctest::Contains("bad magic"), FormatError);

  bad = good;
  bad[5] = 9;
  CHECK_THROWS_WITH_AS(decode_dataset(bad), doctest::Contains("unsupported version"), FormatError);

  bad = good;
  bad[bad.size() - 40] ^= 0x01;
  CHECK_THROWS_WITH_AS(decode_dataset(bad), doctest::Contains("checksum mismatch"), FormatError);

  bad.assign(good.begin(), good.end() - 10);
  CHECK_THROWS_WITH_AS(decode_dataset(bad), doctest::Contains("truncated file"), FormatError);

  bad = good;
  bad.push_back(0);
  CHECK_THROWS_WITH_AS(decode_dataset(bad), doctest::Contains("trailing bytes"), FormatError);
}

TEST_CASE("summary lists header fields") {
  std::ostringstream log, out;
  const auto split = build_split(PdeFamily::KleinGordon, SplitRole::Train, SampleMode::Ood, 1, 2, 2, quiet(log));
  print_dataset_summary(split, out);
  CHECK(out.str().find("family: klein-gordon") != std::string::npos);
  CHECK(out.str().find("mode: ood") != std::string::npos);
  CHECK(out.str().find("records: 2") != std::string::npos);
}

}  // TEST_SUITE
