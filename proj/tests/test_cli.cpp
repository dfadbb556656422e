#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <vector>

#include "molab/binary_io.hpp"
#include "molab/pipeline.hpp"

using namespace molab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("molab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny(const fs::path& dir) {
  ExperimentConfig c = parse_config(
      "family = parametric-wave\n"
      "architecture = mno-s\n"
      "train_alphas = 2\ntrain_ics = 2\n"
      "test_alphas = 2\ntest_ics = 3\n"
      "nx_fine = 128\n"
      "epochs = 1\nsteps_per_epoch = 3\n"
      "batch_data = 8\nbatch_task = 2\n"
      "seed = 11\n");
  c.out_dir = dir.string();
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config defaults and parsing") {
  const auto c = parse_config("");
  CHECK(c.train.learning_rate == 1e-4);
  CHECK(c.train.weight_decay == 1e-4);
  CHECK(c.train.grad_clip_norm == 1.0);
  CHECK(c.train.batch_data == 150);
  CHECK(c.train.batch_task == 5);
  CHECK(c.train.scheduler == "cosine");
  CHECK(c.family == PdeFamily::ParametricWave);
  CHECK(c.test_alphas == 80);
  CHECK(c.test_ics == 50);

  const auto d = parse_config("# comment\n\nepochs=2  # trailing\nfamily = dra\nseed=9\n");
  CHECK(d.train.epochs == 2);
  CHECK(d.family == PdeFamily::DiffusionReactionAdvection);
  CHECK(d.seed == 9);
  CHECK(d.train.seed == 9);
}

TEST_CASE("config errors name the line") {
  CHECK_THROWS_WITH_AS(parse_config("epochs=two"), doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("epochs=2\nepochs=3"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("seed=1\nbogus=1"), doctest::Contains("bogus"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign"), ConfigError);
  CHECK_THROWS_AS(parse_config("learning_rate=-1").validate(), DomainError);
  CHECK_THROWS_AS(parse_config("epochs=2.5"), ConfigError);
}

TEST_CASE("canonical form round-trips") {
  ExperimentConfig c = parse_config("family=klein-gordon\nmode=ood\nlearning_rate=0.003\nreport=r.csv\n");
  const auto again = parse_config(c.canonical());
  CHECK(again.canonical() == c.canonical());
  CHECK(again.hash() == c.hash());
  ExperimentConfig t = c;
  t.threads = 4;
  CHECK(t.hash() == c.hash());
  t.seed = 5;
  CHECK(t.hash() != c.hash());
}

TEST_CASE("pipeline is reproducible byte for byte") {
  const fs::path dir = scratch("repeat");
  const char* files[] = {"train.mold", "test.mold", "model.mola", "report.csv", "train.mold.manifest",
                         "test.mold.manifest", "model.mola.manifest", "report.csv.manifest"};
  std::ostringstream out, err;
  REQUIRE(run("pipeline", tiny(dir), out, err) == 0);
  std::vector<std::vector<char>> first;
  for (const char* f : files) {
    REQUIRE(fs::exists(dir / f));
    first.push_back(io::read_file((dir / f).string()));
  }
  fs::remove_all(dir);
  REQUIRE(run("pipeline", tiny(dir), out, err) == 0);
  CHECK(err.str().empty());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CAPTURE(files[i]);
    CHECK(io::read_file((dir / files[i]).string()) == first[i]);
  }
  const auto report = read_report_csv((dir / "report.csv").string());
  CHECK(report.errors.size() == 6);

  std::ostringstream info;
  REQUIRE(run("inspect-data", tiny(dir), info, err) == 0);
  CHECK(info.str().find("family: parametric-wave") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("evaluating on another family fails cleanly") {
  const fs::path dir = scratch("mismatch");
  std::ostringstream out, err;
  ExperimentConfig c = tiny(dir);
  REQUIRE(run("gen-data", c, out, err) == 0);
  REQUIRE(run("train", c, out, err) == 0);
  ExperimentConfig other = c;
  other.family = PdeFamily::KleinGordon;
  other.test_data = "kg.mold";
  REQUIRE(run("gen-data", other, out, err) == 0);
  std::ostringstream err2;
  CHECK(run("eval", other, out, err2) == 1);
  CHECK(err2.str().rfind("error: ", 0) == 0);
  CHECK(err2.str().find("family mismatch") != std::string::npos);
  const std::string msg = err2.str();
  CHECK(std::count(msg.begin(), msg.end(), '\n') == 1);
  fs::remove_all(dir);
}

TEST_CASE("missing input is reported") {
  const fs::path dir = scratch("missing");
  std::ostringstream out, err;
  CHECK(run("eval", tiny(dir), out, err) == 1);
  CHECK(err.str().rfind("error: ", 0) == 0);
  std::ostringstream err2;
  CHECK(run("frobnicate", tiny(dir), out, err2) == 1);
  fs::remove_all(dir);
}

TEST_CASE("scaling command output") {
  std::ostringstream out;
  ScalingArgs args;
  const auto r = run_scaling(args, out);
  CHECK(r.N.value == 4);
  CHECK(out.str().find("64") != std::string::npos);
  args.regime = "multi";
  CHECK_THROWS_AS(run_scaling(args, out), DomainError);
  args.d_W = 1;
  CHECK(run_scaling(args, out).P->value == 6);
  args.regime = "sideways";
  CHECK_THROWS(run_scaling(args, out));
}

}  // TEST_SUITE
