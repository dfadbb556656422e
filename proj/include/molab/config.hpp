#pragma once

// Flat key=value experiment configuration.

#include <cstdint>
#include <string>
#include <string_view>

#include "molab/architectures.hpp"
#include "molab/pde.hpp"
#include "molab/training.hpp"

namespace molab {

struct ExperimentConfig {
  PdeFamily family = PdeFamily::ParametricWave;
  std::string architecture = "mno-s";
  PresetScale scale = PresetScale::Desk;
  SampleMode mode = SampleMode::In;
  std::uint64_t seed = 0;

  int train_alphas = 32;
  int train_ics = 20;
  int test_alphas = 80;
  int test_ics = 50;
  int nx_fine = 512;
  int threads = 1;

  TrainConfig train;

  std::string out_dir = "run";
  std::string train_data = "train.mold";
  std::string test_data = "test.mold";
  std::string model = "model.mola";
  std::string report = "report.csv";

  void validate() const;

  /// Output path resolved against out_dir unless already absolute.
  std::string path(const std::string& file) const;

  /// Every key in a fixed order, one "key=value" per line; round-trips through parse_config.
  std::string canonical() const;
  std::uint64_t hash() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Applies one key=value assignment; line is used in error messages.
void set_config_key(ExperimentConfig& config, std::string_view key, std::string_view value, int line = 0);

std::uint64_t fnv1a64(std::string_view bytes);

std::string_view to_string(PresetScale scale);
PresetScale parse_scale(std::string_view s);

}  // namespace molab
