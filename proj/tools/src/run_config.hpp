#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "dlcf/dataset.hpp"
#include "dlcf/model.hpp"
#include "dlcf/trainer.hpp"

namespace dlcf::cli {

// Everything a training run depends on. Only train_path has no default.
struct RunConfig {
  std::filesystem::path train_path;
  DatasetFormat train_format = DatasetFormat::kSemeval;
  std::filesystem::path test_path;  // optional; evaluated after training
  DatasetFormat test_format = DatasetFormat::kSemeval;
  std::filesystem::path output_dir = "run";
  double holdout_fraction = 0.1;
  std::size_t min_count = 1;

  ModelConfig model;  // vocab_size is filled in from the training data
  TrainConfig train;

  void validate() const;
  // Flat key = value text, fixed key order, absolute paths.
  std::string to_text() const;
};

// Relative paths are resolved against `base_dir`. Unknown keys, bad values
// and missing input files throw ConfigError.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace dlcf::cli
