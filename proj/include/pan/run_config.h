#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "pan/training.h"

namespace pan {

/// Everything a `train` run needs. Read from a flat UTF-8 key=value file;
/// blank lines and lines starting with '#' are ignored, unknown keys are
/// errors. Keys:
///
///   train dev test embeddings checkpoint log           paths
///   batch_size lr_init lr_floor lr_halve_patience pos_weight dropout_dense
///   spatial_dropout weight_noise_std l2_coeff early_stop_patience
///   max_epochs threshold seed                          TrainingConfig
///   max_len min_count embed_dim hidden_size            data and model shape
struct RunConfig {
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  std::filesystem::path embeddings_path;  // empty: random frozen vectors
  std::filesystem::path checkpoint_path = "best.ckpt";
  std::filesystem::path log_path;

  TrainingConfig training;
  std::size_t max_len = 50;
  int min_count = 1;
  std::size_t embed_dim = 300;
  std::size_t hidden_size = 50;

  void validate() const;
};

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical text form: every key in a fixed order, doubles with 17
// significant digits. parse_run_config(serialize_run_config(c)) == c.
std::string serialize_run_config(const RunConfig& config);

// Train and dev files (and test/embeddings when set) must exist.
void check_inputs_exist(const RunConfig& config);

}  // namespace pan
