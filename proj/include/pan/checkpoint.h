#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pan/params.h"
#include "pan/run_config.h"
#include "pan/text.h"

namespace pan {

struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
  RunConfig config;
  double best_val_loss = 0.0;
};

/// Binary layout, all integers and floats little-endian:
///
///   "PANCKPT1"                      magic, last byte is the format version
///   u32 record count
///   per record (canonical ModelParams order):
///     u32 name length, name bytes (UTF-8)
///     u32 rank, u64 dims[rank]
///     f64 values[product(dims)]
///   u64 length, vocabulary block (tokens in index order, '\n'-terminated)
///   u64 length, config block (serialize_run_config text)
///   f64 best validation loss
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

// Writes through a temporary file and renames it into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pan
