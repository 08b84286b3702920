#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "pan/tensor.h"
#include "pan/text.h"

namespace pan {

struct EmbeddingLoadReport {
  std::size_t found = 0;       // vocabulary entries copied from the file
  std::size_t vocab_size = 0;
  std::size_t lines_read = 0;

  double coverage() const {
    return vocab_size ? static_cast<double>(found) / static_cast<double>(vocab_size) : 0.0;
  }
};

// |vocab| x dim frozen matrix: PAD row zero, every other row i.i.d.
// uniform(-0.05, 0.05) from the seed's "embedding" stream.
Tensor random_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

/// Loads pretrained vectors in the text format "word v1 ... vd", one word per
/// line. An optional word2vec-style "count dim" first line is skipped.
/// Vocabulary words present in the file get their vectors verbatim (first
/// occurrence wins); the rest keep the random_embeddings values. A file whose
/// vectors are not `dim` wide is a ConfigError; a later line with a different
/// arity is a ParseError.
Tensor load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                       std::size_t dim, std::uint64_t seed,
                       EmbeddingLoadReport* report = nullptr);

}  // namespace pan
