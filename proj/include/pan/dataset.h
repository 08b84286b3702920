#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pan/text.h"

namespace pan {

inline constexpr std::size_t kNumEmotions = 11;

// Canonical label order; also the column order of the E-c TSV files.
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "anger", "anticipation", "disgust", "fear",     "joy",  "love",
    "optimism", "pessimism", "sadness", "surprise", "trust"};

using LabelVector = std::array<std::uint8_t, kNumEmotions>;

struct Example {
  std::string id;
  std::string text;
  LabelVector labels{};
  // Filled by prepare_dataset: padded to max_len, mask is a prefix of 1s.
  std::vector<std::int32_t> indices;
  std::vector<std::uint8_t> mask;

  std::size_t length() const;
};

struct Dataset {
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

/// Reads a tab-separated E-c file: a header "ID\tTweet\t<11 emotions>" in
/// canonical order, then one row per tweet with 0/1 labels. Row order is
/// preserved. Errors name the 1-based line number.
Dataset load_semeval_tsv(const std::filesystem::path& path);
Dataset parse_semeval_tsv(std::string_view content);

std::vector<std::vector<std::string>> tokenize_dataset(const Dataset& data);

// Tokenizes and encodes every example. A tweet with no tokens is encoded as
// a single UNK so every example has at least one valid position.
void prepare_dataset(Dataset& data, const Vocabulary& vocab, std::size_t max_len);

// Positive-label count per emotion.
std::array<std::size_t, kNumEmotions> label_supports(const Dataset& data);

}  // namespace pan
