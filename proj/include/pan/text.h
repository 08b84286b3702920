#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pan {

/// Tweet tokenizer with a small fixed set of normalizations:
///
///   - ASCII letters are lowercased;
///   - http://, https:// and www. links become "<url>";
///   - @mentions become "<user>";
///   - numeric literals (123, 3.14, 1,000) become "<number>";
///   - "#tag" becomes "<hashtag>" followed by "tag";
///   - a character repeated three or more times inside a word is cut to two
///     ("soooo" -> "soo");
///   - every other punctuation character is its own token.
///
/// Apostrophes between word characters stay inside the word ("don't").
/// Bytes >= 0x80 are treated as word characters so UTF-8 text is not split
/// mid-sequence.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  // Rebuilds a vocabulary from its index->token list; the list must start
  // with the PAD and UNK tokens and contain no duplicates.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  // Returns the existing index when the token is already present.
  std::int32_t add(const std::string& token);
  std::int32_t index_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t index) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Keeps every token seen at least min_count times, in order of first
// appearance across the corpus.
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus, int min_count);

struct EncodedSequence {
  std::vector<std::int32_t> indices;
  std::vector<std::uint8_t> mask;
};

// Maps tokens to indices (UNK when absent), truncates to max_len and pads
// with PAD on the right.
EncodedSequence encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                       std::size_t max_len);
std::vector<std::string> decode(const EncodedSequence& seq, const Vocabulary& vocab);

}  // namespace pan
