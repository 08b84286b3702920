#include "pan/text.h"

#include <algorithm>

#include "pan/errors.h"

namespace pan {

namespace {

bool is_space(unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_word(unsigned char c) { return is_alpha(c) || is_digit(c) || c == '_' || c >= 0x80; }

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    unsigned char c = static_cast<unsigned char>(text[pos + k]);
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    if (c != static_cast<unsigned char>(prefix[k])) return false;
  }
  return true;
}

// Lowercases ASCII and cuts runs of 3+ identical characters down to 2.
std::string normalize_word(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  std::size_t run = 0;
  for (unsigned char c : word) {
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    if (!out.empty() && static_cast<unsigned char>(out.back()) == c) {
      ++run;
    } else {
      run = 1;
    }
    if (run <= 2) out.push_back(static_cast<char>(c));
  }
  return out;
}

// End of a word starting at pos; apostrophes count only between word chars.
std::size_t scan_word(std::string_view text, std::size_t pos) {
  std::size_t j = pos;
  while (j < text.size()) {
    const auto c = static_cast<unsigned char>(text[j]);
    if (is_word(c)) {
      ++j;
    } else if (c == '\'' && j > pos && j + 1 < text.size() &&
               is_word(static_cast<unsigned char>(text[j + 1]))) {
      ++j;
    } else {
      break;
    }
  }
  return j;
}

// End of a numeric literal at pos, or pos when the run is not a pure number.
std::size_t scan_number(std::string_view text, std::size_t pos) {
  std::size_t j = pos;
  while (j < text.size() && is_digit(static_cast<unsigned char>(text[j]))) ++j;
  while (j + 1 < text.size() && (text[j] == '.' || text[j] == ',') &&
         is_digit(static_cast<unsigned char>(text[j + 1]))) {
    ++j;
    while (j < text.size() && is_digit(static_cast<unsigned char>(text[j]))) ++j;
  }
  if (j < text.size() && is_word(static_cast<unsigned char>(text[j]))) return pos;
  return j;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (starts_with_ci(text, i, "http://") || starts_with_ci(text, i, "https://") ||
        starts_with_ci(text, i, "www.")) {
      while (i < n && !is_space(static_cast<unsigned char>(text[i]))) ++i;
      tokens.emplace_back("<url>");
      continue;
    }
    if ((c == '@' || c == '#') && i + 1 < n && is_word(static_cast<unsigned char>(text[i + 1]))) {
      std::size_t j = i + 1;
      while (j < n && is_word(static_cast<unsigned char>(text[j]))) ++j;
      if (c == '@') {
        tokens.emplace_back("<user>");
      } else {
        tokens.emplace_back("<hashtag>");
        tokens.push_back(normalize_word(text.substr(i + 1, j - i - 1)));
      }
      i = j;
      continue;
    }
    if (is_digit(c)) {
      if (const std::size_t j = scan_number(text, i); j > i) {
        tokens.emplace_back("<number>");
        i = j;
        continue;
      }
    }
    if (is_word(c)) {
      const std::size_t j = scan_word(text, i);
      tokens.push_back(normalize_word(text.substr(i, j - i)));
      i = j;
      continue;
    }
    tokens.emplace_back(1, static_cast<char>(c));
    ++i;
  }
  return tokens;
}

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw ParseError("vocabulary must start with " + std::string(kPadToken) + " and " +
                     std::string(kUnkToken));
  }
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw ParseError("duplicate vocabulary token '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  return v;
}

std::int32_t Vocabulary::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const auto idx = static_cast<std::int32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, idx);
  return idx;
}

std::int32_t Vocabulary::index_of(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return kUnk;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(std::int32_t index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size()) {
    throw LookupError("vocabulary index " + std::to_string(index) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(index)];
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus, int min_count) {
  if (min_count < 1) throw ConfigError("min_count must be at least 1");
  if (corpus.empty()) throw ContractError("cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, int> counts;
  std::vector<std::string> order;
  for (const auto& doc : corpus) {
    for (const auto& tok : doc) {
      if (counts[tok]++ == 0) order.push_back(tok);
    }
  }
  Vocabulary vocab;
  for (const auto& tok : order) {
    if (counts[tok] >= min_count) vocab.add(tok);
  }
  return vocab;
}

EncodedSequence encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                       std::size_t max_len) {
  if (max_len == 0) throw ConfigError("max_len must be at least 1");
  EncodedSequence seq;
  seq.indices.assign(max_len, Vocabulary::kPad);
  seq.mask.assign(max_len, 0);
  const std::size_t n = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < n; ++i) {
    seq.indices[i] = vocab.index_of(tokens[i]);
    seq.mask[i] = 1;
  }
  return seq;
}

std::vector<std::string> decode(const EncodedSequence& seq, const Vocabulary& vocab) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < seq.indices.size() && i < seq.mask.size(); ++i) {
    if (!seq.mask[i]) break;
    tokens.push_back(vocab.token(seq.indices[i]));
  }
  return tokens;
}

}  // namespace pan
