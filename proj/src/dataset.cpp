#include "pan/dataset.h"

#include <fstream>
#include <sstream>

#include "pan/errors.h"

namespace pan {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::size_t Example::length() const {
  std::size_t n = 0;
  while (n < mask.size() && mask[n]) ++n;
  return n;
}

Dataset parse_semeval_tsv(std::string_view content) {
  constexpr std::size_t kColumns = 2 + kNumEmotions;
  Dataset data;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    const auto line = chomp(content.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (!header_seen) {
      const auto header = split_tabs(line);
      if (header.size() != kColumns || header[0] != "ID" || header[1] != "Tweet") {
        throw ParseError("line 1: expected header 'ID<TAB>Tweet<TAB>' followed by " +
                         std::to_string(kNumEmotions) + " emotion columns");
      }
      for (std::size_t k = 0; k < kNumEmotions; ++k) {
        if (header[2 + k] != kEmotionNames[k]) {
          throw ParseError("line 1: emotion column " + std::to_string(k + 1) + " is '" +
                           std::string(header[2 + k]) + "', expected '" +
                           std::string(kEmotionNames[k]) + "'");
        }
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != kColumns) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(kColumns) + " columns, found " +
                       std::to_string(fields.size()));
    }
    Example ex;
    ex.id = std::string(fields[0]);
    ex.text = std::string(fields[1]);
    for (std::size_t k = 0; k < kNumEmotions; ++k) {
      const auto f = fields[2 + k];
      if (f != "0" && f != "1") {
        throw ParseError("line " + std::to_string(line_no) + ": label '" +
                         std::string(kEmotionNames[k]) + "' is '" + std::string(f) +
                         "', expected 0 or 1");
      }
      ex.labels[k] = f == "1" ? 1 : 0;
    }
    data.examples.push_back(std::move(ex));
  }
  if (!header_seen) throw ParseError("line 1: missing header row");
  return data;
}

Dataset load_semeval_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_semeval_tsv(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::vector<std::string>> tokenize_dataset(const Dataset& data) {
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(data.size());
  for (const auto& ex : data.examples) corpus.push_back(tokenize(ex.text));
  return corpus;
}

void prepare_dataset(Dataset& data, const Vocabulary& vocab, std::size_t max_len) {
  for (auto& ex : data.examples) {
    auto tokens = tokenize(ex.text);
    if (tokens.empty()) tokens.emplace_back(Vocabulary::kUnkToken);
    auto seq = encode(tokens, vocab, max_len);
    ex.indices = std::move(seq.indices);
    ex.mask = std::move(seq.mask);
  }
}

std::array<std::size_t, kNumEmotions> label_supports(const Dataset& data) {
  std::array<std::size_t, kNumEmotions> supports{};
  for (const auto& ex : data.examples)
    for (std::size_t k = 0; k < kNumEmotions; ++k) supports[k] += ex.labels[k];
  return supports;
}

}  // namespace pan
