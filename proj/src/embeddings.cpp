#include "pan/embeddings.h"

#include <charconv>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "pan/errors.h"
#include "pan/random.h"

namespace pan {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool is_integer(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("embedding line " + std::to_string(line_no) + ": bad number '" +
                     std::string(s) + "'");
  }
  return v;
}

}  // namespace

Tensor random_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  if (vocab_size < 2 || dim == 0) throw ConfigError("embedding matrix needs rows and columns");
  std::vector<double> values(vocab_size * dim, 0.0);
  auto rng = make_rng(seed, "embedding");
  std::uniform_real_distribution<double> dist(-0.05, 0.05);
  for (std::size_t i = dim; i < values.size(); ++i) values[i] = dist(rng);
  return Tensor::from({vocab_size, dim}, std::move(values), false);
}

Tensor load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                       std::size_t dim, std::uint64_t seed, EmbeddingLoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file " + path.string());

  Tensor matrix = random_embeddings(vocab.size(), dim, seed);
  auto values = matrix.mutable_values();
  std::vector<std::uint8_t> filled(vocab.size(), 0);
  EmbeddingLoadReport rep;
  rep.vocab_size = vocab.size();

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
      continue;
    }
    ++rep.lines_read;
    if (fields.size() != dim + 1) {
      if (rep.lines_read == 1) {
        throw ConfigError("embedding file " + path.string() + " has " +
                          std::to_string(fields.size() - 1) + "-dimensional vectors, config " +
                          "expects " + std::to_string(dim));
      }
      throw ParseError("embedding line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim + 1) + " fields, found " +
                       std::to_string(fields.size()));
    }
    const std::string word(fields[0]);
    if (!vocab.contains(word)) continue;
    const auto idx = static_cast<std::size_t>(vocab.index_of(word));
    if (idx == static_cast<std::size_t>(Vocabulary::kPad) || filled[idx]) continue;
    for (std::size_t k = 0; k < dim; ++k) values[idx * dim + k] = parse_double(fields[k + 1], line_no);
    filled[idx] = 1;
    ++rep.found;
  }
  if (report) *report = rep;
  return matrix;
}

}  // namespace pan
