#include "pan/run_config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pan/errors.h"

namespace pan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': expected an integer, got '" +
                      std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" +
                      std::string(value) + "'");
  }
  return out;
}

std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"train", [](RunConfig& c, auto, auto v) { c.train_path = std::string(v); }},
      {"dev", [](RunConfig& c, auto, auto v) { c.dev_path = std::string(v); }},
      {"test", [](RunConfig& c, auto, auto v) { c.test_path = std::string(v); }},
      {"embeddings", [](RunConfig& c, auto, auto v) { c.embeddings_path = std::string(v); }},
      {"checkpoint", [](RunConfig& c, auto, auto v) { c.checkpoint_path = std::string(v); }},
      {"log", [](RunConfig& c, auto, auto v) { c.log_path = std::string(v); }},
      {"batch_size", [](RunConfig& c, auto k, auto v) { c.training.batch_size = parse_integer<std::size_t>(k, v); }},
      {"lr_init", [](RunConfig& c, auto k, auto v) { c.training.lr_init = parse_real(k, v); }},
      {"lr_floor", [](RunConfig& c, auto k, auto v) { c.training.lr_floor = parse_real(k, v); }},
      {"lr_halve_patience", [](RunConfig& c, auto k, auto v) { c.training.lr_halve_patience = parse_integer<int>(k, v); }},
      {"pos_weight", [](RunConfig& c, auto k, auto v) { c.training.pos_weight = parse_real(k, v); }},
      {"dropout_dense", [](RunConfig& c, auto k, auto v) { c.training.dropout_dense = parse_real(k, v); }},
      {"spatial_dropout", [](RunConfig& c, auto k, auto v) { c.training.spatial_dropout = parse_real(k, v); }},
      {"weight_noise_std", [](RunConfig& c, auto k, auto v) { c.training.weight_noise_std = parse_real(k, v); }},
      {"l2_coeff", [](RunConfig& c, auto k, auto v) { c.training.l2_coeff = parse_real(k, v); }},
      {"early_stop_patience", [](RunConfig& c, auto k, auto v) { c.training.early_stop_patience = parse_integer<int>(k, v); }},
      {"max_epochs", [](RunConfig& c, auto k, auto v) { c.training.max_epochs = parse_integer<int>(k, v); }},
      {"threshold", [](RunConfig& c, auto k, auto v) { c.training.threshold = parse_real(k, v); }},
      {"seed", [](RunConfig& c, auto k, auto v) { c.training.seed = parse_integer<std::uint64_t>(k, v); }},
      {"max_len", [](RunConfig& c, auto k, auto v) { c.max_len = parse_integer<std::size_t>(k, v); }},
      {"min_count", [](RunConfig& c, auto k, auto v) { c.min_count = parse_integer<int>(k, v); }},
      {"embed_dim", [](RunConfig& c, auto k, auto v) { c.embed_dim = parse_integer<std::size_t>(k, v); }},
      {"hidden_size", [](RunConfig& c, auto k, auto v) { c.hidden_size = parse_integer<std::size_t>(k, v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  training.validate();
  if (max_len == 0) throw ConfigError("max_len must be at least 1");
  if (min_count < 1) throw ConfigError("min_count must be at least 1");
  if (embed_dim == 0) throw ConfigError("embed_dim must be positive");
  if (hidden_size == 0) throw ConfigError("hidden_size must be positive");
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    }
    if (!seen.emplace(key).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                        std::string(key) + "'");
    }
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string serialize_run_config(const RunConfig& c) {
  const auto& t = c.training;
  std::ostringstream os;
  os << "train=" << c.train_path.string() << '\n'
     << "dev=" << c.dev_path.string() << '\n'
     << "test=" << c.test_path.string() << '\n'
     << "embeddings=" << c.embeddings_path.string() << '\n'
     << "checkpoint=" << c.checkpoint_path.string() << '\n'
     << "log=" << c.log_path.string() << '\n'
     << "batch_size=" << t.batch_size << '\n'
     << "lr_init=" << real(t.lr_init) << '\n'
     << "lr_floor=" << real(t.lr_floor) << '\n'
     << "lr_halve_patience=" << t.lr_halve_patience << '\n'
     << "pos_weight=" << real(t.pos_weight) << '\n'
     << "dropout_dense=" << real(t.dropout_dense) << '\n'
     << "spatial_dropout=" << real(t.spatial_dropout) << '\n'
     << "weight_noise_std=" << real(t.weight_noise_std) << '\n'
     << "l2_coeff=" << real(t.l2_coeff) << '\n'
     << "early_stop_patience=" << t.early_stop_patience << '\n'
     << "max_epochs=" << t.max_epochs << '\n'
     << "threshold=" << real(t.threshold) << '\n'
     << "seed=" << t.seed << '\n'
     << "max_len=" << c.max_len << '\n'
     << "min_count=" << c.min_count << '\n'
     << "embed_dim=" << c.embed_dim << '\n'
     << "hidden_size=" << c.hidden_size << '\n';
  return os.str();
}

void check_inputs_exist(const RunConfig& config) {
  auto require = [](const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("config is missing the '") + what + "' path");
    if (!std::filesystem::exists(p)) {
      throw IoError(std::string(what) + " file not found: " + p.string());
    }
  };
  require(config.train_path, "train");
  require(config.dev_path, "dev");
  if (!config.test_path.empty()) require(config.test_path, "test");
  if (!config.embeddings_path.empty()) require(config.embeddings_path, "embeddings");
}

}  // namespace pan
