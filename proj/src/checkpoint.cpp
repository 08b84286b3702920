#include "pan/checkpoint.h"

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include "pan/errors.h"

namespace pan {

namespace {

constexpr std::string_view kMagicStem = "PANCKPT";
constexpr char kVersion = '1';

class Writer {
 public:
  void u32(std::uint32_t v) { little_endian(v, 4); }
  void u64(std::uint64_t v) { little_endian(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  void little_endian(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint32_t u32(const std::string& what) { return static_cast<std::uint32_t>(little_endian(4, what)); }
  std::uint64_t u64(const std::string& what) { return little_endian(8, what); }
  double f64(const std::string& what) { return std::bit_cast<double>(u64(what)); }
  std::string_view bytes(std::uint64_t n, const std::string& what) {
    if (n > remaining()) throw CheckpointError("checkpoint truncated in " + what);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t little_endian(int n, const std::string& what) {
    if (remaining() < static_cast<std::size_t>(n)) throw CheckpointError("checkpoint truncated in " + what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += n;
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagicStem);
  w.bytes(std::string_view(&kVersion, 1));
  const auto records = ckpt.params.named();
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    w.u32(static_cast<std::uint32_t>(r.name.size()));
    w.bytes(r.name);
    const auto& shape = r.tensor.shape();
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) w.u64(d);
    for (double v : r.tensor.values()) w.f64(v);
  }
  std::string vocab;
  for (const auto& tok : ckpt.vocab.tokens()) {
    vocab += tok;
    vocab += '\n';
  }
  w.u64(vocab.size());
  w.bytes(vocab);
  const std::string config = serialize_run_config(ckpt.config);
  w.u64(config.size());
  w.bytes(config);
  w.f64(ckpt.best_val_loss);
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  const auto magic = r.bytes(kMagicStem.size() + 1, "magic");
  if (magic.substr(0, kMagicStem.size()) != kMagicStem) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  if (magic.back() != kVersion) {
    throw CheckpointError("checkpoint format version '" + std::string(1, magic.back()) +
                          "' is not supported (expected '" + std::string(1, kVersion) + "')");
  }
  const auto count = r.u32("record count");
  std::vector<NamedTensor> records;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string where = "record " + std::to_string(i);
    const auto name_len = r.u32(where + " name length");
    std::string name(r.bytes(name_len, where + " name"));
    const std::string label = "record '" + name + "'";
    const auto rank = r.u32(label + " rank");
    if (rank == 0 || rank > 8) throw CheckpointError(label + " has invalid rank " + std::to_string(rank));
    Shape shape;
    std::uint64_t total = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const auto d = r.u64(label + " dims");
      if (d == 0 || total > std::numeric_limits<std::uint64_t>::max() / d) {
        throw CheckpointError(label + " has invalid or overflowing dimensions");
      }
      total *= d;
      shape.push_back(static_cast<std::size_t>(d));
    }
    if (total > r.remaining() / 8) throw CheckpointError("checkpoint truncated in " + label + " values");
    std::vector<double> values(static_cast<std::size_t>(total));
    for (auto& v : values) v = r.f64(label + " values");
    records.push_back({std::move(name), Tensor::from(std::move(shape), std::move(values))});
  }

  const auto vocab_len = r.u64("vocabulary length");
  const auto vocab_block = r.bytes(vocab_len, "vocabulary block");
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < vocab_block.size()) {
    const auto nl = vocab_block.find('\n', start);
    if (nl == std::string_view::npos) throw CheckpointError("vocabulary block is not newline-terminated");
    tokens.emplace_back(vocab_block.substr(start, nl - start));
    start = nl + 1;
  }
  const auto config_len = r.u64("config length");
  const auto config_block = r.bytes(config_len, "config block");
  const double best = r.f64("best validation loss");
  if (r.remaining() != 0) throw CheckpointError("trailing bytes after checkpoint");

  Checkpoint ckpt;
  // Records were read as frozen tensors; from_named restores trainability.
  ckpt.params = ModelParams::from_named(records);
  try {
    ckpt.vocab = Vocabulary::from_tokens(std::move(tokens));
  } catch (const ParseError& e) {
    throw CheckpointError(std::string("vocabulary block: ") + e.what());
  }
  try {
    ckpt.config = parse_run_config(config_block);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("config block: ") + e.what());
  }
  if (ckpt.vocab.size() != ckpt.params.dims().vocab_size) {
    throw CheckpointError("vocabulary size does not match the embedding matrix");
  }
  ckpt.best_val_loss = best;
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace pan
