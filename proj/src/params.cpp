#include "pan/params.h"

#include <cmath>
#include <map>
#include <random>

#include "pan/errors.h"
#include "pan/random.h"

namespace pan {

namespace {

bool is_weight_name(const std::string& name) {
  const auto dot = name.rfind('.');
  const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
  return leaf.rfind("W_", 0) == 0 || leaf == "w_a";
}

}  // namespace

GruDirectionParams GruDirectionParams::zeros(std::size_t input, std::size_t hidden) {
  GruDirectionParams p;
  p.W_ir = Tensor::zeros({input, hidden}, true);
  p.W_iz = Tensor::zeros({input, hidden}, true);
  p.W_in = Tensor::zeros({input, hidden}, true);
  p.W_hr = Tensor::zeros({hidden, hidden}, true);
  p.W_hz = Tensor::zeros({hidden, hidden}, true);
  p.W_hn = Tensor::zeros({hidden, hidden}, true);
  p.b_ir = Tensor::zeros({hidden}, true);
  p.b_iz = Tensor::zeros({hidden}, true);
  p.b_in = Tensor::zeros({hidden}, true);
  p.b_hr = Tensor::zeros({hidden}, true);
  p.b_hz = Tensor::zeros({hidden}, true);
  p.b_hn = Tensor::zeros({hidden}, true);
  return p;
}

AttentionParams AttentionParams::zeros(std::size_t width) {
  return {Tensor::zeros({width, 1}, true), Tensor::zeros({1}, true)};
}

ModelParams ModelParams::zeros(Tensor embedding, std::size_t hidden, std::size_t labels) {
  if (embedding.rank() != 2) throw DimensionError("embedding must be a matrix");
  if (embedding.trainable()) throw ContractError("embedding matrix must be frozen");
  if (hidden == 0 || labels == 0) throw DimensionError("hidden size and label count must be positive");
  ModelParams p;
  p.embedding = std::move(embedding);
  ModelDims d{p.embedding.rows(), p.embedding.cols(), hidden, labels};
  p.gru1_fwd = GruDirectionParams::zeros(d.gru1_input(), hidden);
  p.gru1_bwd = GruDirectionParams::zeros(d.gru1_input(), hidden);
  p.gru2_fwd = GruDirectionParams::zeros(d.gru2_input(), hidden);
  p.gru2_bwd = GruDirectionParams::zeros(d.gru2_input(), hidden);
  p.attn1 = AttentionParams::zeros(d.attention1_width());
  p.attn2 = AttentionParams::zeros(d.attention2_width());
  p.W_d = Tensor::zeros({d.pooled_width(), labels}, true);
  p.b_d = Tensor::zeros({labels}, true);
  return p;
}

ModelParams ModelParams::from_named(const std::vector<NamedTensor>& records) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& r : records) {
    if (!by_name.emplace(r.name, &r.tensor).second) {
      throw CheckpointError("parameter '" + r.name + "' appears more than once");
    }
  }
  auto find = [&](const std::string& name) -> const Tensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CheckpointError("parameter '" + name + "' is missing");
    return *it->second;
  };
  const Tensor& emb = find("embedding");
  const Tensor& w_hr = find("gru1.fwd.W_hr");
  const Tensor& b_d = find("dense.b_d");
  if (emb.rank() != 2 || w_hr.rank() != 2) throw CheckpointError("parameter 'embedding' or 'gru1.fwd.W_hr' is not a matrix");

  ModelParams p = zeros(Tensor::from(emb.shape(), {emb.values().begin(), emb.values().end()}),
                        w_hr.rows(), b_d.size());
  std::size_t used = 0;
  p.for_each([&](const std::string& name, Tensor& t) {
    const Tensor& src = find(name);
    if (src.shape() != t.shape()) {
      throw CheckpointError("parameter '" + name + "' has shape " + to_string(src.shape()) +
                            ", expected " + to_string(t.shape()));
    }
    std::copy(src.values().begin(), src.values().end(), t.mutable_values().begin());
    ++used;
  });
  if (used != records.size()) throw CheckpointError("checkpoint holds unknown parameter records");
  return p;
}

ModelDims ModelParams::dims() const {
  return {embedding.rows(), embedding.cols(), gru1_fwd.hidden_size(), b_d.size()};
}

std::vector<NamedTensor> ModelParams::named() const {
  std::vector<NamedTensor> out;
  ModelParams view = *this;
  view.for_each([&](const std::string& name, Tensor& t) { out.push_back({name, t}); });
  return out;
}

std::vector<NamedTensor> ModelParams::trainable() const {
  auto all = named();
  std::vector<NamedTensor> out;
  for (auto& nt : all)
    if (nt.tensor.trainable()) out.push_back(std::move(nt));
  return out;
}

std::vector<NamedTensor> ModelParams::weight_matrices() const {
  auto all = trainable();
  std::vector<NamedTensor> out;
  for (auto& nt : all)
    if (is_weight_name(nt.name)) out.push_back(std::move(nt));
  return out;
}

ModelParams ModelParams::clone() const {
  ModelParams copy = *this;
  copy.for_each([](const std::string&, Tensor& t) { t = t.clone(); });
  return copy;
}

ModelParams init_params(Tensor embedding, std::size_t hidden, std::uint64_t seed,
                        std::size_t labels) {
  ModelParams p = ModelParams::zeros(std::move(embedding), hidden, labels);
  auto rng = make_rng(seed, "init");
  p.for_each([&](const std::string& name, Tensor& t) {
    if (!t.trainable() || !is_weight_name(name)) return;
    const double fan_in = static_cast<double>(t.rows());
    const double fan_out = static_cast<double>(t.cols());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : t.mutable_values()) v = dist(rng);
  });
  return p;
}

}  // namespace pan
