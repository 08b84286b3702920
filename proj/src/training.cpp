#include "pan/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "pan/errors.h"
#include "pan/ops.h"
#include "pan/random.h"

namespace pan {

void TrainingConfig::validate() const {
  auto rate = [](double v, const char* name) {
    if (!(v >= 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1)");
  };
  rate(dropout_dense, "dropout_dense");
  rate(spatial_dropout, "spatial_dropout");
  rate(lr_init, "lr_init");
  rate(lr_floor, "lr_floor");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (lr_floor > lr_init) throw ConfigError("lr_floor must not exceed lr_init");
  if (lr_halve_patience < 1) throw ConfigError("lr_halve_patience must be at least 1");
  if (early_stop_patience < 1) throw ConfigError("early_stop_patience must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(pos_weight > 0.0)) throw ConfigError("pos_weight must be positive");
  if (!(weight_noise_std >= 0.0)) throw ConfigError("weight_noise_std must be non-negative");
  if (!(l2_coeff >= 0.0)) throw ConfigError("l2_coeff must be non-negative");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must be in (0, 1)");
}

Tensor weighted_bce(const Tensor& probabilities, const Tensor& labels, double pos_weight,
                    Tape* tape) {
  constexpr double kFloor = 1e-12;
  if (probabilities.shape() != labels.shape()) {
    throw DimensionError("weighted_bce: predictions " + to_string(probabilities.shape()) +
                         " vs labels " + to_string(labels.shape()));
  }
  const std::size_t rows = probabilities.rows(), m = probabilities.cols();
  const auto p = probabilities.values();
  const auto y = labels.values();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      throw NumericError("weighted_bce: prediction " + std::to_string(p[i]) + " outside (0, 1)");
    }
    const double pos = std::max(p[i], kFloor);
    const double neg = std::max(1.0 - p[i], kFloor);
    total += pos_weight * y[i] * std::log(pos) + (1.0 - y[i]) * std::log(neg);
  }
  const double scale = -1.0 / (static_cast<double>(m) * static_cast<double>(rows));
  const bool grad = tape && probabilities.requires_grad();
  Tensor result = Tensor::result({1}, {scale * total}, grad);
  if (grad) {
    tape->record([probabilities, labels, result, pos_weight, scale]() mutable {
      const double g = result.grad_buffer()[0];
      const auto p = probabilities.values();
      const auto y = labels.values();
      auto gp = probabilities.grad_buffer();
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double dpos = p[i] > kFloor ? pos_weight * y[i] / p[i] : 0.0;
        const double dneg = 1.0 - p[i] > kFloor ? (1.0 - y[i]) / (1.0 - p[i]) : 0.0;
        gp[i] += g * scale * (dpos - dneg);
      }
    });
  }
  return result;
}

Tensor l2_penalty(const ModelParams& params, double lambda, Tape* tape) {
  if (lambda < 0.0) throw ConfigError("L2 coefficient must be non-negative");
  Tensor total = Tensor::scalar(0.0);
  if (lambda == 0.0) return total;
  for (const auto& w : params.weight_matrices()) {
    total = ops::add(total, ops::sum_squares(w.tensor, tape), tape);
  }
  return ops::affine(total, lambda, 0.0, tape);
}

Adam::Adam(std::vector<NamedTensor> params, AdamSettings settings)
    : params_(std::move(params)), settings_(settings) {
  for (const auto& p : params_) {
    if (!p.tensor.trainable()) throw ContractError("Adam: '" + p.name + "' is not trainable");
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

void Adam::step(double lr) {
  ++t_;
  const double b1 = settings_.beta1, b2 = settings_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto theta = params_[k].tensor.mutable_values();
    const auto g = params_[k].tensor.grad_buffer();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= lr * m_hat / (std::sqrt(v_hat) + settings_.epsilon);
    }
  }
}

void write_log_line(std::ostream& os, const EpochRecord& r) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os.precision(10);
  os << r.epoch << '\t' << r.train_loss << '\t' << r.val_loss << '\t' << r.lr << '\t'
     << r.elapsed_seconds << '\n';
  os.flags(flags);
  os.precision(prec);
}

double lr_schedule_update(ScheduleState& state, double val_loss, double lr,
                          const TrainingConfig& config) {
  if (val_loss < state.best) {
    state.best = val_loss;
    state.consecutive_failures = 0;
    return lr;
  }
  if (++state.consecutive_failures >= config.lr_halve_patience) {
    state.consecutive_failures = 0;
    return std::max(lr / 2.0, config.lr_floor);
  }
  return lr;
}

StopDecision early_stop_check(const TrainingLog& log, int patience) {
  if (log.epochs.empty()) throw ContractError("early_stop_check needs at least one epoch");
  const int since_best = log.epochs.back().epoch - log.best_epoch;
  return since_best >= patience ? StopDecision::stop : StopDecision::keep_going;
}

namespace {

template <typename F>
void for_each_batch(const Dataset& data, std::size_t batch_size, F&& f) {
  std::vector<const Example*> chunk;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(data.size(), begin + batch_size);
    chunk.clear();
    for (std::size_t i = begin; i < end; ++i) chunk.push_back(&data.examples[i]);
    f(begin, make_batch(std::span<const Example* const>(chunk)));
  }
}

}  // namespace

double dataset_loss(const ModelParams& params, const Dataset& data, double pos_weight,
                    std::size_t batch_size) {
  if (data.empty()) throw ContractError("cannot compute the loss of an empty dataset");
  double total = 0.0;
  for_each_batch(data, batch_size, [&](std::size_t, const Batch& batch) {
    const auto out = forward(params, batch, Mode::eval);
    total += weighted_bce(out.probabilities, batch.labels, pos_weight).item() *
             static_cast<double>(batch.size);
  });
  return total / static_cast<double>(data.size());
}

std::vector<double> predict_probabilities(const ModelParams& params, const Dataset& data,
                                          std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(data.size() * params.dims().labels);
  for_each_batch(data, batch_size, [&](std::size_t, const Batch& batch) {
    const auto res = forward(params, batch, Mode::eval);
    const auto v = res.probabilities.values();
    out.insert(out.end(), v.begin(), v.end());
  });
  return out;
}

TrainResult train(const Dataset& train_set, const Dataset& dev_set, const TrainingConfig& config,
                  const ModelParams& init, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty() || dev_set.empty()) {
    throw ContractError("training needs non-empty train and dev sets");
  }
  const auto started = std::chrono::steady_clock::now();

  ModelParams params = init.clone();
  Adam optimizer(params.trainable());
  const auto trainable = params.trainable();

  TrainResult result{params.clone(), {}};
  ScheduleState schedule;
  double lr = config.lr_init;

  std::vector<std::size_t> order(train_set.size());
  std::vector<const Example*> chunk;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto shuffle_rng = make_rng(config.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      chunk.clear();
      for (std::size_t i = begin; i < end; ++i) chunk.push_back(&train_set.examples[order[i]]);
      const Batch batch = make_batch(std::span<const Example* const>(chunk));

      const Regularization reg{config.spatial_dropout, config.dropout_dense,
                               config.weight_noise_std,
                               derive_seed(config.seed, "batch", static_cast<std::uint64_t>(epoch),
                                           batch_index)};
      for (auto p : trainable) p.tensor.zero_grad();
      const std::string where =
          "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index);
      Tape tape;
      Tensor loss;
      try {
        const auto out = forward(params, batch, Mode::train, reg, &tape);
        loss = ops::add(weighted_bce(out.probabilities, batch.labels, config.pos_weight, &tape),
                        l2_penalty(params, config.l2_coeff, &tape), &tape);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at " + where + ": " + e.what());
      }
      if (!std::isfinite(loss.item())) {
        throw NumericError("training diverged: non-finite loss at " + where);
      }
      tape.backward(loss);
      optimizer.step(lr);
      epoch_loss += loss.item() * static_cast<double>(batch.size);
    }

    const double val_loss = dataset_loss(params, dev_set, config.pos_weight, config.batch_size);
    const double next_lr = lr_schedule_update(schedule, val_loss, lr, config);
    if (val_loss < result.log.best_val_loss) {
      result.log.best_val_loss = val_loss;
      result.log.best_epoch = epoch;
      result.best = params.clone();
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = epoch_loss / static_cast<double>(train_set.size());
    record.val_loss = val_loss;
    record.lr = lr;
    record.consecutive_failures = schedule.consecutive_failures;
    record.best_epoch = result.log.best_epoch;
    record.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    lr = next_lr;
    if (early_stop_check(result.log, config.early_stop_patience) == StopDecision::stop) break;
  }
  return result;
}

}  // namespace pan
