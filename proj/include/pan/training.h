#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "pan/dataset.h"
#include "pan/model.h"
#include "pan/params.h"
#include "pan/tensor.h"

namespace pan {

struct TrainingConfig {
  std::size_t batch_size = 64;
  double lr_init = 0.001;
  double lr_floor = 0.0001;
  int lr_halve_patience = 3;
  double pos_weight = 2.0;
  double dropout_dense = 0.2;
  double spatial_dropout = 0.4;
  double weight_noise_std = 0.1;
  double l2_coeff = 1e-5;
  int early_stop_patience = 10;
  int max_epochs = 50;
  double threshold = 0.5;
  std::uint64_t seed = 0;

  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Weighted binary cross-entropy, averaged over the batch:
///   J = −(1/m) Σ_i ( w·y_i·log ŷ_i + (1 − y_i)·log(1 − ŷ_i) )
/// summed over the m label columns of each row. Log arguments are clamped
/// to at least 1e-12.
Tensor weighted_bce(const Tensor& probabilities, const Tensor& labels, double pos_weight,
                    Tape* tape = nullptr);

// λ · Σ ‖W‖² over ModelParams::weight_matrices().
Tensor l2_penalty(const ModelParams& params, double lambda, Tape* tape = nullptr);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over a fixed list of trainable tensors. step() reads each tensor's
/// gradient buffer and updates its values in place.
class Adam {
 public:
  explicit Adam(std::vector<NamedTensor> params, AdamSettings settings = {});

  void step(double lr);
  std::size_t steps() const { return t_; }
  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

 private:
  std::vector<NamedTensor> params_;
  AdamSettings settings_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // rate used during this epoch
  int consecutive_failures = 0;
  int best_epoch = 0;
  double elapsed_seconds = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
};

// Tab-separated: epoch, train_loss, val_loss, lr, elapsed_seconds.
void write_log_line(std::ostream& os, const EpochRecord& r);

// Plateau state for the learning-rate rule.
struct ScheduleState {
  double best = std::numeric_limits<double>::infinity();
  int consecutive_failures = 0;
};

/// Registers one epoch's validation loss. A failure is a loss not strictly
/// below the best so far; after lr_halve_patience consecutive failures the
/// rate halves (never below lr_floor) and the counter restarts. Returns the
/// rate for the next epoch.
double lr_schedule_update(ScheduleState& state, double val_loss, double lr,
                          const TrainingConfig& config);

enum class StopDecision { keep_going, stop };

// Stop once the last logged epoch is `patience` or more epochs past the best.
StopDecision early_stop_check(const TrainingLog& log, int patience);

// Eval-mode weighted BCE over the whole dataset, mean per example.
double dataset_loss(const ModelParams& params, const Dataset& data, double pos_weight,
                    std::size_t batch_size);

// Eval-mode probabilities, row-major n x labels, in dataset order.
std::vector<double> predict_probabilities(const ModelParams& params, const Dataset& data,
                                          std::size_t batch_size);

struct TrainResult {
  ModelParams best;
  TrainingLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with per-epoch seeded shuffling, train-mode
/// regularizers, Adam, the plateau schedule and early stopping. Returns the
/// parameters from the epoch with the lowest validation loss. Deterministic
/// given (config, data, init). A non-finite batch loss aborts with a
/// NumericError naming the epoch and batch.
TrainResult train(const Dataset& train_set, const Dataset& dev_set, const TrainingConfig& config,
                  const ModelParams& init, const EpochCallback& on_epoch = {});

}  // namespace pan
