#include "pan/tensor.h"

#include <sstream>

#include "pan/errors.h"

namespace pan {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + to_string(shape));
  }
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool trainable) {
  check_shape(shape);
  const auto n = element_count(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), trainable);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool trainable) {
  check_shape(shape);
  if (element_count(shape) != values.size()) {
    throw DimensionError("shape " + to_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  Tensor t;
  t.storage_ = std::make_shared<Storage>();
  t.storage_->shape = std::move(shape);
  t.storage_->values = std::move(values);
  t.storage_->trainable = trainable;
  t.storage_->requires_grad = trainable;
  if (trainable) t.storage_->grad.assign(t.storage_->values.size(), 0.0);
  return t;
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::result(Shape shape, std::vector<double> values, bool requires_grad) {
  Tensor t = from(std::move(shape), std::move(values), false);
  t.storage_->requires_grad = requires_grad;
  if (requires_grad) t.storage_->grad.assign(t.storage_->values.size(), 0.0);
  return t;
}

const Shape& Tensor::shape() const {
  if (!storage_) throw ContractError("use of an undefined tensor");
  return storage_->shape;
}

std::size_t Tensor::size() const { return values().size(); }

std::size_t Tensor::rows() const {
  const auto& s = shape();
  if (s.size() == 1) return 1;
  if (s.size() != 2) throw DimensionError("expected a matrix, got " + to_string(s));
  return s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = shape();
  if (s.size() == 1) return s[0];
  if (s.size() != 2) throw DimensionError("expected a matrix, got " + to_string(s));
  return s[1];
}

std::span<const double> Tensor::values() const {
  if (!storage_) throw ContractError("use of an undefined tensor");
  return storage_->values;
}

std::span<double> Tensor::mutable_values() {
  if (!storage_) throw ContractError("use of an undefined tensor");
  return storage_->values;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on non-scalar tensor " + to_string(shape()));
  return storage_->values[0];
}

bool Tensor::trainable() const { return storage_ && storage_->trainable; }

bool Tensor::requires_grad() const { return storage_ && storage_->requires_grad; }

std::vector<double> Tensor::grad() const {
  if (!storage_) throw ContractError("use of an undefined tensor");
  if (storage_->grad.empty()) return std::vector<double>(storage_->values.size(), 0.0);
  return storage_->grad;
}

std::span<double> Tensor::grad_buffer() const {
  if (!requires_grad()) throw ContractError("tensor does not track gradients");
  return storage_->grad;
}

void Tensor::zero_grad() {
  if (storage_) std::fill(storage_->grad.begin(), storage_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  return from(shape(), storage_->values, storage_->trainable);
}

void Tape::record(std::function<void()> rule) {
  if (consumed_) throw ContractError("cannot record onto a consumed tape");
  rules_.push_back(std::move(rule));
}

void Tape::backward(Tensor& loss) {
  if (consumed_) throw ContractError("tape already consumed by a previous backward pass");
  if (loss.size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " + to_string(loss.shape()));
  }
  consumed_ = true;
  if (!loss.requires_grad()) {
    rules_.clear();
    return;
  }
  loss.grad_buffer()[0] += 1.0;
  for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) (*it)();
  rules_.clear();
}

}  // namespace pan
