#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pan {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

/// Dense row-major array of doubles.
///
/// A Tensor is a cheap handle: copies share the same storage, which is what
/// lets a Tape hold on to operands until backward runs. Values are fixed at
/// construction; only parameter owners (initializers, the optimizer, the
/// checkpoint loader) write through mutable_values(). Gradient buffers exist
/// only for tensors that require a gradient.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool trainable = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool trainable = false);
  static Tensor scalar(double value);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  // 2-D accessors; a rank-1 tensor is treated as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double at(std::size_t i) const { return values()[i]; }
  double at(std::size_t r, std::size_t c) const { return values()[r * cols() + c]; }
  double item() const;

  // A trainable tensor is a parameter leaf: it always owns a gradient buffer.
  bool trainable() const;
  // True for trainable leaves and for any op result that depends on one.
  bool requires_grad() const;

  // Zeros when no buffer has been allocated.
  std::vector<double> grad() const;
  std::span<double> grad_buffer() const;
  void zero_grad();

  // Deep copy with fresh storage; the copy keeps the trainable flag.
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return storage_ == other.storage_; }

  // Used by ops to create results that participate in differentiation.
  static Tensor result(Shape shape, std::vector<double> values, bool requires_grad);

 private:
  struct Storage {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool trainable = false;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> storage_;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Ordered record of differentiable operations.
///
/// Ops append a backward rule as they execute; backward() replays the rules in
/// reverse order. A tape is single-use: once backward has run it is consumed
/// and a second call is a ContractError.
class Tape {
 public:
  void record(std::function<void()> rule);
  void backward(Tensor& loss);
  bool consumed() const { return consumed_; }
  std::size_t size() const { return rules_.size(); }

 private:
  std::vector<std::function<void()>> rules_;
  bool consumed_ = false;
};

}  // namespace pan
