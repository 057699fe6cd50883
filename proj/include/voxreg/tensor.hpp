// Minimal reverse-mode automatic differentiation over dense double tensors.
// Operations append backward closures to a Tape in forward order; backward()
// replays them in reverse. Recording order is the evaluation order, so a
// fixed graph construction yields bitwise-identical results run to run.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace voxreg {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;  // same length as value when requires_grad
  bool requires_grad = false;

  std::int64_t size() const {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline TensorPtr make_tensor(std::vector<int> shape, bool requires_grad = false) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->requires_grad = requires_grad;
  t->value.assign(static_cast<std::size_t>(t->size()), 0.0);
  if (requires_grad) t->grad.assign(t->value.size(), 0.0);
  return t;
}

inline TensorPtr make_leaf(std::vector<int> shape, std::vector<double> values, bool requires_grad = false) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->requires_grad = requires_grad;
  if (static_cast<std::int64_t>(values.size()) != t->size()) {
    throw std::invalid_argument("make_leaf: value length does not match shape");
  }
  t->value = std::move(values);
  if (requires_grad) t->grad.assign(t->value.size(), 0.0);
  return t;
}

inline void zero_grad(const TensorPtr& t) {
  if (t->requires_grad) std::fill(t->grad.begin(), t->grad.end(), 0.0);
}

class Tape {
 public:
  void record(std::function<void()> step) { steps_.push_back(std::move(step)); }

  // Seeds d(loss)/d(loss) = 1 and replays the recorded steps in reverse.
  // Every tracked ancestor accumulates its gradient exactly once per call.
  void backward(const TensorPtr& loss) {
    if (loss->size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    if (!loss->requires_grad) throw std::invalid_argument("backward: loss does not require grad");
    loss->grad[0] = 1.0;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  }

  std::size_t num_steps() const { return steps_.size(); }
  void clear() { steps_.clear(); }

 private:
  std::vector<std::function<void()>> steps_;
};

}  // namespace voxreg
