#include "voxreg/adam.hpp"

#include <cmath>

namespace voxreg {

void adam_update(std::vector<double>& values, const std::vector<double>& grads,
                 std::vector<double>& m, std::vector<double>& v, std::int64_t t,
                 double lr, double beta1, double beta2, double eps) {
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = grads[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    values[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

void adam_step(const std::vector<TensorPtr>& params, AdamState& state, const TrainConfig& cfg) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p->value.size(), 0.0);
      state.v.emplace_back(p->value.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state does not match parameter list");
  }
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_update(params[i]->value, params[i]->grad, state.m[i], state.v[i], state.step,
                cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  }
}

void zero_grads(const std::vector<TensorPtr>& params) {
  for (const auto& p : params) zero_grad(p);
}

}  // namespace voxreg
