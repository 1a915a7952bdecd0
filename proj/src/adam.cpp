#include "autofield/adam.hpp"

#include <cmath>

#include "autofield/error.hpp"

namespace autofield {

void Adam::ensure_state(const ParameterStore& store) {
  if (m_.size() == store.count()) return;
  m_.clear();
  v_.clear();
  for (const auto& t : store) {
    m_.emplace_back(t.value.size(), 0.0);
    v_.emplace_back(t.value.size(), 0.0);
  }
}

void Adam::step(ParameterStore& store) {
  ensure_state(store);
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double bias1 = 1.0 - std::pow(config_.beta1, t);
  const double bias2 = 1.0 - std::pow(config_.beta2, t);

  for (std::size_t i = 0; i < store.count(); ++i) {
    Tensor& tensor = store[i];
    double* value = tensor.value.data();
    const double* grad = tensor.grad.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t j = 0; j < tensor.value.size(); ++j) {
      const double g = grad[j];
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in parameter '" + tensor.name +
                           "' at index " + std::to_string(j));
      }
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g;
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      value[j] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
  store.check_finite();
}

void Adam::restore(std::size_t step_count, std::vector<std::vector<double>> m,
                   std::vector<std::vector<double>> v) {
  step_count_ = step_count;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace autofield
