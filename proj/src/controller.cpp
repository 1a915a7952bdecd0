#include "autofield/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "autofield/error.hpp"
#include "autofield/ops.hpp"

namespace autofield {

const char* gate_mode_name(GateMode mode) {
  return mode == GateMode::gumbel ? "gumbel" : "plain_softmax";
}

std::vector<double> sample_gumbel(Rng::Engine& engine, std::size_t count) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> out(count);
  for (double& g : out) {
    double u = uniform01(engine);
    u = std::min(std::max(u, eps), 1.0 - eps);
    g = -std::log(-std::log(u));
  }
  return out;
}

Controller::Controller(std::size_t n_fields, GateMode mode)
    : n_fields_(n_fields), mode_(mode) {
  if (n_fields == 0) throw ConfigError("controller: need at least one field");
  logits_ = params_.add("gate_logits", Matrix(n_fields, 2));  // zeros: 0.5/0.5
}

std::vector<double> Controller::keep_probability() const {
  const Matrix& logits = params_[logits_].value;
  std::vector<double> alpha(n_fields_);
  for (std::size_t n = 0; n < n_fields_; ++n) {
    // softmax over a pair collapses to a logistic of the logit difference
    alpha[n] = sigmoid_scalar(logits(n, 0) - logits(n, 1));
  }
  return alpha;
}

GateSample Controller::sample_gates(double tau, Rng::Engine& engine) const {
  if (!(tau > 0.0)) throw ContractViolation("gate sampling needs tau > 0");
  if (mode_ == GateMode::plain_softmax) {
    GateSample sample = expectation_gates();
    sample.tau = tau;  // recorded for the trace; plain-mode gradients ignore it
    return sample;
  }

  const Matrix& logits = params_[logits_].value;
  GateSample sample;
  sample.mode = GateMode::gumbel;
  sample.tau = tau;
  sample.gumbel_keep = sample_gumbel(engine, n_fields_);
  sample.gumbel_drop = sample_gumbel(engine, n_fields_);
  sample.keep_prob.resize(n_fields_);
  sample.drop_prob.resize(n_fields_);
  for (std::size_t n = 0; n < n_fields_; ++n) {
    // log alpha_keep - log alpha_drop equals the raw logit difference, so the
    // relaxation is a logistic of (logit gap + noise gap) / tau.
    const double gap = (logits(n, 0) - logits(n, 1)) +
                       (sample.gumbel_keep[n] - sample.gumbel_drop[n]);
    sample.keep_prob[n] = sigmoid_scalar(gap / tau);
    sample.drop_prob[n] = 1.0 - sample.keep_prob[n];
  }
  return sample;
}

GateSample Controller::expectation_gates() const {
  GateSample sample;
  sample.mode = GateMode::plain_softmax;
  sample.tau = 1.0;
  sample.keep_prob = keep_probability();
  sample.drop_prob.resize(n_fields_);
  for (std::size_t n = 0; n < n_fields_; ++n) {
    sample.drop_prob[n] = 1.0 - sample.keep_prob[n];
  }
  return sample;
}

void Controller::accumulate_gate_gradients(const GateSample& sample,
                                           std::span<const double> dgates) {
  if (sample.keep_prob.size() != n_fields_ || dgates.size() != n_fields_) {
    throw ContractViolation("controller: gate gradient length mismatch");
  }
  Matrix& grad = params_[logits_].grad;
  const double inv_tau = sample.mode == GateMode::gumbel ? 1.0 / sample.tau : 1.0;
  for (std::size_t n = 0; n < n_fields_; ++n) {
    // d gate / d keep_logit = p1 * p0 / tau (gumbel) or alpha1 * alpha0
    // (plain); drop logit gets the negative.
    const double local = sample.keep_prob[n] * sample.drop_prob[n] * inv_tau;
    grad(n, 0) += dgates[n] * local;
    grad(n, 1) -= dgates[n] * local;
  }
}

std::vector<std::size_t> Controller::select_top_k(std::size_t k) const {
  if (k < 1 || k > n_fields_) {
    throw ConfigError("select_top_k: K must lie in [1, " + std::to_string(n_fields_) + "]");
  }
  const std::vector<double> alpha = keep_probability();
  std::vector<std::size_t> order(n_fields_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (alpha[a] != alpha[b]) return alpha[a] > alpha[b];
    return a < b;  // ties break toward the lower field index
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> Controller::select_by_threshold() const {
  const std::vector<double> alpha = keep_probability();
  std::vector<std::size_t> selected;
  for (std::size_t n = 0; n < n_fields_; ++n) {
    if (alpha[n] > 0.5) selected.push_back(n);
  }
  return selected;
}

}  // namespace autofield
