#include "autofield/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "autofield/error.hpp"

namespace autofield {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix affine_forward(const Matrix& input, const Matrix& weights, const Matrix& bias) {
  require(input.cols() == weights.rows(),
          "affine_forward: input " + shape(input) + " vs weights " + shape(weights));
  require(bias.rows() == 1 && bias.cols() == weights.cols(),
          "affine_forward: bias " + shape(bias) + " vs weights " + shape(weights));

  const std::size_t b_n = input.rows(), p = input.cols(), q = weights.cols();
  Matrix out(b_n, q);
  for (std::size_t b = 0; b < b_n; ++b) {
    double* out_row = out.data() + b * q;
    const double* in_row = input.data() + b * p;
    for (std::size_t j = 0; j < q; ++j) out_row[j] = bias(0, j);
    for (std::size_t k = 0; k < p; ++k) {
      const double x = in_row[k];
      if (x == 0.0) continue;
      const double* w_row = weights.data() + k * q;
      for (std::size_t j = 0; j < q; ++j) out_row[j] += x * w_row[j];
    }
  }
  return out;
}

Matrix affine_backward(const Matrix& input, const Matrix& weights, const Matrix& upstream,
                       Matrix& dweights, Matrix& dbias) {
  require(upstream.rows() == input.rows() && upstream.cols() == weights.cols(),
          "affine_backward: upstream " + shape(upstream) + " vs input " + shape(input) +
              ", weights " + shape(weights));
  require(dweights.same_shape(weights), "affine_backward: dweights shape mismatch");
  require(dbias.rows() == 1 && dbias.cols() == weights.cols(),
          "affine_backward: dbias shape mismatch");

  const std::size_t b_n = input.rows(), p = input.cols(), q = weights.cols();
  Matrix dinput(b_n, p);
  for (std::size_t b = 0; b < b_n; ++b) {
    const double* up_row = upstream.data() + b * q;
    const double* in_row = input.data() + b * p;
    double* din_row = dinput.data() + b * p;
    for (std::size_t j = 0; j < q; ++j) dbias(0, j) += up_row[j];
    for (std::size_t k = 0; k < p; ++k) {
      const double* w_row = weights.data() + k * q;
      double* dw_row = dweights.data() + k * q;
      const double x = in_row[k];
      double acc = 0.0;
      for (std::size_t j = 0; j < q; ++j) {
        acc += up_row[j] * w_row[j];
        dw_row[j] += x * up_row[j];
      }
      din_row[k] = acc;
    }
  }
  return dinput;
}

Matrix relu_forward(const Matrix& pre) {
  Matrix out(pre.rows(), pre.cols());
  const double* in = pre.data();
  double* o = out.data();
  for (std::size_t i = 0; i < pre.size(); ++i) o[i] = in[i] > 0.0 ? in[i] : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& pre, const Matrix& upstream) {
  require(pre.same_shape(upstream), "relu_backward: shape mismatch");
  Matrix out(pre.rows(), pre.cols());
  const double* p = pre.data();
  const double* up = upstream.data();
  double* o = out.data();
  for (std::size_t i = 0; i < pre.size(); ++i) o[i] = p[i] > 0.0 ? up[i] : 0.0;
  return out;
}

double sigmoid_scalar(double logit) {
  double p;
  if (logit >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-logit));
  } else {
    const double e = std::exp(logit);
    p = e / (1.0 + e);
  }
  // exp underflow rounds to exactly 0 or 1 beyond |logit| ~ 745; nudge back
  // inside the open interval so log/log1p consumers stay finite.
  if (p >= 1.0) return std::nextafter(1.0, 0.0);
  if (p <= 0.0) return std::nextafter(0.0, 1.0);
  return p;
}

Matrix sigmoid_forward(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  const double* in = logits.data();
  double* o = out.data();
  for (std::size_t i = 0; i < logits.size(); ++i) o[i] = sigmoid_scalar(in[i]);
  return out;
}

double bce_mean(std::span<const double> predictions, std::span<const std::uint8_t> labels) {
  require(predictions.size() == labels.size(), "bce_mean: prediction/label length mismatch");
  require(!predictions.empty(), "bce_mean: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const std::uint8_t y = labels[i];
    require(y == 0 || y == 1, "bce_mean: label outside {0,1} at position " + std::to_string(i));
    const double p = std::clamp(predictions[i], kBceEpsilon, 1.0 - kBceEpsilon);
    total += y == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(predictions.size());
}

BceResult bce_loss(const Matrix& predictions, std::span<const std::uint8_t> labels) {
  require(predictions.cols() == 1, "bce_loss: predictions must be a column");
  require(predictions.rows() == labels.size(), "bce_loss: prediction/label length mismatch");

  BceResult result;
  result.loss = bce_mean({predictions.data(), predictions.size()}, labels);
  result.dpredictions = Matrix(predictions.rows(), 1);
  const double inv_n = 1.0 / static_cast<double>(predictions.rows());
  for (std::size_t i = 0; i < predictions.rows(); ++i) {
    const double raw = predictions(i, 0);
    if (raw <= kBceEpsilon || raw >= 1.0 - kBceEpsilon) {
      result.dpredictions(i, 0) = 0.0;  // clamp is flat
      continue;
    }
    const double y = static_cast<double>(labels[i]);
    result.dpredictions(i, 0) = (raw - y) / (raw * (1.0 - raw)) * inv_n;
  }
  return result;
}

Matrix dropout_forward(const Matrix& input, double rate, bool training, Rng::Engine& engine,
                       Matrix& mask_out) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
  mask_out = Matrix(input.rows(), input.cols(), 1.0);
  if (!training || rate == 0.0) {
    return input;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix out(input.rows(), input.cols());
  const double* in = input.data();
  double* m = mask_out.data();
  double* o = out.data();
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (uniform01(engine) < rate) {
      m[i] = 0.0;
      o[i] = 0.0;
    } else {
      m[i] = keep_scale;
      o[i] = in[i] * keep_scale;
    }
  }
  return out;
}

Matrix dropout_backward(const Matrix& mask, const Matrix& upstream) {
  require(mask.same_shape(upstream), "dropout_backward: shape mismatch");
  Matrix out(mask.rows(), mask.cols());
  const double* m = mask.data();
  const double* up = upstream.data();
  double* o = out.data();
  for (std::size_t i = 0; i < mask.size(); ++i) o[i] = m[i] * up[i];
  return out;
}

}  // namespace autofield
