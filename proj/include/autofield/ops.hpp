#pragma once

#include <cstdint>
#include <span>

#include "autofield/matrix.hpp"
#include "autofield/rng.hpp"

namespace autofield {

// Forward/backward pairs for the dense primitives the model needs. Backward
// functions take the saved forward inputs explicitly; gradient accumulation
// targets are passed by reference and added to, never overwritten.

// out[b] = input[b] * weights + bias.  input: B x p, weights: p x q, bias: 1 x q.
Matrix affine_forward(const Matrix& input, const Matrix& weights, const Matrix& bias);

// Accumulates dweights += input^T * upstream and dbias += colsum(upstream);
// returns dinput = upstream * weights^T.
Matrix affine_backward(const Matrix& input, const Matrix& weights, const Matrix& upstream,
                       Matrix& dweights, Matrix& dbias);

Matrix relu_forward(const Matrix& pre);
// Gradient is masked to zero wherever the pre-activation is <= 0.
Matrix relu_backward(const Matrix& pre, const Matrix& upstream);

// Numerically stable logistic; output stays strictly inside (0,1) for any
// finite input representable in double.
Matrix sigmoid_forward(const Matrix& logits);
double sigmoid_scalar(double logit);

// Clamp bound used by the cross-entropy loss and the logloss metric.
inline constexpr double kBceEpsilon = 1e-7;

// Mean negative log-likelihood over the batch, predictions clamped to
// [kBceEpsilon, 1 - kBceEpsilon]. Labels must be exactly 0 or 1.
double bce_mean(std::span<const double> predictions, std::span<const std::uint8_t> labels);

struct BceResult {
  double loss = 0.0;
  Matrix dpredictions;  // B x 1, already divided by batch size
};

// Loss plus gradient with respect to the (unclamped) predictions. The
// gradient is zero where the clamp is active, matching finite differences.
BceResult bce_loss(const Matrix& predictions, std::span<const std::uint8_t> labels);

// Inverted dropout: zero with probability `rate`, scale survivors by
// 1/(1-rate). In evaluation mode the input passes through and the mask is
// all ones. The mask holds the applied scale factor per entry.
Matrix dropout_forward(const Matrix& input, double rate, bool training, Rng::Engine& engine,
                       Matrix& mask_out);
Matrix dropout_backward(const Matrix& mask, const Matrix& upstream);

}  // namespace autofield
