#pragma once

#include <cstddef>
#include <span>

namespace softad {

/// Pseudo-Huber: sqrt(x^2 + 1) - 1.
double rho(double x);

/// Derivative of rho: x / sqrt(x^2 + 1). Odd, increasing, bounded by 1.
double phi(double x);

/// Three-valued sign with sign(0) = 0.
double sign(double x);

/// -log softmax(logits)[label], via max-shifted log-sum-exp.
double cross_entropy(std::span<const double> logits, std::size_t label);

/// 0.5 * || logits - onehot(label) ||^2
double squared_error(std::span<const double> logits, std::size_t label);

/// Softmax probabilities, max-shifted.
void softmax(std::span<const double> logits, std::span<double> probs);

struct TruncatorParams {
  double theta = 0.0;
  double sigma = 1.0;

  void validate() const;
};

/// A (value, derivative) pair that wraps each per-example loss deviation
/// x = (loss - theta) / sigma. SoftAD uses (rho, phi); iFlood uses (|x|, sign).
struct Truncator {
  double (*value)(double) = nullptr;
  double (*weight)(double) = nullptr;
};

Truncator soft_truncator();
Truncator hard_truncator();

/// Per-example weight phi((loss - theta) / sigma).
double soft_weight(double loss, const TruncatorParams& params);

/// Per-example objective term theta + sigma * rho((loss - theta) / sigma).
double soft_value(double loss, const TruncatorParams& params);

}  // namespace softad
