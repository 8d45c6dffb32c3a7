#include "softad/truncators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softad {

double rho(double x) {
  // sqrt(x^2+1)-1 == x^2 / (sqrt(x^2+1)+1), the latter without cancellation near 0
  const double r = std::hypot(x, 1.0);
  return (x * x) / (r + 1.0);
}

double phi(double x) { return x / std::hypot(x, 1.0); }

double sign(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return -1.0;
  return 0.0;
}

namespace {

double abs_value(double x) { return std::fabs(x); }

void check_label(std::span<const double> logits, std::size_t label) {
  if (logits.empty()) throw std::invalid_argument("empty operand");
  if (label >= logits.size()) throw std::invalid_argument("invalid label");
}

}  // namespace

double cross_entropy(std::span<const double> logits, std::size_t label) {
  check_label(logits, label);
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  return m + std::log(sum) - logits[label];
}

double squared_error(std::span<const double> logits, std::size_t label) {
  check_label(logits, label);
  double acc = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double diff = logits[k] - (k == label ? 1.0 : 0.0);
    acc += diff * diff;
  }
  return 0.5 * acc;
}

void softmax(std::span<const double> logits, std::span<double> probs) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] = std::exp(logits[k] - m);
    sum += probs[k];
  }
  for (std::size_t k = 0; k < logits.size(); ++k) probs[k] /= sum;
}

void TruncatorParams::validate() const {
  if (!std::isfinite(theta)) throw std::invalid_argument("threshold must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
}

Truncator soft_truncator() { return {&rho, &phi}; }

Truncator hard_truncator() { return {&abs_value, &sign}; }

double soft_weight(double loss, const TruncatorParams& params) {
  return phi((loss - params.theta) / params.sigma);
}

double soft_value(double loss, const TruncatorParams& params) {
  return params.theta + params.sigma * rho((loss - params.theta) / params.sigma);
}

}  // namespace softad
