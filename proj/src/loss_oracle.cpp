#include "softad/loss_oracle.hpp"

#include <stdexcept>

namespace softad {

MeanResult LossOracle::mean(const Tensor& w) const {
  const PerExampleResult per = per_example(w);
  const std::size_t n = per.losses.size();
  MeanResult result;
  result.grad = Tensor::zeros(dimension());
  for (std::size_t i = 0; i < n; ++i) {
    result.loss += per.losses[i];
    const auto row = per.grads.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) result.grad[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(n);
  result.loss *= inv;
  result.grad *= inv;
  return result;
}

double LossOracle::risk(const Tensor& w) const {
  const auto values = losses(w);
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

MlpLossOracle::MlpLossOracle(std::vector<std::size_t> layer_dims, const LabeledBatch& batch,
                             LossKind loss)
    : layer_dims_(std::move(layer_dims)),
      batch_(batch),
      loss_(loss),
      dimension_(MlpModel::parameter_count(layer_dims_)) {
  batch_.validate();
}

void MlpLossOracle::check(const Tensor& w) const {
  if (w.size() != dimension_) throw std::invalid_argument("MlpLossOracle: parameter count mismatch");
}

std::vector<double> MlpLossOracle::losses(const Tensor& w) const {
  check(w);
  return per_example_loss(layer_dims_, w.data(), batch_, loss_);
}

PerExampleResult MlpLossOracle::per_example(const Tensor& w) const {
  check(w);
  return per_example_loss_and_grad(layer_dims_, w.data(), batch_, loss_);
}

MeanResult MlpLossOracle::mean(const Tensor& w) const {
  check(w);
  return mean_loss_and_grad(layer_dims_, w.data(), batch_, loss_);
}

SquaredDistanceOracle::SquaredDistanceOracle(Tensor points, double scale)
    : points_(std::move(points)), scale_(scale) {
  if (points_.rank() != 2 || points_.rows() == 0) {
    throw std::invalid_argument("SquaredDistanceOracle: need a nonempty n x d point matrix");
  }
}

std::vector<double> SquaredDistanceOracle::losses(const Tensor& w) const {
  if (w.size() != dimension()) throw std::invalid_argument("SquaredDistanceOracle: dimension");
  std::vector<double> out(num_examples());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto z = points_.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) acc += (w[j] - z[j]) * (w[j] - z[j]);
    out[i] = scale_ * acc;
  }
  return out;
}

PerExampleResult SquaredDistanceOracle::per_example(const Tensor& w) const {
  PerExampleResult result;
  result.losses = losses(w);
  result.grads = Tensor({num_examples(), dimension()});
  for (std::size_t i = 0; i < num_examples(); ++i) {
    const auto z = points_.row(i);
    auto g = result.grads.row(i);
    for (std::size_t j = 0; j < z.size(); ++j) g[j] = 2.0 * scale_ * (w[j] - z[j]);
  }
  return result;
}

Tensor SquaredDistanceOracle::centroid() const {
  Tensor c = Tensor::zeros(dimension());
  for (std::size_t i = 0; i < num_examples(); ++i) {
    const auto z = points_.row(i);
    for (std::size_t j = 0; j < z.size(); ++j) c[j] += z[j];
  }
  c *= 1.0 / static_cast<double>(num_examples());
  return c;
}

}  // namespace softad
