#pragma once

#include <cstddef>
#include <vector>

#include "softad/mlp.hpp"
#include "softad/tensor.hpp"

namespace softad {

/// Per-example losses l(w; z_i) and gradients over a fixed sample, evaluated
/// at flat parameters w. Every objective is built on this.
class LossOracle {
 public:
  virtual ~LossOracle() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t num_examples() const = 0;

  virtual std::vector<double> losses(const Tensor& w) const = 0;
  virtual PerExampleResult per_example(const Tensor& w) const = 0;
  /// Empirical risk R_n(w) and its gradient. Default averages per_example.
  virtual MeanResult mean(const Tensor& w) const;

  double risk(const Tensor& w) const;
};

/// MLP on a labeled batch. Holds a reference to the batch.
class MlpLossOracle final : public LossOracle {
 public:
  MlpLossOracle(std::vector<std::size_t> layer_dims, const LabeledBatch& batch, LossKind loss);

  std::size_t dimension() const override { return dimension_; }
  std::size_t num_examples() const override { return batch_.size(); }

  std::vector<double> losses(const Tensor& w) const override;
  PerExampleResult per_example(const Tensor& w) const override;
  MeanResult mean(const Tensor& w) const override;

 private:
  void check(const Tensor& w) const;

  std::vector<std::size_t> layer_dims_;
  const LabeledBatch& batch_;
  LossKind loss_;
  std::size_t dimension_;
};

/// l(w; z) = scale * ||w - z||^2 over a set of points (rows). With scale 1/2
/// and a single zero point this is f(x) = x^2 / 2.
class SquaredDistanceOracle final : public LossOracle {
 public:
  explicit SquaredDistanceOracle(Tensor points, double scale = 1.0);

  std::size_t dimension() const override { return points_.cols(); }
  std::size_t num_examples() const override { return points_.rows(); }

  std::vector<double> losses(const Tensor& w) const override;
  PerExampleResult per_example(const Tensor& w) const override;

  const Tensor& points() const { return points_; }
  Tensor centroid() const;

 private:
  Tensor points_;
  double scale_;
};

}  // namespace softad
