#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "softad/rng.hpp"
#include "softad/tensor.hpp"

namespace softad {

enum class LossKind { kCrossEntropy, kSquaredError };

LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

/// Inputs (n x input_dim) with one class index per row.
struct LabeledBatch {
  Tensor inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 2;

  std::size_t size() const { return labels.size(); }
  std::size_t input_dim() const { return inputs.cols(); }

  /// Throws if empty, if the row count and label count disagree, if a label is
  /// out of range, or if any input is non-finite.
  void validate() const;

  /// Rows picked by index, in the order given.
  LabeledBatch subset(std::span<const std::size_t> indices) const;
};

/// Fully-connected ReLU network.
///
/// Parameters live in one flat vector. Layer l holds a weight matrix of shape
/// (out x in), row-major, followed by its bias of length out. No activation
/// is applied after the last layer.
class MlpModel {
 public:
  MlpModel() = default;
  /// Zero parameters.
  explicit MlpModel(std::vector<std::size_t> layer_dims);
  MlpModel(std::vector<std::size_t> layer_dims, Tensor parameters);

  /// Uniform(-limit, limit) weights with limit = sqrt(6 / (fan_in + fan_out)),
  /// zero biases.
  static MlpModel initialize(std::vector<std::size_t> layer_dims, Rng& rng);

  static std::size_t parameter_count(std::span<const std::size_t> layer_dims);

  const std::vector<std::size_t>& layer_dims() const { return layer_dims_; }
  std::size_t num_layers() const { return layer_dims_.size() - 1; }
  std::size_t input_dim() const { return layer_dims_.front(); }
  std::size_t output_dim() const { return layer_dims_.back(); }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;

  const Tensor& parameters() const { return params_; }
  Tensor flatten() const { return params_; }
  static MlpModel unflatten(std::vector<std::size_t> layer_dims, const Tensor& flat);
  void set_parameters(const Tensor& flat);

 private:
  std::size_t weight_offset(std::size_t layer) const;

  std::vector<std::size_t> layer_dims_;
  Tensor params_;
};

/// Logits, n x output_dim.
Tensor mlp_forward(const MlpModel& model, const Tensor& inputs);
Tensor mlp_forward(std::span<const std::size_t> layer_dims, std::span<const double> params,
                   const Tensor& inputs);

/// Smallest |pre-activation| over every hidden unit and input row. Finite
/// difference checks are only meaningful when this is well above the step.
double mlp_min_abs_preactivation(const MlpModel& model, const Tensor& inputs);

struct PerExampleResult {
  std::vector<double> losses;
  Tensor grads;  // n x d
};

struct MeanResult {
  double loss = 0.0;
  Tensor grad;  // d
};

PerExampleResult per_example_loss_and_grad(const MlpModel& model, const LabeledBatch& batch,
                                           LossKind loss);

std::vector<double> per_example_loss(std::span<const std::size_t> layer_dims,
                                     std::span<const double> params, const LabeledBatch& batch,
                                     LossKind loss);
PerExampleResult per_example_loss_and_grad(std::span<const std::size_t> layer_dims,
                                           std::span<const double> params,
                                           const LabeledBatch& batch, LossKind loss);
/// Mean loss and its gradient; cheaper than averaging per-example rows.
MeanResult mean_loss_and_grad(std::span<const std::size_t> layer_dims,
                              std::span<const double> params, const LabeledBatch& batch,
                              LossKind loss);

using ScalarFunction = std::function<double(const Tensor&)>;

/// Central differences (f(w + h e_j) - f(w - h e_j)) / (2h) per coordinate.
Tensor finite_diff_grad(const ScalarFunction& f, const Tensor& w, double h);

/// Text checkpoint:
///
///   softad-mlp 1
///   <L+1 layer dims separated by spaces>
///   <parameter count>
///   <one parameter per line, shortest round-trip decimal>
void save_checkpoint(std::ostream& out, const MlpModel& model);
MlpModel load_checkpoint(std::istream& in);

}  // namespace softad
