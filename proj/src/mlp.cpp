#include "softad/mlp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "softad/csv.hpp"
#include "softad/truncators.hpp"

namespace softad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXd>;

void check_dims(std::span<const std::size_t> layer_dims) {
  if (layer_dims.size() < 2) throw std::invalid_argument("MlpModel: need input and output dims");
  for (std::size_t d : layer_dims) {
    if (d == 0) throw std::invalid_argument("MlpModel: layer dims must be positive");
  }
}

// Activations A_0 (inputs) .. A_L (logits). Hidden ones are post-ReLU.
std::vector<RowMatrix> forward_pass(std::span<const std::size_t> dims,
                                    std::span<const double> params, const Tensor& inputs) {
  check_dims(dims);
  if (params.size() != MlpModel::parameter_count(dims)) {
    throw std::invalid_argument("mlp_forward: parameter count mismatch");
  }
  if (inputs.rank() != 2 || inputs.cols() != dims[0]) {
    throw std::invalid_argument("mlp_forward: input width does not match layer_dims[0]");
  }
  const auto n = static_cast<Eigen::Index>(inputs.rows());
  const std::size_t layers = dims.size() - 1;
  std::vector<RowMatrix> acts;
  acts.reserve(layers + 1);
  acts.emplace_back(ConstMatrixMap(inputs.data().data(), n, static_cast<Eigen::Index>(dims[0])));
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    ConstMatrixMap w(params.data() + offset, out, in);
    ConstVectorMap b(params.data() + offset + out * in, out);
    RowMatrix z = acts.back() * w.transpose();
    z.rowwise() += b;
    if (l + 1 < layers) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
    offset += static_cast<std::size_t>(out * in + out);
  }
  return acts;
}

void check_labels(const LabeledBatch& batch, std::size_t num_classes) {
  batch.validate();
  if (batch.num_classes != num_classes) {
    throw std::invalid_argument("batch class count does not match model output width");
  }
}

// Per-example losses and dloss/dlogits (n x K).
std::vector<double> losses_and_logit_grads(const RowMatrix& logits, const LabeledBatch& batch,
                                           LossKind loss, RowMatrix* dlogits) {
  const auto n = logits.rows();
  const auto k = logits.cols();
  std::vector<double> losses(static_cast<std::size_t>(n));
  if (dlogits != nullptr) dlogits->resize(n, k);
  std::vector<double> probs(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::span<const double> row(logits.row(i).data(), static_cast<std::size_t>(k));
    const std::size_t label = batch.labels[static_cast<std::size_t>(i)];
    if (loss == LossKind::kCrossEntropy) {
      losses[static_cast<std::size_t>(i)] = cross_entropy(row, label);
      if (dlogits != nullptr) {
        softmax(row, probs);
        for (Eigen::Index c = 0; c < k; ++c) {
          (*dlogits)(i, c) = probs[static_cast<std::size_t>(c)] -
                             (static_cast<std::size_t>(c) == label ? 1.0 : 0.0);
        }
      }
    } else {
      losses[static_cast<std::size_t>(i)] = squared_error(row, label);
      if (dlogits != nullptr) {
        for (Eigen::Index c = 0; c < k; ++c) {
          (*dlogits)(i, c) = row[static_cast<std::size_t>(c)] -
                             (static_cast<std::size_t>(c) == label ? 1.0 : 0.0);
        }
      }
    }
  }
  return losses;
}

std::vector<std::size_t> layer_offsets(std::span<const std::size_t> dims) {
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    offsets.push_back(offset);
    offset += dims[l] * dims[l + 1] + dims[l + 1];
  }
  return offsets;
}

}  // namespace

LossKind parse_loss_kind(std::string_view name) {
  if (name == "cross_entropy" || name == "ce") return LossKind::kCrossEntropy;
  if (name == "squared_error" || name == "se") return LossKind::kSquaredError;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::kCrossEntropy ? "cross_entropy" : "squared_error";
}

void LabeledBatch::validate() const {
  if (labels.empty()) throw std::invalid_argument("empty batch");
  if (inputs.rank() != 2 || inputs.rows() != labels.size()) {
    throw std::invalid_argument("batch inputs and labels disagree in length");
  }
  for (std::size_t y : labels) {
    if (y >= num_classes) throw std::invalid_argument("invalid label");
  }
  if (!inputs.all_finite()) throw std::invalid_argument("non-finite input");
}

LabeledBatch LabeledBatch::subset(std::span<const std::size_t> indices) const {
  const std::size_t width = inputs.cols();
  std::vector<double> data;
  data.reserve(indices.size() * width);
  std::vector<std::size_t> picked;
  picked.reserve(indices.size());
  for (std::size_t idx : indices) {
    const auto r = inputs.row(idx);
    data.insert(data.end(), r.begin(), r.end());
    picked.push_back(labels.at(idx));
  }
  return {Tensor::matrix(indices.size(), width, std::move(data)), std::move(picked), num_classes};
}

MlpModel::MlpModel(std::vector<std::size_t> layer_dims) : layer_dims_(std::move(layer_dims)) {
  check_dims(layer_dims_);
  params_ = Tensor::zeros(parameter_count(layer_dims_));
}

MlpModel::MlpModel(std::vector<std::size_t> layer_dims, Tensor parameters)
    : layer_dims_(std::move(layer_dims)), params_(std::move(parameters)) {
  check_dims(layer_dims_);
  if (params_.rank() != 1 || params_.size() != parameter_count(layer_dims_)) {
    throw std::invalid_argument("MlpModel: parameter count mismatch");
  }
  if (!params_.all_finite()) throw std::invalid_argument("MlpModel: non-finite parameter");
}

MlpModel MlpModel::initialize(std::vector<std::size_t> layer_dims, Rng& rng) {
  MlpModel model(std::move(layer_dims));
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const double fan_in = static_cast<double>(model.layer_dims_[l]);
    const double fan_out = static_cast<double>(model.layer_dims_[l + 1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : model.weights(l)) w = rng.uniform(-limit, limit);
  }
  return model;
}

std::size_t MlpModel::parameter_count(std::span<const std::size_t> layer_dims) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    count += layer_dims[l] * layer_dims[l + 1] + layer_dims[l + 1];
  }
  return count;
}

std::size_t MlpModel::weight_offset(std::size_t layer) const {
  if (layer >= num_layers()) throw std::out_of_range("MlpModel: layer index");
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    offset += layer_dims_[l] * layer_dims_[l + 1] + layer_dims_[l + 1];
  }
  return offset;
}

std::span<double> MlpModel::weights(std::size_t layer) {
  return params_.data().subspan(weight_offset(layer), layer_dims_[layer] * layer_dims_[layer + 1]);
}

std::span<const double> MlpModel::weights(std::size_t layer) const {
  return params_.data().subspan(weight_offset(layer), layer_dims_[layer] * layer_dims_[layer + 1]);
}

std::span<double> MlpModel::biases(std::size_t layer) {
  const std::size_t w = layer_dims_[layer] * layer_dims_[layer + 1];
  return params_.data().subspan(weight_offset(layer) + w, layer_dims_[layer + 1]);
}

std::span<const double> MlpModel::biases(std::size_t layer) const {
  const std::size_t w = layer_dims_[layer] * layer_dims_[layer + 1];
  return params_.data().subspan(weight_offset(layer) + w, layer_dims_[layer + 1]);
}

MlpModel MlpModel::unflatten(std::vector<std::size_t> layer_dims, const Tensor& flat) {
  return MlpModel(std::move(layer_dims), flat);
}

void MlpModel::set_parameters(const Tensor& flat) {
  if (flat.shape() != params_.shape()) throw std::invalid_argument("set_parameters: shape mismatch");
  params_ = flat;
}

Tensor mlp_forward(std::span<const std::size_t> layer_dims, std::span<const double> params,
                   const Tensor& inputs) {
  auto acts = forward_pass(layer_dims, params, inputs);
  const RowMatrix& logits = acts.back();
  std::vector<double> data(logits.data(), logits.data() + logits.size());
  return Tensor::matrix(static_cast<std::size_t>(logits.rows()),
                        static_cast<std::size_t>(logits.cols()), std::move(data));
}

Tensor mlp_forward(const MlpModel& model, const Tensor& inputs) {
  return mlp_forward(model.layer_dims(), model.parameters().data(), inputs);
}

double mlp_min_abs_preactivation(const MlpModel& model, const Tensor& inputs) {
  const auto& dims = model.layer_dims();
  const auto params = model.parameters().data();
  auto acts = forward_pass(dims, params, inputs);
  double smallest = std::numeric_limits<double>::infinity();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < model.num_layers(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    ConstMatrixMap w(params.data() + offset, out, in);
    ConstVectorMap b(params.data() + offset + out * in, out);
    RowMatrix z = acts[l] * w.transpose();
    z.rowwise() += b;
    smallest = std::min(smallest, z.cwiseAbs().minCoeff());
    offset += static_cast<std::size_t>(out * in + out);
  }
  return smallest;
}

std::vector<double> per_example_loss(std::span<const std::size_t> layer_dims,
                                     std::span<const double> params, const LabeledBatch& batch,
                                     LossKind loss) {
  check_labels(batch, layer_dims.back());
  auto acts = forward_pass(layer_dims, params, batch.inputs);
  return losses_and_logit_grads(acts.back(), batch, loss, nullptr);
}

PerExampleResult per_example_loss_and_grad(std::span<const std::size_t> layer_dims,
                                           std::span<const double> params,
                                           const LabeledBatch& batch, LossKind loss) {
  check_labels(batch, layer_dims.back());
  auto acts = forward_pass(layer_dims, params, batch.inputs);
  RowMatrix delta;
  PerExampleResult result;
  result.losses = losses_and_logit_grads(acts.back(), batch, loss, &delta);

  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto d = static_cast<Eigen::Index>(params.size());
  result.grads = Tensor({batch.size(), params.size()});
  MatrixMap grads(result.grads.data().data(), n, d);
  const auto offsets = layer_offsets(layer_dims);

  for (std::size_t l = layer_dims.size() - 1; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(layer_dims[l]);
    const auto out = static_cast<Eigen::Index>(layer_dims[l + 1]);
    const auto off = static_cast<Eigen::Index>(offsets[l]);
    const RowMatrix& a = acts[l];
    for (Eigen::Index i = 0; i < n; ++i) {
      MatrixMap gw(grads.row(i).data() + off, out, in);
      gw.noalias() = delta.row(i).transpose() * a.row(i);
      grads.row(i).segment(off + out * in, out) = delta.row(i);
    }
    if (l > 0) {
      ConstMatrixMap w(params.data() + offsets[l], out, in);
      RowMatrix back = delta * w;
      delta = (a.array() > 0.0).select(back.array(), 0.0).matrix();
    }
  }
  return result;
}

MeanResult mean_loss_and_grad(std::span<const std::size_t> layer_dims,
                              std::span<const double> params, const LabeledBatch& batch,
                              LossKind loss) {
  check_labels(batch, layer_dims.back());
  auto acts = forward_pass(layer_dims, params, batch.inputs);
  RowMatrix delta;
  const auto losses = losses_and_logit_grads(acts.back(), batch, loss, &delta);
  const double n = static_cast<double>(batch.size());

  MeanResult result;
  for (double v : losses) result.loss += v;
  result.loss /= n;
  delta /= n;

  result.grad = Tensor::zeros(params.size());
  const auto offsets = layer_offsets(layer_dims);
  for (std::size_t l = layer_dims.size() - 1; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(layer_dims[l]);
    const auto out = static_cast<Eigen::Index>(layer_dims[l + 1]);
    double* base = result.grad.data().data() + offsets[l];
    const RowMatrix& a = acts[l];
    MatrixMap gw(base, out, in);
    gw.noalias() = delta.transpose() * a;
    Eigen::Map<Eigen::RowVectorXd>(base + out * in, out) = delta.colwise().sum();
    if (l > 0) {
      ConstMatrixMap w(params.data() + offsets[l], out, in);
      RowMatrix back = delta * w;
      delta = (a.array() > 0.0).select(back.array(), 0.0).matrix();
    }
  }
  return result;
}

PerExampleResult per_example_loss_and_grad(const MlpModel& model, const LabeledBatch& batch,
                                           LossKind loss) {
  return per_example_loss_and_grad(model.layer_dims(), model.parameters().data(), batch, loss);
}

Tensor finite_diff_grad(const ScalarFunction& f, const Tensor& w, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  Tensor grad(w.shape());
  Tensor probe = w;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double original = w[j];
    probe[j] = original + h;
    const double plus = f(probe);
    probe[j] = original - h;
    const double minus = f(probe);
    probe[j] = original;
    grad[j] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

void save_checkpoint(std::ostream& out, const MlpModel& model) {
  out << "softad-mlp 1\n";
  const auto& dims = model.layer_dims();
  for (std::size_t i = 0; i < dims.size(); ++i) out << (i ? " " : "") << dims[i];
  out << '\n' << model.parameter_count() << '\n';
  for (double p : model.parameters().data()) out << format_double(p) << '\n';
}

MlpModel load_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "softad-mlp" || version != 1) {
    throw std::runtime_error("load_checkpoint: bad header");
  }
  std::string line;
  std::getline(in, line);
  if (!std::getline(in, line)) throw std::runtime_error("load_checkpoint: missing layer dims");
  std::vector<std::size_t> dims;
  std::size_t start = 0;
  while (start < line.size()) {
    const std::size_t space = line.find(' ', start);
    const std::string token = line.substr(start, space == std::string::npos ? space : space - start);
    if (!token.empty()) dims.push_back(std::stoul(token));
    if (space == std::string::npos) break;
    start = space + 1;
  }
  std::size_t count = 0;
  if (!(in >> count)) throw std::runtime_error("load_checkpoint: missing parameter count");
  if (count != MlpModel::parameter_count(dims)) {
    throw std::runtime_error("load_checkpoint: parameter count does not match layer dims");
  }
  std::vector<double> params(count);
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token)) throw std::runtime_error("load_checkpoint: truncated parameters");
    params[i] = parse_double(token);
  }
  return MlpModel(std::move(dims), Tensor::vector(std::move(params)));
}

}  // namespace softad
