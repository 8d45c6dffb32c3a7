#include "softad/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "softad/truncators.hpp"

namespace softad {

namespace {

void require_match(const Tensor& w, const Tensor& direction) {
  if (w.shape() != direction.shape()) throw std::invalid_argument("optimizer: shape mismatch");
}

}  // namespace

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "sgd_momentum") return OptimizerKind::kSgdMomentum;
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "normalized_momentum") return OptimizerKind::kNormalizedMomentum;
  if (name == "projected_sgd") return OptimizerKind::kProjectedSgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kSgdMomentum: return "sgd_momentum";
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kNormalizedMomentum: return "normalized_momentum";
    case OptimizerKind::kProjectedSgd: return "projected_sgd";
  }
  return "unknown";
}

void OptimizerSpec::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0,1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must be in [0,1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
  if (!(clip_radius > 0.0)) throw std::invalid_argument("invalid radius");
  if (!(ball_radius > 0.0)) throw std::invalid_argument("invalid radius");
}

SgdOptimizer::SgdOptimizer(std::size_t dimension, double step_size, double momentum)
    : step_size_(step_size), momentum_(momentum), buffer_(Tensor::zeros(dimension)) {}

void SgdOptimizer::step(Tensor& w, const Tensor& direction) {
  require_match(w, direction);
  require_match(buffer_, direction);
  for (std::size_t j = 0; j < w.size(); ++j) {
    buffer_[j] = momentum_ * buffer_[j] + direction[j];
    w[j] -= step_size_ * buffer_[j];
  }
  ++t_;
}

AdamOptimizer::AdamOptimizer(std::size_t dimension, double step_size, double beta1, double beta2,
                             double epsilon)
    : step_size_(step_size),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      m_(Tensor::zeros(dimension)),
      v_(Tensor::zeros(dimension)) {}

void AdamOptimizer::step(Tensor& w, const Tensor& direction) {
  require_match(w, direction);
  require_match(m_, direction);
  ++t_;
  const double t = static_cast<double>(t_);
  const double bc1 = 1.0 - std::pow(beta1_, t);
  const double bc2 = 1.0 - std::pow(beta2_, t);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double g = direction[j];
    m_[j] = beta1_ * m_[j] + (1.0 - beta1_) * g;
    v_[j] = beta2_ * v_[j] + (1.0 - beta2_) * g * g;
    const double m_hat = m_[j] / bc1;
    const double v_hat = v_[j] / bc2;
    w[j] -= step_size_ * m_hat / (std::sqrt(v_hat) + epsilon_);
  }
}

NormalizedMomentumOptimizer::NormalizedMomentumOptimizer(std::size_t dimension, double step_size,
                                                         double momentum, double clip_radius)
    : step_size_(step_size),
      momentum_(momentum),
      clip_radius_(clip_radius),
      m_(Tensor::zeros(dimension)) {
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0,1)");
  if (!(clip_radius > 0.0)) throw std::invalid_argument("invalid radius");
}

void NormalizedMomentumOptimizer::step(Tensor& w, const Tensor& raw_gradient) {
  require_match(w, raw_gradient);
  const Tensor clipped = clip_to_norm(raw_gradient, clip_radius_);
  last_clipped_norm_ = l2_norm(clipped);
  for (std::size_t j = 0; j < m_.size(); ++j) {
    m_[j] = momentum_ * m_[j] + (1.0 - momentum_) * clipped[j];
  }
  ++t_;
  const double norm = l2_norm(m_);
  if (norm == 0.0) {
    last_step_norm_ = 0.0;
    return;
  }
  const double scale = step_size_ / norm;
  for (std::size_t j = 0; j < w.size(); ++j) w[j] -= scale * m_[j];
  last_step_norm_ = step_size_;
}

NormalizedMomentumSchedule normalized_momentum_schedule(std::uint64_t horizon,
                                                        double variance_proxy) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (!(variance_proxy > 0.0)) throw std::invalid_argument("variance proxy must be positive");
  const double t = static_cast<double>(horizon);
  NormalizedMomentumSchedule s{};
  s.step_size = 1.0 / std::pow(t, 0.75);
  s.momentum = 1.0 - 1.0 / std::sqrt(t);
  // T = 1 gives b = 0; the clip radius then reduces to sqrt(proxy)
  s.clip_radius = std::sqrt(variance_proxy / (1.0 - s.momentum));
  return s;
}

double max_squared_gradient_norm(const LossOracle& oracle, const Tensor& w) {
  const PerExampleResult per = oracle.per_example(w);
  double best = 0.0;
  for (std::size_t i = 0; i < per.losses.size(); ++i) {
    const double n = l2_norm(per.grads.row(i));
    best = std::max(best, n * n);
  }
  return best;
}

ProjectedSgdOptimizer::ProjectedSgdOptimizer(double step_size, double ball_radius)
    : step_size_(step_size), ball_radius_(ball_radius) {
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(ball_radius > 0.0)) throw std::invalid_argument("invalid radius");
}

void ProjectedSgdOptimizer::step(Tensor& w, const Tensor& direction) {
  require_match(w, direction);
  Tensor moved = w;
  axpy(-step_size_, direction, moved);
  w = project_to_ball(moved, ball_radius_);
  ++t_;
}

void projected_sign_sgd_step(ProjectedSgdOptimizer& optimizer, Tensor& w,
                             const LossOracle& single_point, double theta) {
  if (single_point.num_examples() != 1) {
    throw std::invalid_argument("projected_sign_sgd_step: expects a single data point");
  }
  const PerExampleResult per = single_point.per_example(w);
  const double s = sign(per.losses[0] - theta);
  Tensor g = Tensor::vector(std::vector<double>(per.grads.row(0).begin(), per.grads.row(0).end()));
  g *= s;
  optimizer.step(w, g);
}

double projected_sign_step_size(std::uint64_t horizon, double smoothness, double variance_proxy,
                                double delta) {
  if (horizon < 1 || !(smoothness > 0.0) || !(variance_proxy > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("projected_sign_step_size: arguments must be positive");
  }
  return std::sqrt(delta / (static_cast<double>(horizon) * smoothness * variance_proxy));
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::size_t dimension) {
  spec.validate();
  switch (spec.kind) {
    case OptimizerKind::kSgd:
      return std::make_unique<SgdOptimizer>(dimension, spec.step_size, 0.0);
    case OptimizerKind::kSgdMomentum:
      return std::make_unique<SgdOptimizer>(dimension, spec.step_size, spec.momentum);
    case OptimizerKind::kAdam:
      return std::make_unique<AdamOptimizer>(dimension, spec.step_size, spec.beta1, spec.beta2,
                                             spec.epsilon);
    case OptimizerKind::kNormalizedMomentum:
      return std::make_unique<NormalizedMomentumOptimizer>(dimension, spec.step_size,
                                                           spec.momentum, spec.clip_radius);
    case OptimizerKind::kProjectedSgd:
      return std::make_unique<ProjectedSgdOptimizer>(spec.step_size, spec.ball_radius);
  }
  throw std::logic_error("unhandled optimizer kind");
}

Tensor zeroth_order_gradient(const ZerothOrderParams& params,
                             const std::function<double(const Tensor&)>& loss_eval,
                             const Tensor& w, Rng& rng) {
  if (!(params.radius > 0.0)) throw std::invalid_argument("smoothing radius must be positive");
  const std::size_t d = w.size();
  Tensor u = sample_unit_sphere(d, rng);
  Tensor probe = w;
  axpy(params.radius, u, probe);
  const double h = params.theta + rho(loss_eval(probe) - params.theta);
  u *= static_cast<double>(d) / params.radius * h;
  return u;
}

}  // namespace softad
