#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>

#include "softad/loss_oracle.hpp"
#include "softad/rng.hpp"
#include "softad/tensor.hpp"

namespace softad {

enum class OptimizerKind { kSgd, kSgdMomentum, kAdam, kNormalizedMomentum, kProjectedSgd };

OptimizerKind parse_optimizer_kind(std::string_view name);
std::string_view to_string(OptimizerKind kind);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::kAdam;
  double step_size = 1e-3;
  double momentum = 0.0;  // SGD momentum b, also the NormalizedMomentum b
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_radius = 1.0;   // gamma, NormalizedMomentum
  double ball_radius = 1e3;   // B, ProjectedSgd

  void validate() const;
};

/// Consumes update directions (the vector to subtract) and moves w in place.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(Tensor& w, const Tensor& direction) = 0;
  std::uint64_t iterations() const { return t_; }

 protected:
  std::uint64_t t_ = 0;
};

/// buffer <- b * buffer + direction;  w <- w - step_size * buffer.
class SgdOptimizer final : public Optimizer {
 public:
  SgdOptimizer(std::size_t dimension, double step_size, double momentum = 0.0);
  void step(Tensor& w, const Tensor& direction) override;
  const Tensor& buffer() const { return buffer_; }

 private:
  double step_size_;
  double momentum_;
  Tensor buffer_;
};

/// Adam with bias correction.
class AdamOptimizer final : public Optimizer {
 public:
  AdamOptimizer(std::size_t dimension, double step_size = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);
  void step(Tensor& w, const Tensor& direction) override;

 private:
  double step_size_, beta1_, beta2_, epsilon_;
  Tensor m_, v_;
};

/// Clipped-momentum normalized steps:
///   G <- G * min(1, gamma / |G|);  M <- b M + (1 - b) G;  w <- w - alpha M / |M|.
/// A zero momentum buffer leaves w in place.
class NormalizedMomentumOptimizer final : public Optimizer {
 public:
  NormalizedMomentumOptimizer(std::size_t dimension, double step_size, double momentum,
                              double clip_radius);
  void step(Tensor& w, const Tensor& raw_gradient) override;

  const Tensor& momentum_buffer() const { return m_; }
  double last_clipped_norm() const { return last_clipped_norm_; }
  double last_step_norm() const { return last_step_norm_; }

 private:
  double step_size_, momentum_, clip_radius_;
  Tensor m_;
  double last_clipped_norm_ = 0.0;
  double last_step_norm_ = 0.0;
};

struct NormalizedMomentumSchedule {
  double step_size;
  double momentum;
  double clip_radius;
};

/// Horizon-T settings: alpha = T^(-3/4), b = 1 - 1/sqrt(T), and
/// gamma = sqrt(variance_proxy / (1 - b)). The proxy stands in for the
/// unobservable L_AD - L_l (a squared-gradient-norm bound).
NormalizedMomentumSchedule normalized_momentum_schedule(std::uint64_t horizon,
                                                        double variance_proxy);

/// Largest per-point squared gradient norm at w, the default variance proxy.
double max_squared_gradient_norm(const LossOracle& oracle, const Tensor& w);

/// w <- Proj_ball(w - step_size * direction).
class ProjectedSgdOptimizer final : public Optimizer {
 public:
  ProjectedSgdOptimizer(double step_size, double ball_radius);
  void step(Tensor& w, const Tensor& direction) override;
  double ball_radius() const { return ball_radius_; }

 private:
  double step_size_;
  double ball_radius_;
};

/// Projected step with G = sign(l(w; z) - theta) grad l(w; z) on a
/// single-point oracle.
void projected_sign_sgd_step(ProjectedSgdOptimizer& optimizer, Tensor& w,
                             const LossOracle& single_point, double theta);

/// Step size for the projected sign method at horizon T:
/// sqrt(delta / (T * smoothness * variance_proxy)).
double projected_sign_step_size(std::uint64_t horizon, double smoothness, double variance_proxy,
                                double delta = 1.0);

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec, std::size_t dimension);

struct ZerothOrderParams {
  double radius = 0.1;  // smoothing radius r
  double theta = 0.0;
};

/// (d/r) * (theta + rho(loss(w + rU) - theta)) * U with U uniform on the unit
/// sphere. One loss evaluation, no gradients.
Tensor zeroth_order_gradient(const ZerothOrderParams& params,
                             const std::function<double(const Tensor&)>& loss_eval,
                             const Tensor& w, Rng& rng);

}  // namespace softad
