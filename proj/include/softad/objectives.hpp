#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "softad/loss_oracle.hpp"
#include "softad/tensor.hpp"
#include "softad/truncators.hpp"

namespace softad {

enum class ObjectiveKind { kErm, kFlood, kIFlood, kSoftAd, kSam, kFdgr, kGrExact };

ObjectiveKind parse_objective_kind(std::string_view name);
std::string_view to_string(ObjectiveKind kind);

/// Training objective and its parameters. Build with the named factories; each
/// kind only reads the fields it needs.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kErm;
  double theta = 0.0;    // Flood, iFlood, SoftAD
  double sigma = 1.0;    // SoftAD
  double radius = 0.05;  // SAM
  double lambda = 0.0;   // FDGR, GRExact
  double fd_step = 0.0;  // FDGR
  std::size_t gr_exact_max_dim = 10000;

  static ObjectiveSpec erm();
  static ObjectiveSpec flood(double theta);
  static ObjectiveSpec iflood(double theta);
  static ObjectiveSpec softad(double theta, double sigma = 1.0);
  static ObjectiveSpec sam(double radius);
  static ObjectiveSpec fdgr(double lambda, double fd_step);
  static ObjectiveSpec gr_exact(double lambda);

  void validate() const;

  /// The single tuned hyperparameter: theta, SAM radius or lambda. None for ERM.
  std::optional<double> hyperparameter() const;
  ObjectiveSpec with_hyperparameter(double value) const;
};

/// `direction` is the vector subtracted (after step-size scaling) from w, so
/// an ascent step shows up as a negated gradient.
struct DirectionResult {
  Tensor direction;
  double objective_value = 0.0;
  /// Per-point weights for SoftAD / iFlood; empty otherwise.
  std::vector<double> weights;
  /// Flood only: +1 descent, -1 ascent, 0 frozen (R_n == theta).
  int flood_flag = 0;
};

DirectionResult erm_direction(const LossOracle& oracle, const Tensor& w);
DirectionResult flood_direction(const LossOracle& oracle, const Tensor& w, double theta);
DirectionResult iflood_direction(const LossOracle& oracle, const Tensor& w, double theta);
DirectionResult softad_direction(const LossOracle& oracle, const Tensor& w, double theta,
                                 double sigma = 1.0, Truncator truncator = soft_truncator());
DirectionResult sam_direction(const LossOracle& oracle, const Tensor& w, double radius);
DirectionResult fdgr_direction(const LossOracle& oracle, const Tensor& w, double lambda,
                               double fd_step);
DirectionResult gr_exact_direction(const LossOracle& oracle, const Tensor& w, double lambda,
                                   std::size_t max_dim = 10000);

/// Pointwise-truncated direction (1/n) sum weight((l_i - theta)/sigma) grad l_i
/// with value theta + (sigma/n) sum value((l_i - theta)/sigma). SoftAD and iFlood
/// are the two built-in truncators.
DirectionResult pointwise_direction(const LossOracle& oracle, const Tensor& w, double theta,
                                    double sigma, Truncator truncator);

DirectionResult compute_direction(const ObjectiveSpec& spec, const LossOracle& oracle,
                                  const Tensor& w);
DirectionResult compute_direction(const ObjectiveSpec& spec, const MlpModel& model,
                                  const LabeledBatch& batch, LossKind loss);

/// Scalar objective values, used as finite-difference targets.
double softad_objective(const LossOracle& oracle, const Tensor& w, double theta,
                        double sigma = 1.0);
double gr_objective(const LossOracle& oracle, const Tensor& w, double lambda);

/// Step used by the exact GR Hessian-vector product: 1e-4 * (1 + ||w||).
double gr_hvp_step(const Tensor& w);

/// Runs two Flooding steps from w and compares the result against one
/// forward-difference step on the squared gradient norm with step alpha^2.
/// Throws "crossing condition not met" unless R_n(w) < theta < R_n(w_next).
double flood_two_step_residual(const LossOracle& oracle, const Tensor& w, double theta,
                               double alpha);

}  // namespace softad
