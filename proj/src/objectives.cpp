#include "softad/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace softad {

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "erm") return ObjectiveKind::kErm;
  if (name == "flood") return ObjectiveKind::kFlood;
  if (name == "iflood") return ObjectiveKind::kIFlood;
  if (name == "softad") return ObjectiveKind::kSoftAd;
  if (name == "sam") return ObjectiveKind::kSam;
  if (name == "fdgr") return ObjectiveKind::kFdgr;
  if (name == "grexact") return ObjectiveKind::kGrExact;
  throw std::invalid_argument("unknown objective '" + std::string(name) + "'");
}

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kErm: return "erm";
    case ObjectiveKind::kFlood: return "flood";
    case ObjectiveKind::kIFlood: return "iflood";
    case ObjectiveKind::kSoftAd: return "softad";
    case ObjectiveKind::kSam: return "sam";
    case ObjectiveKind::kFdgr: return "fdgr";
    case ObjectiveKind::kGrExact: return "grexact";
  }
  return "unknown";
}

ObjectiveSpec ObjectiveSpec::erm() { return {}; }

ObjectiveSpec ObjectiveSpec::flood(double theta) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::kFlood;
  s.theta = theta;
  return s;
}

ObjectiveSpec ObjectiveSpec::iflood(double theta) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::kIFlood;
  s.theta = theta;
  return s;
}

ObjectiveSpec ObjectiveSpec::softad(double theta, double sigma) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::kSoftAd;
  s.theta = theta;
  s.sigma = sigma;
  return s;
}

ObjectiveSpec ObjectiveSpec::sam(double radius) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::kSam;
  s.radius = radius;
  return s;
}

ObjectiveSpec ObjectiveSpec::fdgr(double lambda, double fd_step) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::kFdgr;
  s.lambda = lambda;
  s.fd_step = fd_step;
  return s;
}

ObjectiveSpec ObjectiveSpec::gr_exact(double lambda) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::kGrExact;
  s.lambda = lambda;
  return s;
}

void ObjectiveSpec::validate() const {
  switch (kind) {
    case ObjectiveKind::kErm:
      break;
    case ObjectiveKind::kFlood:
    case ObjectiveKind::kIFlood:
      if (!std::isfinite(theta)) throw std::invalid_argument("threshold must be finite");
      break;
    case ObjectiveKind::kSoftAd:
      TruncatorParams{theta, sigma}.validate();
      break;
    case ObjectiveKind::kSam:
      if (!(radius > 0.0)) throw std::invalid_argument("SAM radius must be positive");
      break;
    case ObjectiveKind::kFdgr:
      if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
      if (fd_step == 0.0 || !std::isfinite(fd_step)) {
        throw std::invalid_argument("finite-difference step must be nonzero");
      }
      break;
    case ObjectiveKind::kGrExact:
      if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
      break;
  }
}

std::optional<double> ObjectiveSpec::hyperparameter() const {
  switch (kind) {
    case ObjectiveKind::kErm: return std::nullopt;
    case ObjectiveKind::kFlood:
    case ObjectiveKind::kIFlood:
    case ObjectiveKind::kSoftAd: return theta;
    case ObjectiveKind::kSam: return radius;
    case ObjectiveKind::kFdgr:
    case ObjectiveKind::kGrExact: return lambda;
  }
  return std::nullopt;
}

ObjectiveSpec ObjectiveSpec::with_hyperparameter(double value) const {
  ObjectiveSpec s = *this;
  switch (kind) {
    case ObjectiveKind::kErm:
      throw std::invalid_argument("ERM has no hyperparameter");
    case ObjectiveKind::kFlood:
    case ObjectiveKind::kIFlood:
    case ObjectiveKind::kSoftAd: s.theta = value; break;
    case ObjectiveKind::kSam: s.radius = value; break;
    case ObjectiveKind::kFdgr:
    case ObjectiveKind::kGrExact: s.lambda = value; break;
  }
  return s;
}

DirectionResult erm_direction(const LossOracle& oracle, const Tensor& w) {
  MeanResult m = oracle.mean(w);
  DirectionResult r;
  r.direction = std::move(m.grad);
  r.objective_value = m.loss;
  return r;
}

DirectionResult flood_direction(const LossOracle& oracle, const Tensor& w, double theta) {
  MeanResult m = oracle.mean(w);
  const double s = sign(m.loss - theta);
  DirectionResult r;
  r.objective_value = theta + std::fabs(m.loss - theta);
  r.flood_flag = static_cast<int>(s);
  r.direction = std::move(m.grad);
  if (s < 0.0) {
    r.direction *= -1.0;
  } else if (s == 0.0) {
    r.direction = Tensor::zeros(r.direction.size());
  }
  return r;
}

DirectionResult pointwise_direction(const LossOracle& oracle, const Tensor& w, double theta,
                                    double sigma, Truncator truncator) {
  TruncatorParams{theta, sigma}.validate();
  const PerExampleResult per = oracle.per_example(w);
  const std::size_t n = per.losses.size();
  if (n == 0) throw std::invalid_argument("empty batch");
  DirectionResult r;
  r.direction = Tensor::zeros(oracle.dimension());
  r.weights.resize(n);
  double value_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (per.losses[i] - theta) / sigma;
    const double weight = truncator.weight(x);
    r.weights[i] = weight;
    value_sum += truncator.value(x);
    if (weight == 0.0) continue;
    const auto g = per.grads.row(i);
    for (std::size_t j = 0; j < g.size(); ++j) r.direction[j] += weight * g[j];
  }
  const double inv = 1.0 / static_cast<double>(n);
  r.direction *= inv;
  r.objective_value = theta + sigma * value_sum * inv;
  return r;
}

DirectionResult iflood_direction(const LossOracle& oracle, const Tensor& w, double theta) {
  return pointwise_direction(oracle, w, theta, 1.0, hard_truncator());
}

DirectionResult softad_direction(const LossOracle& oracle, const Tensor& w, double theta,
                                 double sigma, Truncator truncator) {
  return pointwise_direction(oracle, w, theta, sigma, truncator);
}

DirectionResult sam_direction(const LossOracle& oracle, const Tensor& w, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("SAM radius must be positive");
  MeanResult base = oracle.mean(w);
  const double norm = l2_norm(base.grad);
  DirectionResult r;
  if (norm == 0.0) {
    r.direction = std::move(base.grad);
    r.objective_value = base.loss;
    return r;
  }
  Tensor perturbed = w;
  axpy(radius / norm, base.grad, perturbed);
  MeanResult at = oracle.mean(perturbed);
  r.direction = std::move(at.grad);
  r.objective_value = at.loss;
  return r;
}

DirectionResult fdgr_direction(const LossOracle& oracle, const Tensor& w, double lambda,
                               double fd_step) {
  if (fd_step == 0.0) throw std::invalid_argument("finite-difference step must be nonzero");
  MeanResult base = oracle.mean(w);
  DirectionResult r;
  const double sq = dot(base.grad, base.grad);
  r.objective_value = base.loss + 0.5 * lambda * sq;
  if (lambda == 0.0) {
    r.direction = std::move(base.grad);
    return r;
  }
  Tensor shifted = w;
  axpy(fd_step, base.grad, shifted);
  const MeanResult at = oracle.mean(shifted);
  r.direction = base.grad;
  const double c = lambda / fd_step;
  for (std::size_t j = 0; j < r.direction.size(); ++j) {
    r.direction[j] += c * (at.grad[j] - base.grad[j]);
  }
  return r;
}

double gr_hvp_step(const Tensor& w) { return 1e-4 * (1.0 + l2_norm(w)); }

DirectionResult gr_exact_direction(const LossOracle& oracle, const Tensor& w, double lambda,
                                   std::size_t max_dim) {
  if (oracle.dimension() > max_dim) throw std::invalid_argument("model too large for exact GR");
  MeanResult base = oracle.mean(w);
  DirectionResult r;
  const double norm = l2_norm(base.grad);
  r.objective_value = base.loss + 0.5 * lambda * norm * norm;
  if (lambda == 0.0 || norm == 0.0) {
    r.direction = std::move(base.grad);
    return r;
  }
  // H v ~ (g(w + h v/|v|) - g(w - h v/|v|)) |v| / (2h), v = grad R_n(w)
  const double h = gr_hvp_step(w);
  Tensor plus = w;
  Tensor minus = w;
  axpy(h / norm, base.grad, plus);
  axpy(-h / norm, base.grad, minus);
  const MeanResult gp = oracle.mean(plus);
  const MeanResult gm = oracle.mean(minus);
  const double c = lambda * norm / (2.0 * h);
  r.direction = base.grad;
  for (std::size_t j = 0; j < r.direction.size(); ++j) {
    r.direction[j] += c * (gp.grad[j] - gm.grad[j]);
  }
  return r;
}

DirectionResult compute_direction(const ObjectiveSpec& spec, const LossOracle& oracle,
                                  const Tensor& w) {
  switch (spec.kind) {
    case ObjectiveKind::kErm: return erm_direction(oracle, w);
    case ObjectiveKind::kFlood: return flood_direction(oracle, w, spec.theta);
    case ObjectiveKind::kIFlood: return iflood_direction(oracle, w, spec.theta);
    case ObjectiveKind::kSoftAd: return softad_direction(oracle, w, spec.theta, spec.sigma);
    case ObjectiveKind::kSam: return sam_direction(oracle, w, spec.radius);
    case ObjectiveKind::kFdgr: return fdgr_direction(oracle, w, spec.lambda, spec.fd_step);
    case ObjectiveKind::kGrExact:
      return gr_exact_direction(oracle, w, spec.lambda, spec.gr_exact_max_dim);
  }
  throw std::logic_error("unhandled objective kind");
}

DirectionResult compute_direction(const ObjectiveSpec& spec, const MlpModel& model,
                                  const LabeledBatch& batch, LossKind loss) {
  MlpLossOracle oracle(model.layer_dims(), batch, loss);
  return compute_direction(spec, oracle, model.parameters());
}

double softad_objective(const LossOracle& oracle, const Tensor& w, double theta, double sigma) {
  const auto losses = oracle.losses(w);
  double acc = 0.0;
  for (double l : losses) acc += rho((l - theta) / sigma);
  return theta + sigma * acc / static_cast<double>(losses.size());
}

double gr_objective(const LossOracle& oracle, const Tensor& w, double lambda) {
  const MeanResult m = oracle.mean(w);
  return m.loss + 0.5 * lambda * dot(m.grad, m.grad);
}

double flood_two_step_residual(const LossOracle& oracle, const Tensor& w, double theta,
                               double alpha) {
  const DirectionResult first = flood_direction(oracle, w, theta);
  if (first.flood_flag != -1) throw std::invalid_argument("crossing condition not met");
  Tensor w1 = w;
  axpy(-alpha, first.direction, w1);
  const DirectionResult second = flood_direction(oracle, w1, theta);
  if (second.flood_flag != 1) throw std::invalid_argument("crossing condition not met");
  Tensor w2 = w1;
  axpy(-alpha, second.direction, w2);

  // w - alpha^2 * (g(w + alpha g(w)) - g(w)) / alpha
  const Tensor g0 = oracle.mean(w).grad;
  Tensor shifted = w;
  axpy(alpha, g0, shifted);
  const Tensor g1 = oracle.mean(shifted).grad;
  Tensor rhs = w;
  for (std::size_t j = 0; j < rhs.size(); ++j) {
    rhs[j] -= alpha * alpha * ((g1[j] - g0[j]) / alpha);
  }
  return l2_norm(w2 - rhs);
}

}  // namespace softad
