#include "softad/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "softad/csv.hpp"
#include "softad/datagen.hpp"
#include "softad/loss_oracle.hpp"
#include "softad/mlp.hpp"
#include "softad/objectives.hpp"
#include "softad/optimizers.hpp"
#include "softad/rng.hpp"
#include "softad/truncators.hpp"

namespace softad {

namespace {

constexpr double kFdStep = 1e-6;
constexpr double kKinkMargin = 1e-3;

double scaled_phi(double x) { return 1.01 * phi(x); }

double relative_error(const Tensor& got, const Tensor& want) {
  return l2_norm(got - want) / std::max(l2_norm(want), 1e-8);
}

struct MlpCase {
  std::vector<std::size_t> dims;
  LabeledBatch batch;
  Tensor w;
};

/// Small random network and batch, redrawn until no hidden pre-activation is
/// within the kink margin.
MlpCase random_mlp_case(Rng& rng) {
  while (true) {
    MlpCase c;
    c.dims = {2, 2 + rng.below(3), 2 + rng.below(3), 2 + rng.below(2)};
    const std::size_t n = 3 + rng.below(4);
    std::vector<double> xs(2 * n);
    for (double& x : xs) x = rng.normal();
    std::vector<std::size_t> labels(n);
    for (std::size_t& y : labels) y = rng.below(c.dims.back());
    c.batch = {Tensor::matrix(n, 2, std::move(xs)), std::move(labels), c.dims.back()};
    MlpModel model = MlpModel::initialize(c.dims, rng);
    Tensor w = model.parameters();
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += 0.1 * rng.normal();
    model.set_parameters(w);
    if (mlp_min_abs_preactivation(model, c.batch.inputs) < kKinkMargin) continue;
    c.w = std::move(w);
    return c;
  }
}

CheckResult make_result(std::string name, double measured, double tolerance) {
  return {std::move(name), measured, tolerance, std::isfinite(measured) && measured <= tolerance};
}

CheckResult check_per_example_gradients(const VerifyOptions& opt) {
  Rng rng = Rng(opt.seed).substream(1);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const MlpCase c = random_mlp_case(rng);
    const PerExampleResult per = per_example_loss_and_grad(c.dims, c.w.data(), c.batch, LossKind::kCrossEntropy);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      const std::size_t idx[] = {i};
      const LabeledBatch one = c.batch.subset(idx);
      const Tensor fd = finite_diff_grad(
          [&](const Tensor& v) { return per_example_loss(c.dims, v.data(), one, LossKind::kCrossEntropy)[0]; },
          c.w, kFdStep);
      const auto row = per.grads.row(i);
      const Tensor got = Tensor::vector(std::vector<double>(row.begin(), row.end()));
      worst = std::max(worst, relative_error(got, fd));
    }
  }
  return make_result("per_example_gradient_fd", worst, 1e-6);
}

CheckResult check_softad_gradient(const VerifyOptions& opt) {
  Rng rng = Rng(opt.seed).substream(2);
  const Truncator truncator =
      opt.perturb_phi ? Truncator{soft_truncator().value, scaled_phi} : soft_truncator();
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const MlpCase c = random_mlp_case(rng);
    const MlpLossOracle oracle(c.dims, c.batch, LossKind::kCrossEntropy);
    const double theta = rng.uniform(0.0, 1.5);
    const double sigma = rng.uniform(0.3, 3.0);
    const DirectionResult got = softad_direction(oracle, c.w, theta, sigma, truncator);
    const Tensor fd = finite_diff_grad(
        [&](const Tensor& v) { return softad_objective(oracle, v, theta, sigma); }, c.w, kFdStep);
    worst = std::max(worst, relative_error(got.direction, fd));
  }
  return make_result("softad_gradient_consistency", worst, 1e-6);
}

CheckResult check_two_step_identity(const VerifyOptions&) {
  const SquaredDistanceOracle f(Tensor::matrix(1, 1, {0.0}), 0.5);
  const Tensor w = Tensor::vector({0.95});
  const double residual = flood_two_step_residual(f, w, 0.5, 0.1);
  return make_result("flood_two_step_identity", residual / (1.0 + l2_norm(w)), 1e-10);
}

CheckResult check_fdgr_vs_exact(const VerifyOptions& opt) {
  Rng rng = Rng(opt.seed).substream(4);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t d = 1 + rng.below(4);
    const std::size_t n = 2 + rng.below(5);
    std::vector<double> pts(n * d);
    for (double& p : pts) p = rng.normal();
    const SquaredDistanceOracle oracle(Tensor::matrix(n, d, std::move(pts)), rng.uniform(0.2, 2.0));
    Tensor w = Tensor::zeros(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = rng.normal();
    const double lambda = rng.uniform(0.01, 0.5);
    const Tensor a = fdgr_direction(oracle, w, lambda, lambda).direction;
    const Tensor b = gr_exact_direction(oracle, w, lambda).direction;
    worst = std::max(worst, l2_norm(a - b));
  }
  return make_result("fdgr_matches_exact_gr_on_quadratics", worst, 1e-10);
}

CheckResult check_sam_small_radius(const VerifyOptions& opt) {
  Rng rng = Rng(opt.seed).substream(5);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const MlpCase c = random_mlp_case(rng);
    const MlpLossOracle oracle(c.dims, c.batch, LossKind::kCrossEntropy);
    const Tensor sam = sam_direction(oracle, c.w, 1e-8).direction;
    const Tensor erm = erm_direction(oracle, c.w).direction;
    worst = std::max(worst, relative_error(sam, erm));
  }
  return make_result("sam_small_radius_matches_erm", worst, 1e-6);
}

CheckResult check_zeroth_order(const VerifyOptions& opt) {
  const ZerothOrderParams params{0.1, 0.0};
  const auto loss = [](const Tensor& v) { return v[0] * v[0]; };
  const auto h = [&](double x) { return params.theta + rho(x * x - params.theta); };
  const Tensor w = Tensor::vector({0.7});
  const double exact = (h(0.7 + params.radius) - h(0.7 - params.radius)) / (2.0 * params.radius);
  Rng rng = Rng(opt.seed).substream(6);
  constexpr int kSamples = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double g = zeroth_order_gradient(params, loss, w, rng)[0];
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / kSamples;
  const double var = (sum_sq - kSamples * mean * mean) / (kSamples - 1);
  const double se = std::sqrt(var / kSamples);
  return make_result("zeroth_order_unbiased_in_standard_errors", std::abs(mean - exact) / se, 3.0);
}

/// Stochastic single-point SoftAD gradient on the 2D mean problem.
Tensor stochastic_softad_gradient(const SquaredDistanceOracle& oracle, const Tensor& w,
                                  double theta, Rng& rng) {
  const std::size_t i = rng.below(oracle.num_examples());
  const PerExampleResult per = oracle.per_example(w);
  const auto row = per.grads.row(i);
  Tensor g = Tensor::vector(std::vector<double>(row.begin(), row.end()));
  g *= phi(per.losses[i] - theta);
  return g;
}

struct MomentumRun {
  double worst_step_error = 0.0;
  double worst_clip_excess = 0.0;
};

MomentumRun run_normalized_momentum(std::uint64_t seed, std::uint64_t horizon) {
  const MeanDemo demo = make_mean_demo(seed);
  const SquaredDistanceOracle oracle(demo.points, 1.0);
  Tensor w = demo.outside_candidate;
  const double proxy = std::max(max_squared_gradient_norm(oracle, w), 1e-12);
  const NormalizedMomentumSchedule s = normalized_momentum_schedule(horizon, proxy);
  NormalizedMomentumOptimizer opt(w.size(), s.step_size, s.momentum, s.clip_radius);
  Rng rng = Rng(seed).substream(7);
  MomentumRun run;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const Tensor before = w;
    opt.step(w, stochastic_softad_gradient(oracle, w, demo.theta, rng));
    const double moved = l2_norm(w - before);
    const double target = opt.last_step_norm() == 0.0 ? 0.0 : s.step_size;
    run.worst_step_error = std::max(run.worst_step_error, std::abs(moved - target));
    run.worst_clip_excess = std::max(run.worst_clip_excess, opt.last_clipped_norm() - s.clip_radius);
  }
  return run;
}

CheckResult check_step_norm(const VerifyOptions& opt) {
  return make_result("normalized_momentum_step_norm", run_normalized_momentum(opt.seed, 1000).worst_step_error,
                     1e-12);
}

CheckResult check_clipping(const VerifyOptions& opt) {
  const double excess = run_normalized_momentum(opt.seed, 1000).worst_clip_excess;
  return make_result("clipped_gradient_within_radius", std::max(excess, 0.0), 0.0);
}

}  // namespace

const std::vector<VerifyCheck>& registered_checks() {
  static const std::vector<VerifyCheck> checks = {
      {"per_example_gradient_fd", check_per_example_gradients},
      {"softad_gradient_consistency", check_softad_gradient},
      {"flood_two_step_identity", check_two_step_identity},
      {"fdgr_matches_exact_gr_on_quadratics", check_fdgr_vs_exact},
      {"sam_small_radius_matches_erm", check_sam_small_radius},
      {"zeroth_order_unbiased_in_standard_errors", check_zeroth_order},
      {"normalized_momentum_step_norm", check_step_norm},
      {"clipped_gradient_within_radius", check_clipping},
  };
  return checks;
}

std::string format_check(const CheckResult& r) {
  return "check=" + r.name + " status=" + (r.passed ? "pass" : "fail") +
         " measured=" + format_double(r.measured) + " tolerance=" + format_double(r.tolerance);
}

bool run_verify(const VerifyOptions& options, std::ostream& report) {
  bool all = true;
  for (const VerifyCheck& check : registered_checks()) {
    CheckResult r;
    try {
      r = check.run(options);
    } catch (const std::exception&) {
      r = {check.name, std::numeric_limits<double>::quiet_NaN(), 0.0, false};
    }
    all = all && r.passed;
    report << format_check(r) << '\n';
  }
  return all;
}

}  // namespace softad
