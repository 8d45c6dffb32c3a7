#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "softad/loss_oracle.hpp"
#include "softad/mlp.hpp"
#include "softad/truncators.hpp"

using namespace softad;

namespace {

std::vector<double> row_vec(const Tensor& t, std::size_t r) {
  return {t.row(r).begin(), t.row(r).end()};
}

}  // namespace

TEST_CASE("parameter count follows the layout") {
  const std::vector<std::size_t> dims{2, 64, 64, 2};
  CHECK(MlpModel::parameter_count(dims) == 2 * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);
  const MlpModel m(dims);
  CHECK(m.parameter_count() == MlpModel::parameter_count(dims));
  CHECK(m.num_layers() == 3);
  CHECK(m.weights(1).size() == 64 * 64);
  CHECK(m.biases(2).size() == 2);
}

TEST_CASE("constructor rejects bad parameters") {
  CHECK_THROWS(MlpModel({2, 3, 2}, Tensor::zeros(5)));
  Tensor bad = Tensor::zeros(MlpModel::parameter_count(std::vector<std::size_t>{2, 2}));
  bad[0] = std::nan("");
  CHECK_THROWS(MlpModel({2, 2}, bad));
  CHECK_THROWS(MlpModel(std::vector<std::size_t>{2}));
}

TEST_CASE("initialization bounds and determinism") {
  Rng a(1), b(1);
  const std::vector<std::size_t> dims{2, 64, 64, 2};
  const MlpModel m1 = MlpModel::initialize(dims, a);
  const MlpModel m2 = MlpModel::initialize(dims, b);
  CHECK(m1.parameters() == m2.parameters());
  for (std::size_t l = 0; l < m1.num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    for (double w : m1.weights(l)) CHECK(std::abs(w) <= limit);
    for (double v : m1.biases(l)) CHECK(v == 0.0);
  }
}

TEST_CASE("forward pass matches loop oracle") {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const oracle::MlpCase c = oracle::random_case(rng, 0.0);
    const MlpModel model(c.dims, Tensor::vector(c.w));
    const Tensor logits = mlp_forward(model, c.batch.inputs);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      const auto want = oracle::mlp_logits(c.dims, c.w, c.batch.inputs.row(i).data());
      CHECK(oracle::rel_error(row_vec(logits, i), want) < 1e-12);
    }
    CHECK(mlp_min_abs_preactivation(model, c.batch.inputs) ==
          doctest::Approx(oracle::min_preactivation(c.dims, c.w, c.batch.inputs)).epsilon(1e-12));
  }
}

TEST_CASE("per-example losses match oracle for both loss kinds") {
  Rng rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const oracle::MlpCase c = oracle::random_case(rng, 0.0);
    const auto ce = per_example_loss(c.dims, c.w, c.batch, LossKind::kCrossEntropy);
    const auto se = per_example_loss(c.dims, c.w, c.batch, LossKind::kSquaredError);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      CHECK(ce[i] == doctest::Approx(oracle::example_loss(c.dims, c.w, c.batch, i, true)).epsilon(1e-12));
      CHECK(se[i] == doctest::Approx(oracle::example_loss(c.dims, c.w, c.batch, i, false)).epsilon(1e-12));
    }
  }
}

TEST_CASE("per-example gradients match central differences") {
  Rng rng(4);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const oracle::MlpCase c = oracle::random_case(rng);
    const bool ce = rep % 2 == 0;
    const LossKind kind = ce ? LossKind::kCrossEntropy : LossKind::kSquaredError;
    const PerExampleResult got = per_example_loss_and_grad(c.dims, c.w, c.batch, kind);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      const auto fd = oracle::fd_gradient(
          [&](const oracle::Vec& v) { return oracle::example_loss_ld(c.dims, v, c.batch, i, ce); }, c.w, 1e-6);
      worst = std::max(worst, oracle::rel_error(row_vec(got.grads, i), fd));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("mean gradient equals the average of per-example rows") {
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const oracle::MlpCase c = oracle::random_case(rng, 0.0);
    const PerExampleResult per = per_example_loss_and_grad(c.dims, c.w, c.batch, LossKind::kCrossEntropy);
    const MeanResult mean = mean_loss_and_grad(c.dims, c.w, c.batch, LossKind::kCrossEntropy);
    oracle::Vec avg(c.w.size(), 0.0);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += per.grads.at(i, j) / c.batch.size();
    }
    CHECK(oracle::rel_error(oracle::to_vec(mean.grad), avg) < 1e-12);
    CHECK(mean.loss == doctest::Approx(oracle::mean(per.losses)).epsilon(1e-13));

    const MlpLossOracle lo(c.dims, c.batch, LossKind::kCrossEntropy);
    CHECK(lo.dimension() == c.w.size());
    CHECK(lo.risk(Tensor::vector(c.w)) == doctest::Approx(mean.loss).epsilon(1e-13));
  }
}

TEST_CASE("library finite differences agree with the analytic gradient of a quadratic") {
  const Tensor w = Tensor::vector({0.3, -1.2, 2.0});
  const Tensor g = finite_diff_grad([](const Tensor& v) { return v[0] * v[0] + 3 * v[1] * v[2]; }, w, 1e-5);
  CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(g[2] == doctest::Approx(-3.6).epsilon(1e-9));
}

TEST_CASE("labeled batch validation") {
  LabeledBatch ok{Tensor::matrix(2, 2, {0, 1, 2, 3}), {0, 1}, 2};
  CHECK_NOTHROW(ok.validate());
  LabeledBatch bad_label{Tensor::matrix(2, 2, {0, 1, 2, 3}), {0, 2}, 2};
  CHECK_THROWS(bad_label.validate());
  LabeledBatch mismatch{Tensor::matrix(2, 2, {0, 1, 2, 3}), {0}, 2};
  CHECK_THROWS(mismatch.validate());
  LabeledBatch empty{Tensor({0, 2}), {}, 2};
  CHECK_THROWS(empty.validate());
  LabeledBatch nonfinite{Tensor::matrix(1, 2, {INFINITY, 0}), {0}, 2};
  CHECK_THROWS(nonfinite.validate());

  const std::size_t idx[] = {1, 0, 1};
  const LabeledBatch sub = ok.subset(idx);
  CHECK(sub.size() == 3);
  CHECK(sub.labels == std::vector<std::size_t>{1, 0, 1});
  CHECK(sub.inputs.at(0, 0) == 2);
  CHECK(sub.inputs.at(1, 1) == 1);
}

TEST_CASE("checkpoint round trip is exact") {
  Rng rng(6);
  const MlpModel m = MlpModel::initialize({2, 5, 3, 2}, rng);
  Tensor w = m.parameters();
  for (std::size_t j = 0; j < w.size(); ++j) w[j] += rng.normal() * 1e-3;
  const MlpModel perturbed({2, 5, 3, 2}, w);
  std::stringstream ss;
  save_checkpoint(ss, perturbed);
  const MlpModel back = load_checkpoint(ss);
  CHECK(back.layer_dims() == perturbed.layer_dims());
  CHECK(back.parameters() == perturbed.parameters());

  std::stringstream bad("softad-mlp 1\n2 2\n7\n0\n");
  CHECK_THROWS(load_checkpoint(bad));
  std::stringstream wrong_magic("model 1\n2 2\n6\n");
  CHECK_THROWS(load_checkpoint(wrong_magic));
}

TEST_CASE("flatten and unflatten are inverse") {
  Rng rng(7);
  const MlpModel m = MlpModel::initialize({3, 4, 2}, rng);
  const MlpModel back = MlpModel::unflatten(m.layer_dims(), m.flatten());
  CHECK(back.parameters() == m.parameters());
  // bias of layer 0 starts right after its weight block
  MlpModel z({3, 4, 2});
  Tensor flat = z.flatten();
  flat[3 * 4] = 9.0;
  z.set_parameters(flat);
  CHECK(z.biases(0)[0] == 9.0);
}

TEST_CASE("forward pass hand examples") {
  const Tensor x = Tensor::matrix(2, 2, {1.0, -1.0, 0.3, 2.0});
  const MlpModel zero({2, 4, 2});
  CHECK(mlp_forward(zero, x) == Tensor::matrix(2, 2, {0, 0, 0, 0}));
  const MlpModel identity({2, 2}, Tensor::vector({1, 0, 0, 1, 0, 0}));
  CHECK(mlp_forward(identity, x) == x);
  // hidden W = [[1, 2], [-1, 1]], b = (0.5, 0); output W = [[1, 1], [2, -1]], b = (0, 1)
  const MlpModel hand({2, 2, 2}, Tensor::vector({1, 2, -1, 1, 0.5, 0, 1, 1, 2, -1, 0, 1}));
  // input (1, -1): pre = (1 - 2 + 0.5, -1 - 1) = (-0.5, -2) -> relu (0, 0) -> logits (0, 1)
  const Tensor one = mlp_forward(hand, Tensor::matrix(1, 2, {1.0, -1.0}));
  CHECK(one == Tensor::matrix(1, 2, {0.0, 1.0}));
  // input (1, 1): pre = (3.5, 0) -> relu (3.5, 0) -> logits (3.5, 8)
  CHECK(mlp_forward(hand, Tensor::matrix(1, 2, {1.0, 1.0})) == Tensor::matrix(1, 2, {3.5, 8.0}));
}

TEST_CASE("uniform logits give ln(K) and duplicated examples give identical rows") {
  for (std::size_t k : {2u, 3u, 5u}) {
    const MlpModel zero({2, 3, k});
    const LabeledBatch b{Tensor::matrix(2, 2, {1.0, 2.0, -1.0, 0.5}), {0, k - 1}, k};
    for (double l : per_example_loss(zero.layer_dims(), zero.parameters().values(), b, LossKind::kCrossEntropy)) {
      CHECK(l == doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-15));
    }
  }
  Rng rng(8);
  const MlpModel m = MlpModel::initialize({2, 5, 3}, rng);
  const LabeledBatch dup{Tensor::matrix(3, 2, {0.4, -0.7, 0.4, -0.7, 1.0, 1.0}), {2, 2, 0}, 3};
  const PerExampleResult r = per_example_loss_and_grad(m, dup, LossKind::kCrossEntropy);
  CHECK(r.losses[0] == r.losses[1]);
  CHECK(row_vec(r.grads, 0) == row_vec(r.grads, 1));
}

TEST_CASE("library finite differences: spec examples") {
  const Tensor g = finite_diff_grad([](const Tensor& v) { return 0.5 * dot(v, v); }, Tensor::vector({1.0, 2.0}), 1e-5);
  CHECK(std::abs(g[0] - 1.0) <= 1e-8);
  CHECK(std::abs(g[1] - 2.0) <= 1e-8);
  CHECK(finite_diff_grad([](const Tensor&) { return 3.0; }, Tensor::vector({1.0, 2.0}), 1e-5) == Tensor::zeros(2));
  const Tensor r = finite_diff_grad([](const Tensor& v) { return oracle::rho(v[0] - 0.3); }, Tensor::vector({1.0}), 1e-5);
  CHECK(std::abs(r[0] - oracle::phi(0.7)) <= 1e-8);
}

TEST_CASE("shifting logits leaves softmax unchanged") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> z(2 + rng.below(4)), shifted(z.size()), p(z.size()), q(z.size());
    const double c = rng.uniform(-50.0, 50.0);
    for (std::size_t k = 0; k < z.size(); ++k) {
      z[k] = 3.0 * rng.normal();
      shifted[k] = z[k] + c;
    }
    softmax(z, p);
    softmax(shifted, q);
    for (std::size_t k = 0; k < z.size(); ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-12);
  }
}
