// Acceptance gate: one PASS/FAIL line per criterion, each measured against
// reference computations in oracles.hpp or written out here.
//
//   acceptance [--known-red N[,N...]] [--only N[,N...]]
//
// Exit status is 0 when every failing criterion is listed in --known-red.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "softad/commands.hpp"
#include "softad/csv.hpp"
#include "softad/datagen.hpp"
#include "softad/harness.hpp"
#include "softad/loss_oracle.hpp"
#include "softad/objectives.hpp"
#include "softad/optimizers.hpp"

using namespace softad;
using oracle::LVec;
using oracle::Vec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vec fd_risk_gradient(const oracle::MlpCase& c, const Vec& w, double h = 1e-6) {
  return oracle::fd_gradient([&](const Vec& v) { return oracle::mean_ld(oracle::example_losses_ld(c.dims, v, c.batch)); },
                             w, h);
}

bool kink_free(const oracle::MlpCase& c, const Vec& w, double margin) {
  return oracle::min_preactivation(c.dims, w, c.batch.inputs) >= margin;
}

// 1. Per-example, ERM, SoftAD, FD-GR and exact-GR directions against central
// differences over 100 random configurations.
Outcome gradient_oracles() {
  Rng rng(101);
  double per_example = 0, erm = 0, softad = 0, fdgr = 0, gr = 0;
  int configs = 0;
  while (configs < 100) {
    const oracle::MlpCase c = oracle::random_case(rng, 2e-2);
    const MlpLossOracle lo(c.dims, c.batch, LossKind::kCrossEntropy);
    const Tensor w = Tensor::vector(c.w);
    const double lambda = rng.uniform(1e-3, 1e-2);
    const double theta = rng.uniform(0.0, 2.0);
    const double sigma = rng.uniform(0.2, 4.0);

    // every point where a gradient is differenced must stay off the ReLU kinks
    const Vec g0 = fd_risk_gradient(c, c.w);
    Vec shifted = c.w;
    for (std::size_t j = 0; j < shifted.size(); ++j) shifted[j] += lambda * g0[j];
    const double h = gr_hvp_step(w);
    Vec plus = c.w, minus = c.w;
    const double gn = oracle::norm(g0);
    for (std::size_t j = 0; j < plus.size(); ++j) {
      plus[j] += h * g0[j] / gn;
      minus[j] -= h * g0[j] / gn;
    }
    if (!kink_free(c, shifted, 1e-3) || !kink_free(c, plus, 1e-3) || !kink_free(c, minus, 1e-3)) continue;
    ++configs;

    const PerExampleResult per = per_example_loss_and_grad(c.dims, c.w, c.batch, LossKind::kCrossEntropy);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      const Vec fd = oracle::fd_gradient(
          [&](const Vec& v) { return oracle::example_loss_ld(c.dims, v, c.batch, i); }, c.w, 1e-6);
      const auto row = per.grads.row(i);
      per_example = std::max(per_example, oracle::rel_error(Vec(row.begin(), row.end()), fd));
    }

    erm = std::max(erm, oracle::rel_error(oracle::to_vec(erm_direction(lo, w).direction), g0));

    const auto soft_objective = [&](const Vec& v) {
      const LVec losses = oracle::example_losses_ld(c.dims, v, c.batch);
      long double s = 0;
      for (long double l : losses) {
        const long double x = (l - theta) / sigma;
        s += std::sqrt(x * x + 1.0L) - 1.0L;
      }
      return theta + sigma * s / losses.size();
    };
    softad = std::max(softad, oracle::rel_error(oracle::to_vec(softad_direction(lo, w, theta, sigma).direction),
                                                oracle::fd_gradient(soft_objective, c.w, 1e-6)));

    // FD-GR with a = lambda: g(w) + (g(w + lambda g(w)) - g(w)), differenced gradients throughout
    const Vec g1 = fd_risk_gradient(c, shifted);
    fdgr = std::max(fdgr, oracle::rel_error(oracle::to_vec(fdgr_direction(lo, w, lambda, lambda).direction), g1));

    // exact GR: gradient of R + (lambda/2)|grad R|^2 by nested differences
    const Vec want = oracle::fd_gradient(
        [&](const Vec& v) {
          const Vec gv = fd_risk_gradient(c, v);
          const long double n = oracle::norm(gv);
          return oracle::mean_ld(oracle::example_losses_ld(c.dims, v, c.batch)) + 0.5L * lambda * n * n;
        },
        c.w, 1e-4);
    gr = std::max(gr, oracle::rel_error(oracle::to_vec(gr_exact_direction(lo, w, lambda).direction), want));
  }
  const bool ok = per_example <= 1e-6 && erm <= 1e-6 && softad <= 1e-6 && fdgr <= 1e-6 && gr <= 1e-4;
  return {ok, "configs=" + std::to_string(configs) + " per_example=" + fmt(per_example) + " erm=" + fmt(erm) +
                  " softad=" + fmt(softad) + " fdgr=" + fmt(fdgr) + " (tol 1e-6) gr_exact=" + fmt(gr) +
                  " (tol 1e-4)"};
}

// Residual of two Flooding steps against w - alpha^2 (g(w + alpha g(w)) - g(w)) / alpha,
// both sides assembled here from the library's mean gradient.
double two_step_residual(const LossOracle& lo, const Vec& w0, double theta, double alpha, bool& crossed) {
  const auto grad = [&](const Vec& v) { return oracle::to_vec(lo.mean(Tensor::vector(v)).grad); };
  const auto risk = [&](const Vec& v) { return lo.risk(Tensor::vector(v)); };
  crossed = risk(w0) < theta;
  Vec w = w0;
  for (int step = 0; step < 2; ++step) {
    const double s = oracle::sgn(risk(w) - theta);
    const Vec g = grad(w);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= alpha * s * g[j];
    if (step == 0) crossed = crossed && risk(w) > theta;
  }
  const Vec g0 = grad(w0);
  Vec ahead = w0;
  for (std::size_t j = 0; j < ahead.size(); ++j) ahead[j] += alpha * g0[j];
  const Vec g1 = grad(ahead);
  Vec rhs = w0;
  for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] -= alpha * alpha * ((g1[j] - g0[j]) / alpha);
  return oracle::distance(w, rhs) / (1.0 + oracle::norm(w0));
}

// 2. Two-step Flooding identity.
Outcome flood_identity() {
  const SquaredDistanceOracle quad(Tensor::matrix(1, 1, {0.0}), 0.5);
  bool crossed = false;
  const double quad_residual = two_step_residual(quad, {0.95}, 0.5, 0.1, crossed);
  const bool quad_crossed = crossed;
  // the two Flooding iterates by hand: 0.95 -> 1.045 -> 0.9405
  Tensor x = Tensor::vector({0.95});
  for (int s = 0; s < 2; ++s) x = x - flood_direction(quad, x, 0.5).direction * 0.1;
  const bool exact = std::abs(x[0] - 0.9405) <= 1e-15;
  const double lib_quad = flood_two_step_residual(quad, Tensor::vector({0.95}), 0.5, 0.1) / 1.95;

  Rng rng(202);
  double worst = 0;
  int crossings = 0;
  while (crossings < 20) {
    const oracle::MlpCase c = oracle::random_case(rng, 0.0);
    const MlpLossOracle lo(c.dims, c.batch, LossKind::kCrossEntropy);
    const Tensor w = Tensor::vector(c.w);
    const MeanResult m = lo.mean(w);
    const double gn = l2_norm(m.grad);
    if (gn < 1e-3) continue;
    // engineered crossing: an ascent step of length 0.05 lifts the risk past a threshold set halfway
    const double alpha = 0.05 / gn;
    Tensor up = w;
    axpy(alpha, m.grad, up);
    const double theta = 0.5 * (m.loss + lo.risk(up));
    const double r = two_step_residual(lo, c.w, theta, alpha, crossed);
    if (!crossed) continue;
    ++crossings;
    worst = std::max(worst, r);
    worst = std::max(worst, flood_two_step_residual(lo, w, theta, alpha) / (1.0 + l2_norm(w)));
  }
  const bool ok = quad_crossed && exact && quad_residual <= 1e-10 && lib_quad <= 1e-10 && worst <= 1e-10;
  return {ok, "quadratic x_t+2=" + format_double(x[0]) + " residual=" + fmt(std::max(quad_residual, lib_quad)) +
                  " mlp_crossings=" + std::to_string(crossings) + " worst_residual=" + fmt(worst) +
                  " (tol 1e-10)"};
}

// 3. SAM and FD-GR relations.
Outcome sam_fdgr() {
  Rng rng(303);
  double fdgr_vs_exact = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rng.below(6), d = 1 + rng.below(5);
    Vec pts(n * d);
    for (double& p : pts) p = rng.normal();
    const SquaredDistanceOracle q(Tensor::matrix(n, d, pts), rng.uniform(0.2, 2.0));
    Tensor w = Tensor::zeros(d);
    for (std::size_t j = 0; j < d; ++j) w[j] = 2.0 * rng.normal();
    const double lambda = rng.uniform(0.01, 1.0);
    fdgr_vs_exact = std::max(fdgr_vs_exact, l2_norm(fdgr_direction(q, w, lambda, lambda).direction -
                                                    gr_exact_direction(q, w, lambda).direction));
  }

  double sam = 0;
  double ratio_lo = INFINITY, ratio_hi = 0;
  int ratio_cases = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const oracle::MlpCase c = oracle::random_case(rng, 5e-2);
    const MlpLossOracle lo(c.dims, c.batch, LossKind::kCrossEntropy);
    const Tensor w = Tensor::vector(c.w);
    sam = std::max(sam, oracle::rel_error(oracle::to_vec(sam_direction(lo, w, 1e-8).direction),
                                          oracle::to_vec(erm_direction(lo, w).direction)));
    const double lambda = 0.5;
    const Tensor exact = gr_exact_direction(lo, w, lambda).direction;
    const double e1 = l2_norm(fdgr_direction(lo, w, lambda, 1e-2).direction - exact);
    const double e2 = l2_norm(fdgr_direction(lo, w, lambda, 1e-3).direction - exact);
    ratio_lo = std::min(ratio_lo, e1 / e2);
    ratio_hi = std::max(ratio_hi, e1 / e2);
    ++ratio_cases;
  }
  const bool ok = fdgr_vs_exact <= 1e-10 && sam <= 1e-6 && ratio_lo >= 5.0 && ratio_hi <= 20.0;
  return {ok, "fdgr_vs_exact=" + fmt(fdgr_vs_exact) + " (tol 1e-10) sam_vs_erm=" + fmt(sam) +
                  " (tol 1e-6) error_ratio=[" + fmt(ratio_lo) + "," + fmt(ratio_hi) + "] over " +
                  std::to_string(ratio_cases) + " cases (want [5,20])"};
}

// 4. Quadratic demo with defaults.
Outcome quadratic_demo() {
  std::stringstream ss;
  write_quadratic_demo({}, ss);
  const CsvTable t = read_csv(ss);
  const std::size_t last = t.rows.size() - 1;
  const double soft_gap = std::abs(t.number(last, "f_softad") - 0.5);

  // first index after which |x_t - 1| never increases
  std::size_t settled = 0;
  for (std::size_t r = 1; r <= last; ++r) {
    if (std::abs(t.number(r, "x_softad") - 1.0) > std::abs(t.number(r - 1, "x_softad") - 1.0)) settled = r;
  }
  int flips = 0;
  for (std::size_t r = last - 99; r <= last; ++r) {
    flips += (t.number(r - 1, "f_flood") > 0.5) != (t.number(r, "f_flood") > 0.5) ? 1 : 0;
  }
  const double x50 = 2.0 * std::pow(0.9, 50);
  const double gd_error = std::abs(t.number(50, "f_gd") - 0.5 * x50 * x50);
  const bool ok = last == 500 && soft_gap <= 1e-3 && settled <= last / 2 && flips >= 20 && gd_error <= 1e-12;
  return {ok, "softad |f-0.5|=" + fmt(soft_gap) + " monotone_from_t=" + std::to_string(settled) +
                  " flood_flips_last100=" + std::to_string(flips) + " gd_f50_error=" + fmt(gd_error)};
}

// Gradient of theta + (1/n) sum rho(|w - z_i|^2 - theta) on the 2D mean problem.
Vec softad_mean_gradient(const Tensor& pts, const Tensor& w, double theta) {
  Vec g(2, 0.0);
  const std::size_t n = pts.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = w[0] - pts.at(i, 0), dy = w[1] - pts.at(i, 1);
    const double s = oracle::phi(dx * dx + dy * dy - theta);
    g[0] += s * 2.0 * dx / n;
    g[1] += s * 2.0 * dy / n;
  }
  return g;
}

// 5. Normalized momentum invariants and running stationarity.
Outcome momentum_invariants() {
  const MeanDemo demo = make_mean_demo(0);
  const SquaredDistanceOracle q(demo.points, 1.0);
  double step_error = 0, clip_excess = 0;
  std::vector<double> stationarity;
  for (std::uint64_t horizon : {100u, 1000u, 10000u}) {
    Tensor w = demo.outside_candidate;
    const NormalizedMomentumSchedule s = normalized_momentum_schedule(horizon, max_squared_gradient_norm(q, w));
    NormalizedMomentumOptimizer opt(2, s.step_size, s.momentum, s.clip_radius);
    Rng rng = Rng(5).substream(horizon);
    double total = 0;
    for (std::uint64_t t = 0; t < horizon; ++t) {
      total += oracle::norm(softad_mean_gradient(demo.points, w, demo.theta));
      // one sampled point: phi(l_i - theta) grad l_i
      const std::size_t i = rng.below(8);
      const double dx = w[0] - demo.points.at(i, 0), dy = w[1] - demo.points.at(i, 1);
      const double wt = oracle::phi(dx * dx + dy * dy - demo.theta);
      const Tensor before = w;
      opt.step(w, Tensor::vector({2.0 * wt * dx, 2.0 * wt * dy}));
      const double moved = l2_norm(w - before);
      step_error = std::max(step_error, std::min(std::abs(moved - s.step_size), moved));
      clip_excess = std::max(clip_excess, opt.last_clipped_norm() - s.clip_radius);
    }
    stationarity.push_back(total / horizon);
  }
  const bool monotone = stationarity[1] <= stationarity[0] && stationarity[2] <= stationarity[1];
  const bool ok = step_error <= 1e-12 && clip_excess <= 0.0 && monotone;
  return {ok, "step_norm_error=" + fmt(step_error) + " clip_excess=" + fmt(std::max(clip_excess, 0.0)) +
                  " stationarity(T=1e2,1e3,1e4)=" + fmt(stationarity[0]) + "," + fmt(stationarity[1]) + "," +
                  fmt(stationarity[2])};
}

// 6. Zeroth-order unbiasedness.
Outcome zeroth_order() {
  const ZerothOrderParams p{0.1, 0.0};
  const auto h = [&](double x) { return p.theta + oracle::rho(x * x - p.theta); };
  const double exact = (h(0.7 + p.radius) - h(0.7 - p.radius)) / (2.0 * p.radius);
  Rng rng(606);
  const int n = 100000;
  long double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double g = zeroth_order_gradient(p, [](const Tensor& v) { return v[0] * v[0]; }, Tensor::vector({0.7}), rng)[0];
    s += g;
    ss += static_cast<long double>(g) * g;
  }
  const double mean = static_cast<double>(s / n);
  const double se = static_cast<double>(std::sqrt((ss - n * (s / n) * (s / n)) / (n - 1) / n));
  const double z = std::abs(mean - exact) / se;
  return {z <= 3.0, "mean=" + fmt(mean) + " exact=" + fmt(exact) + " standard_errors=" + fmt(z) + " (tol 3)"};
}

std::vector<MethodRun> g_comparison;

ComparisonConfig comparison_config() {
  ComparisonConfig cc;
  cc.base.epochs = 500;
  cc.methods = {ObjectiveSpec::erm(), ObjectiveSpec::flood(0.0), ObjectiveSpec::softad(0.0)};
  cc.seeds = {0, 1, 2, 3, 4};
  return cc;
}

const std::vector<MethodRun>& comparison() {
  if (g_comparison.empty()) g_comparison = run_comparison(comparison_config());
  return g_comparison;
}

// 7. Generalization-gap ordering at desk scale.
Outcome gap_trend() {
  const auto& runs = comparison();
  const auto mean_gap = [](const MethodRun& r) {
    long double train = 0, test = 0;
    for (const TrialRecord& t : r.trials) {
      train += t.rows.back().train_loss;
      test += t.rows.back().test_loss;
    }
    return static_cast<double>((test - train) / r.trials.size());
  };
  const double erm = mean_gap(runs[0]), flood = mean_gap(runs[1]), soft = mean_gap(runs[2]);
  int ordered = 0;
  std::string per_seed;
  for (std::size_t s = 0; s < runs[0].trials.size(); ++s) {
    const double e = runs[0].trials[s].gap(), f = runs[1].trials[s].gap(), g = runs[2].trials[s].gap();
    ordered += g < f && f < e ? 1 : 0;
    per_seed += " seed" + std::to_string(runs[0].trials[s].seed) + "=" + fmt(g) + "/" + fmt(f) + "/" + fmt(e);
  }
  double acc_lo = INFINITY, acc_hi = 0;
  for (const MethodRun& r : runs) {
    double acc = 0;
    for (const TrialRecord& t : r.trials) acc += t.rows.back().test_acc / r.trials.size();
    acc_lo = std::min(acc_lo, acc);
    acc_hi = std::max(acc_hi, acc);
  }
  const bool mean_ordered = soft < flood && flood < erm;
  const bool ok = mean_ordered && ordered >= 4 && acc_hi - acc_lo <= 0.03;
  return {ok, "mean_gap softad/flood/erm=" + fmt(soft) + "/" + fmt(flood) + "/" + fmt(erm) +
                  " ordered_seeds=" + std::to_string(ordered) + "/5 (want >=4) acc_spread=" + fmt(acc_hi - acc_lo) +
                  " gaps" + per_seed};
}

// 8. Selection protocol and summaries.
Outcome protocol() {
  const auto& runs = comparison();
  const ComparisonConfig cc = comparison_config();
  bool grid_ok = cc.grid.size() == 40 && cc.grid.front() == 0.01 && cc.grid.back() == 2.0;
  for (std::size_t k = 1; k < cc.grid.size(); ++k) {
    grid_ok = grid_ok && std::abs((cc.grid[k] - cc.grid[k - 1]) - 1.99 / 39) <= 1e-12;
  }
  // exhaustive rescan: highest final validation accuracy, first (smallest) value on ties
  bool rescan_ok = true;
  for (std::size_t m = 1; m < runs.size(); ++m) {
    for (std::size_t s = 0; s < runs[m].grids.size(); ++s) {
      const GridResult& g = runs[m].grids[s];
      std::size_t best = 0;
      for (std::size_t k = 1; k < g.records.size(); ++k) {
        if (g.records[k].rows.back().val_acc > g.records[best].rows.back().val_acc) best = k;
      }
      rescan_ok = rescan_ok && g.values == cc.grid && best == g.best_index &&
                  runs[m].selected[s] == cc.grid[best] &&
                  runs[m].trials[s].rows.back() == g.records[best].rows.back();
    }
  }
  const std::vector<double> values{0.1, 0.2, 0.3};
  std::vector<TrialRecord> tied(3);
  const double accs[] = {0.8, 0.9, 0.9};
  for (int k = 0; k < 3; ++k) {
    tied[k].rows.push_back({});
    tied[k].rows.back().val_acc = accs[k];
  }
  const bool tie_ok = values[select_best(values, tied)] == 0.2;

  // mean/std summaries recomputed here
  const auto summary = summarize(runs);
  std::stringstream ss;
  write_summary(ss, summary);
  const auto back = read_summary(ss);
  bool summary_ok = back == summary;
  for (const MethodRun& r : runs) {
    std::vector<double> acc;
    for (const TrialRecord& t : r.trials) acc.push_back(t.rows.back().test_acc);
    double mean = 0;
    for (double a : acc) mean += a / acc.size();
    double var = 0;
    for (double a : acc) var += (a - mean) * (a - mean) / (acc.size() - 1);
    summary_ok = summary_ok && std::abs(parse_double(back.at(r.name + ".test_acc.mean")) - mean) <= 1e-12 &&
                 std::abs(parse_double(back.at(r.name + ".test_acc.std")) - std::sqrt(var)) <= 1e-12;
    if (!r.selected.empty()) {
      double hm = 0;
      for (double v : r.selected) hm += v / r.selected.size();
      summary_ok = summary_ok && std::abs(parse_double(back.at(r.name + ".hyperparameter.mean")) - hm) <= 1e-12 &&
                   back.count(r.name + ".hyperparameter.std") == 1;
    }
  }
  const bool ok = grid_ok && rescan_ok && tie_ok && summary_ok;
  return {ok, std::string("grid=") + (grid_ok ? "ok" : "bad") + " rescan=" + (rescan_ok ? "ok" : "bad") +
                  " tie_rule=" + (tie_ok ? "ok" : "bad") + " summary=" + (summary_ok ? "ok" : "bad")};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[entry.path().filename().string()] = ss.str();
  }
  return files;
}

// 9. Byte-identical outputs across repeated runs of every subcommand.
Outcome determinism() {
  using Command = int (*)(const Config&, const fs::path&, std::ostream&);
  const std::pair<Command, const char*> commands[] = {
      {cmd_demo_quadratic, ""},
      {cmd_demo_2dmean, "seed=3\n"},
      {cmd_train, "epochs=5\nhidden=8\nn_test=500\ntrials=2\ngrid_points=4\nmethods=erm,flood,softad,sam\n"
                  "write_data=true\n"},
      {cmd_sweep_heatmap, "epochs=10\nn_test=500\nthetas=0.1,0.6\nsigmas=0.5,2\n"},
      {cmd_verify, "seed=2\n"},
  };
  const fs::path root = fs::temp_directory_path() / "softad_acceptance_determinism";
  std::size_t compared = 0, mismatched = 0;
  for (std::size_t k = 0; k < std::size(commands); ++k) {
    std::map<std::string, std::string> first;
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = root / (std::to_string(k) + "_" + std::to_string(run));
      fs::remove_all(dir);
      std::ostringstream log;
      commands[k].first(Config::parse_string(commands[k].second), dir, log);
      const auto files = read_dir(dir);
      if (run == 0) {
        first = files;
        continue;
      }
      mismatched += files.size() == first.size() ? 0 : 1;
      for (const auto& [name, bytes] : files) {
        ++compared;
        const auto it = first.find(name);
        mismatched += it != first.end() && it->second == bytes ? 0 : 1;
      }
    }
  }
  fs::remove_all(root);
  return {mismatched == 0 && compared > 0,
          "files_compared=" + std::to_string(compared) + " mismatched=" + std::to_string(mismatched)};
}

std::set<int> parse_list(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known_red, only;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--known-red") {
      known_red = parse_list(argv[i + 1]);
    } else if (flag == "--only") {
      only = parse_list(argv[i + 1]);
    } else {
      std::cerr << "usage: acceptance [--known-red N,..] [--only N,..]\n";
      return 2;
    }
  }

  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gradient_oracles", gradient_oracles},     {"two_step_flood_identity", flood_identity},
      {"sam_fdgr_relations", sam_fdgr},           {"quadratic_demo", quadratic_demo},
      {"normalized_momentum", momentum_invariants}, {"zeroth_order_unbiased", zeroth_order},
      {"synthetic_gap_trend", gap_trend},         {"protocol_fidelity", protocol},
      {"determinism", determinism},
  };
  std::vector<int> failed;
  for (std::size_t k = 0; k < std::size(criteria); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && only.count(id) == 0) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) failed.push_back(id);
    std::cout << "criterion " << id << " " << criteria[k].first << ": " << (o.passed ? "PASS" : "FAIL") << " "
              << o.detail << " time=" << fmt(secs) << "s" << std::endl;
  }
  bool unexpected = false;
  for (int id : failed) unexpected = unexpected || known_red.count(id) == 0;
  std::cout << "acceptance: " << failed.size() << " failing";
  if (!failed.empty()) {
    std::cout << " (";
    for (std::size_t k = 0; k < failed.size(); ++k) std::cout << (k ? "," : "") << failed[k];
    std::cout << ")";
  }
  if (!known_red.empty()) {
    std::cout << "; known red:";
    for (int id : known_red) std::cout << " " << id;
  }
  std::cout << std::endl;
  return unexpected ? 1 : 0;
}
