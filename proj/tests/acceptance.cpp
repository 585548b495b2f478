// Copyright 2026 The clipnet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Usage: acceptance [criterion ...]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "clipnet/datagen.hpp"
#include "clipnet/harness.hpp"
#include "clipnet/optimizer.hpp"
#include "clipnet/penalty.hpp"
#include "clipnet/theory.hpp"
#include "prox_oracle.hpp"
#include "test_support.hpp"

using namespace clipnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

MlpSpec default_spec(std::size_t d) {
  MlpSpec s;
  s.input_dim = d;
  s.hidden_widths = {100, 100, 100, 100, 100};
  s.activation = Activation::relu();
  return s;
}

Outcome monotone_descent() {
  std::size_t worst = 0;
  double worst_rel = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset d = gen_regression(3, 100, seed);
    OptimizerConfig opt;
    opt.eta = 1e-2;
    opt.outer_iters = 200;
    opt.seed = seed;
    const auto r = fit(d, default_spec(10), LossKind::kSquare, {1e-3, 1e-2}, opt);
    double prev = r.initial_objective;
    ok = ok && r.trace.size() == 200;
    for (const auto& t : r.trace) {
      const double rel = (t.objective - prev) / std::abs(prev);
      if (rel > worst_rel) {
        worst_rel = rel;
        worst = t.iteration;
      }
      prev = t.objective;
    }
  }
  ok = ok && worst_rel <= 1e-12;
  return {ok, fmt("5 seeds x 200 iterations, worst relative increase %.3g", worst_rel) +
                  (worst_rel > 0 ? " at iteration " + std::to_string(worst) : "")};
}

Outcome prox_vs_grid() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> th(-4, 4), g(-2, 2), eta(0.01, 1), s(0, 2);
  std::uniform_int_distribution<int> hh(-1, 1);
  const test::Grid grid;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const test::ScalarProx p{th(rng), g(rng), static_cast<double>(hh(rng)), eta(rng), s(rng)};
    const double tau = 0.1;
    const std::vector<double> t{p.theta}, gr{p.g}, h{p.h};
    const double closed =
        prox_step({t.data(), 1}, {gr.data(), 1}, {h.data(), 1}, p.eta, {p.s * tau, tau})(0);
    const double oracle = test::grid_argmin_convex([&](double x) { return p.objective(x); }, grid);
    worst = std::max(worst, std::abs(closed - oracle));
  }
  return {worst < 1e-5, fmt("1000 subproblems, max |closed - grid| = %.3g", worst)};
}

Outcome majorization() {
  MlpSpec s;
  s.input_dim = 3;
  s.hidden_widths = {4, 4};
  s.activation = Activation::tanh();
  const Dataset d = test::random_regression(20, 3, 3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-1.5, 1.5), lt(-5, 0);
  std::bernoulli_distribution small(0.3);
  const std::size_t p = param_count(s);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const PenaltyConfig cfg{std::pow(10.0, lt(rng)), std::pow(10.0, lt(rng) / 2)};
    Eigen::VectorXd theta(p), theta_t(p);
    for (std::size_t j = 0; j < p; ++j) {
      theta(j) = c(rng) * (small(rng) ? cfg.tau : 1.0);
      theta_t(j) = c(rng) * (small(rng) ? cfg.tau : 1.0);
    }
    const double risk = empirical_risk(s, as_span(theta), LossKind::kSquare, d);
    const double risk_t = empirical_risk(s, as_span(theta_t), LossKind::kSquare, d);
    const double q = objective_q(as_span(theta), risk, cfg);
    const double q_t = objective_q(as_span(theta_t), risk_t, cfg);
    const double qs = surrogate_q_star(as_span(theta), as_span(theta_t), risk, cfg);
    const double qs_t = surrogate_q_star(as_span(theta_t), as_span(theta_t), risk_t, cfg);
    if (qs < q - 1e-12 * std::abs(q)) ++bad;
    if (std::abs(qs_t - q_t) > 1e-12 * std::abs(q_t)) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " failures over 1000 instances"};
}

Outcome gradients() {
  const std::vector<Activation> acts = {
      Activation::relu(),       Activation(ActivationTag::kLeakyReLU, 0.1),
      Activation::sigmoid(),    Activation::tanh(),
      Activation::softplus(),   Activation(ActivationTag::kSwish),
      Activation(ActivationTag::kELU, 1.0), Activation(ActivationTag::kSoftsign),
      Activation(ActivationTag::kISRU, 1.0), Activation(ActivationTag::kISRLU, 1.0)};
  std::mt19937_64 rng(4);
  double worst = 0.0;
  std::size_t bad = 0;
  for (int inst = 0; inst < 100; ++inst) {
    std::uniform_int_distribution<std::size_t> dim(1, 4), width(1, 5), depth(1, 3), n(1, 6);
    MlpSpec s;
    s.input_dim = dim(rng);
    s.hidden_widths.assign(depth(rng), 0);
    for (auto& w : s.hidden_widths) w = width(rng);
    s.activation = acts[inst % acts.size()];
    const auto loss = static_cast<LossKind>(inst % 3);
    const Dataset d = loss == LossKind::kSquare ? test::random_regression(n(rng), s.input_dim, rng())
                                                : test::random_classification(n(rng), s.input_dim, rng());
    Eigen::VectorXd theta = flatten(init_params(s, rng()));
    std::normal_distribution<double> g(0.0, 0.3);
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) += g(rng);
    const Eigen::VectorXd an = risk_and_grad(s, as_span(theta), loss, d).grad;
    const Eigen::VectorXd fd = test::fd_gradient(s, theta, loss, d, 1e-5);
    for (Eigen::Index j = 0; j < an.size(); ++j) {
      const double err = std::abs(an(j) - fd(j));
      const double scale = std::max(std::abs(an(j)), std::abs(fd(j)));
      // near-zero coordinates are below the difference quotient's resolution
      if (scale < 1e-6) {
        if (err > 1e-8) ++bad;
        continue;
      }
      worst = std::max(worst, err / scale);
      if (err / scale >= 1e-4) ++bad;
    }
  }
  return {bad == 0, fmt("100 instances, 10 activations, 3 losses; max relative error %.3g", worst)};
}

Outcome exact_sparsification() {
  // tau is not pinned down, so every tau of the default tuning grid is tried
  const Dataset d = gen_regression(1, 200, 5);
  const double base = 1e-3 * lambda_anchor(200);
  OptimizerConfig opt;
  opt.outer_iters = 200;
  opt.seed = 5;
  const auto spec = default_spec(10);
  bool ok = true;
  std::string detail = fmt("lambda=%.4g / x1e4:", base);
  for (double tau : TuningGrids{}.taus) {
    const auto a = fit(d, spec, LossKind::kSquare, {base, tau}, opt);
    const auto b = fit(d, spec, LossKind::kSquare, {base * 1e4, tau}, opt);
    const double sa = sparsity(as_span(a.final_theta));
    const double sb = sparsity(as_span(b.final_theta));
    ok = ok && sa < 1.0 && sb < 0.05;
    detail += fmt(" tau=%g: %.4f / %.4f;", tau, sa, sb);
  }
  return {ok, detail + " (need < 1 / < 0.05)"};
}

struct SimulationRuns {
  bool done = false;
  ExperimentResult f1, f5;
};

SimulationRuns& simulations() {
  static SimulationRuns runs;
  if (!runs.done) {
    ExperimentConfig cfg;
    cfg.function = 1;
    cfg.record_wall_time = false;
    runs.f1 = run_experiment(cfg);
    cfg.function = 5;
    cfg.estimators = {Estimator::kSdnn};
    runs.f5 = run_experiment(cfg);
    runs.done = true;
  }
  return runs;
}

std::vector<double> column(const ExperimentResult& r, Estimator e, bool sparse) {
  std::vector<double> out;
  for (const auto& rec : r.records) {
    if (rec.estimator != e) continue;
    out.push_back(sparse ? rec.sparsity.value_or(NAN) : rec.metric);
  }
  return out;
}

Outcome sparsity_ordering() {
  auto& runs = simulations();
  const double m1 = median(column(runs.f1, Estimator::kSdnn, true));
  const double m5 = median(column(runs.f5, Estimator::kSdnn, true));
  return {m1 < m5 && m1 >= 0.05 && m1 <= 0.45,
          fmt("median SDNN sparsity f1 %.4f, f5 %.4f (need f1 < f5, f1 in [0.05, 0.45])", m1, m5)};
}

Outcome calibration() {
  bool ok = true;
  std::string detail = "noise share";
  for (int m = 1; m <= kNumTargets; ++m) {
    const double s = noise_share(m, 1000000, 1);
    ok = ok && s >= 0.045 && s <= 0.055;
    detail += fmt(" f%.0f=%.4f", m, s);
  }
  return {ok, detail + " (need [0.045, 0.055])"};
}

Outcome lipschitz() {
  theory::LipschitzSweep sweep;
  sweep.seed = 8;
  const auto r = theory::verify_lipschitz(sweep);
  return {r.violations == 0 && r.trials == 1000,
          fmt("%.0f trials, %.0f violations, max ratio %.4f", static_cast<double>(r.trials),
              static_cast<double>(r.violations), r.max_ratio)};
}

Outcome covering() {
  struct Case {
    double L, N, B, S, delta, tau, expected;
  };
  // expected = 2 S (L+1) log((L+1)(N+1)B / (delta - tau (L+1)((N+1)B)^(L+1)))
  const std::vector<Case> cases = {
      {2, 3, 1, 5, 12, 0, 0.0},
      {1, 1, 1, 1, 4.0, 0, 0.0},
      {1, 1, 1, 1, 1.0, 0, 5.545177444479562},
      {0, 0, 1, 1, 0.5, 0, 1.3862943611198906},
      {1, 3, 2, 10, 0.1, 0, 203.00695260935305},
      {2, 10, 1, 4, 0.01, 0, 194.4402659389097},
      {3, 99, 1.5, 100, 1e-3, 0, 10643.747947358626},
      {1, 1, 1, 1, 1.8, 0.1, 5.545177444479562},
      {0, 4, 1, 2, 0.5, 0.05, 11.982929094215963},
      {2, 2, 1, 3, 1.0, 1e-3, 41.07048721132805},
  };
  std::size_t bad = 0;
  std::string first_bad;
  for (const auto& c : cases) {
    theory::ClassParams p;
    p.L = c.L;
    p.N = c.N;
    p.B = c.B;
    p.S = c.S;
    p.delta = c.delta;
    p.tau = c.tau;
    const double v = c.tau == 0 ? theory::covering_bound(p).value : theory::covering_bound_clipped(p).value;
    if (v != c.expected) {
      if (bad++ == 0) first_bad = fmt(" first mismatch %.17g vs %.17g", v, c.expected);
    }
  }
  // tau -> 0
  theory::ClassParams p;
  p.L = 2;
  p.N = 5;
  p.B = 1;
  p.S = 7;
  p.delta = 0.05;
  const double plain = theory::covering_bound(p).value;
  double prev = INFINITY;
  bool converges = true;
  for (double tau : {1e-6, 1e-8, 1e-10, 1e-12, 1e-14, 1e-16, 0.0}) {
    p.tau = tau;
    const double gap = theory::covering_bound_clipped(p).value - plain;
    converges = converges && gap >= 0 && gap <= prev;
    prev = gap;
  }
  converges = converges && prev == 0.0;
  return {bad == 0 && converges,
          std::to_string(cases.size() - bad) + "/10 exact matches, tau sweep " +
              (converges ? "converges" : "does not converge") + first_bad};
}

Outcome identity() {
  const auto net = theory::identity_net(0.0, 1e-2, Activation::sigmoid());
  bool decreasing = true;
  double prev = INFINITY;
  std::string sweep;
  for (int i = 0; i < 4; ++i) {
    const double K = net.K * std::pow(2.0, i);
    const double e = theory::identity_net_for_scale(K, 0.0, Activation::sigmoid(), 10000).sup_error;
    decreasing = decreasing && e < prev;
    prev = e;
    sweep += fmt(" %.3g", e);
  }
  return {net.sup_error <= 1e-2 && decreasing,
          fmt("sup error %.4g at K=%.4g; doubling sweep:", net.sup_error, net.K) + sweep};
}

Outcome threshold_chain() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1), lt(-4, 0);
  std::uniform_int_distribution<int> len(1, 50);
  std::bernoulli_distribution zero(0.2), near(0.3);
  std::size_t bad = 0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<double> t(len(rng));
    const double tau = std::pow(10.0, lt(rng));
    for (auto& v : t) v = zero(rng) ? 0.0 : u(rng) * (near(rng) ? 2 * tau : 1.0);
    if (i % 7 == 0) t[0] = tau;  // boundary
    const std::span<const double> s(t.data(), t.size());
    const double cn = clipped_norm(s, tau);
    const auto ht = theory::hard_threshold(s, tau);
    if (static_cast<double>(theory::l0_norm(as_span(ht))) > cn) ++bad;
    if (cn > static_cast<double>(theory::l0_norm(s))) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " failures over 1e5 vectors"};
}

Outcome estimator_direction() {
  auto& runs = simulations();
  const double sd = median(column(runs.f1, Estimator::kSdnn, false));
  const double ns = median(column(runs.f1, Estimator::kNsdnn, false));
  return {sd <= ns, fmt("median L2 error on f1: SDNN %.4f, NSDNN %.4f", sd, ns)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"monotone descent", monotone_descent},
      {"prox closed form vs grid", prox_vs_grid},
      {"majorization", majorization},
      {"gradient check", gradients},
      {"exact sparsification", exact_sparsification},
      {"sparsity ordering", sparsity_ordering},
      {"calibration", calibration},
      {"Lipschitz bound", lipschitz},
      {"covering bounds", covering},
      {"identity construction", identity},
      {"hard-threshold chain", threshold_chain},
      {"estimator comparison", estimator_direction},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %-26s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
