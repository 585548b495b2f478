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

#include "clipnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "clipnet/error.hpp"

namespace clipnet {
namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

void OptimizerConfig::validate() const {
  require(eta > 0.0 && std::isfinite(eta), "learning rate eta must be positive");
  require(k_bar >= 1, "inner iteration cap k_bar must be at least 1");
  require(outer_iters >= 1, "outer_iters must be at least 1");
  if (batch_size) require(*batch_size >= 1, "batch_size must be positive");
  require(early_stop_tol >= 0.0, "early_stop_tol must be nonnegative");
}

double soft_threshold(double u, double gamma) {
  // (u - sign(u) gamma) 1(|u| >= gamma)
  if (std::abs(u) < gamma) return 0.0;
  const double s = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
  return u - s * gamma;
}

Eigen::VectorXd prox_step(std::span<const double> theta, std::span<const double> grad,
                          std::span<const double> h, double eta, const PenaltyConfig& cfg) {
  require(theta.size() == grad.size() && theta.size() == h.size(),
          "prox_step needs theta, grad and h of equal length");
  require(eta > 0.0, "prox_step needs eta > 0");
  const double slope = cfg.slope();
  const double gamma = eta * slope;
  Eigen::VectorXd out(static_cast<Eigen::Index>(theta.size()));
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double u = theta[j] - eta * (grad[j] - slope * h[j]);
    out(j) = soft_threshold(u, gamma);
  }
  return out;
}

double sparsity(std::span<const double> theta) {
  if (theta.empty()) return 0.0;
  const auto nz = std::count_if(theta.begin(), theta.end(), [](double v) { return v != 0.0; });
  return static_cast<double>(nz) / static_cast<double>(theta.size());
}

double sparsity_above(std::span<const double> theta, double tau) {
  if (theta.empty()) return 0.0;
  const auto nz = std::count_if(theta.begin(), theta.end(),
                                [tau](double v) { return std::abs(v) > tau; });
  return static_cast<double>(nz) / static_cast<double>(theta.size());
}

ClippedL1Trainer::ClippedL1Trainer(const MlpSpec& spec, LossKind loss, const Dataset& data,
                                   const PenaltyConfig& penalty, const OptimizerConfig& opt)
    : spec_(spec), loss_(loss), data_(data), penalty_(penalty), opt_(opt), rng_(opt.seed) {
  spec_.validate();
  penalty_.validate();
  opt_.validate();
  require(!data_.empty(), "training data is empty");
  full_batch_ = !opt_.batch_size || *opt_.batch_size >= data_.size();
  order_.resize(data_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  cursor_ = order_.size();
}

Evaluation ClippedL1Trainer::evaluate(const Eigen::VectorXd& theta) const {
  if (full_batch_) {
    RiskAndGrad rg = risk_and_grad(spec_, as_span(theta), loss_, data_);
    return {rg.risk, std::move(rg.grad)};
  }
  return {empirical_risk(spec_, as_span(theta), loss_, data_), {}};
}

Eigen::VectorXd ClippedL1Trainer::batch_gradient(const Eigen::VectorXd& theta,
                                                 const Evaluation* full) {
  if (full_batch_) {
    if (full && full->grad.size() == theta.size()) return full->grad;
    return risk_and_grad(spec_, as_span(theta), loss_, data_).grad;
  }
  const std::size_t b = *opt_.batch_size;
  if (cursor_ + b > order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
  }
  std::span<const std::size_t> rows(order_.data() + cursor_, b);
  cursor_ += b;
  return risk_and_grad(spec_, as_span(theta), loss_, data_, rows).grad;
}

InnerResult ClippedL1Trainer::inner_loop(const Eigen::VectorXd& theta_t, const Evaluation& at_t,
                                         double eta) {
  const Eigen::VectorXd h = h_vector(as_span(theta_t), penalty_.tau);
  const double q_t = surrogate_q_star_h(as_span(theta_t), h, at_t.risk, penalty_);

  Eigen::VectorXd theta_k = theta_t;
  Eigen::VectorXd grad_k = batch_gradient(theta_t, &at_t);
  for (std::size_t k = 0;; ++k) {
    Eigen::VectorXd next = prox_step(as_span(theta_k), as_span(grad_k), as_span(h), eta, penalty_);
    if (!next.allFinite()) {
      fail(ErrorCode::kNumeric, "non-finite iterate at inner step " + std::to_string(k) +
                                    " (eta = " + std::to_string(eta) + ", max |theta_j| = " +
                                    std::to_string(max_abs(theta_k)) + ")");
    }
    Evaluation ev = evaluate(next);
    const double q = surrogate_q_star_h(as_span(next), h, ev.risk, penalty_);
    if (!std::isfinite(q)) {
      fail(ErrorCode::kNumeric, "non-finite surrogate objective at inner step " +
                                    std::to_string(k) + " (eta = " + std::to_string(eta) + ")");
    }
    const bool decreased = q <= q_t;
    if (decreased || k >= opt_.k_bar) {
      InnerResult r;
      r.theta = std::move(next);
      r.k_star = k;
      r.decreased = decreased;
      r.risk = ev.risk;
      r.grad = std::move(ev.grad);
      r.surrogate = q;
      return r;
    }
    grad_k = batch_gradient(next, &ev);
    theta_k = std::move(next);
  }
}

FitReport ClippedL1Trainer::fit(Eigen::VectorXd theta, const TraceSink& sink) {
  require(static_cast<std::size_t>(theta.size()) == param_count(spec_),
          "initial parameter vector has the wrong length");
  const bool strict = opt_.monotone_policy == MonotonePolicy::kStrict;

  FitReport report;
  Evaluation at = evaluate(theta);
  double q = objective_q(as_span(theta), at.risk, penalty_);
  if (!std::isfinite(q)) fail(ErrorCode::kNumeric, "initial objective is not finite");
  report.initial_objective = q;
  report.trace.reserve(opt_.outer_iters);

  double eta = opt_.eta;
  std::size_t flat_streak = 0;
  for (std::size_t t = 0; t < opt_.outer_iters; ++t) {
    std::optional<InnerResult> res;
    std::size_t halvings = 0;
    while (true) {
      try {
        res = inner_loop(theta, at, eta);
      } catch (const Error& e) {
        if (!strict || e.code() != ErrorCode::kNumeric) throw;
        res.reset();
      }
      if (!strict || (res && res->decreased)) break;
      if (halvings == opt_.max_halvings) break;
      eta *= 0.5;
      ++halvings;
    }
    if (strict && !(res && res->decreased)) {
      // theta^(t+1) = theta^(t)
      report.stalled = true;
      break;
    }

    theta = std::move(res->theta);
    at = Evaluation{res->risk, std::move(res->grad)};
    const double q_prev = q;
    q = objective_q(as_span(theta), at.risk, penalty_);
    if (!std::isfinite(q)) {
      fail(ErrorCode::kNumeric, "objective became non-finite at outer iteration " +
                                    std::to_string(t));
    }

    TraceRecord rec;
    rec.iteration = t;
    rec.objective = q;
    rec.risk = at.risk;
    rec.penalty = q - at.risk;
    rec.sparsity = sparsity(as_span(theta));
    rec.inner_steps = res->k_star;
    rec.eta = eta;
    rec.decreased = res->decreased;
    report.trace.push_back(rec);
    if (sink) sink(rec);

    if (opt_.early_stop_patience > 0) {
      const double rel = (q_prev - q) / std::max(std::abs(q_prev), 1e-300);
      flat_streak = rel < opt_.early_stop_tol ? flat_streak + 1 : 0;
      if (flat_streak >= opt_.early_stop_patience) {
        report.early_stopped = true;
        break;
      }
    }
  }

  report.max_abs_param = max_abs(theta);
  report.final_params = unflatten(spec_, as_span(theta));
  report.final_theta = std::move(theta);
  return report;
}

InnerResult inner_loop(const Eigen::VectorXd& theta_t, const MlpSpec& spec, LossKind loss,
                       const Dataset& data, const PenaltyConfig& cfg, const OptimizerConfig& opt) {
  ClippedL1Trainer trainer(spec, loss, data, cfg, opt);
  const Evaluation at = trainer.evaluate(theta_t);
  return trainer.inner_loop(theta_t, at, opt.eta);
}

FitReport fit_from(const Eigen::VectorXd& theta0, const Dataset& data, const MlpSpec& spec,
                   LossKind loss, const PenaltyConfig& penalty, const OptimizerConfig& opt,
                   const TraceSink& sink) {
  ClippedL1Trainer trainer(spec, loss, data, penalty, opt);
  return trainer.fit(theta0, sink);
}

FitReport fit(const Dataset& data, const MlpSpec& spec, LossKind loss,
              const PenaltyConfig& penalty, const OptimizerConfig& opt, const TraceSink& sink) {
  const Eigen::VectorXd theta0 = flatten(init_params(spec, opt.seed));
  return fit_from(theta0, data, spec, loss, penalty, opt, sink);
}

FitReport adam_fit(const Dataset& data, const MlpSpec& spec, LossKind loss,
                   const OptimizerConfig& opt, const TraceSink& sink,
                   const std::function<void(std::size_t, const Eigen::VectorXd&)>& checkpoint,
                   AdamConfig adam, const Eigen::VectorXd* theta0) {
  spec.validate();
  opt.validate();
  require(!data.empty(), "training data is empty");

  Eigen::VectorXd theta = theta0 ? *theta0 : flatten(init_params(spec, opt.seed));
  if (static_cast<std::size_t>(theta.size()) != param_count(spec)) {
    fail(ErrorCode::kShapeMismatch, "starting point has " + std::to_string(theta.size()) +
                                        " parameters, expected " + std::to_string(param_count(spec)));
  }
  const Eigen::Index p = theta.size();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(p);

  const bool full_batch = !opt.batch_size || *opt.batch_size >= data.size();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  std::mt19937_64 rng(opt.seed);

  FitReport report;
  report.trace.reserve(opt.outer_iters);
  double b1_pow = 1.0, b2_pow = 1.0;
  for (std::size_t step = 0; step < opt.outer_iters; ++step) {
    RiskAndGrad rg;
    if (full_batch) {
      rg = risk_and_grad(spec, as_span(theta), loss, data);
    } else {
      const std::size_t b = *opt.batch_size;
      if (cursor + b > order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      rg = risk_and_grad(spec, as_span(theta), loss, data, {order.data() + cursor, b});
      cursor += b;
    }
    if (step == 0) report.initial_objective = rg.risk;

    b1_pow *= adam.beta1;
    b2_pow *= adam.beta2;
    m1 = adam.beta1 * m1 + (1.0 - adam.beta1) * rg.grad;
    m2 = adam.beta2 * m2 + (1.0 - adam.beta2) * rg.grad.cwiseAbs2();
    const double c1 = 1.0 / (1.0 - b1_pow);
    const double c2 = 1.0 / (1.0 - b2_pow);
    theta.array() -= opt.eta * (m1.array() * c1) / ((m2.array() * c2).sqrt() + adam.epsilon);
    if (!theta.allFinite()) {
      fail(ErrorCode::kNumeric, "Adam produced a non-finite iterate at step " + std::to_string(step));
    }

    TraceRecord rec;
    rec.iteration = step;
    rec.objective = rg.risk;
    rec.risk = rg.risk;
    rec.sparsity = sparsity(as_span(theta));
    rec.eta = opt.eta;
    report.trace.push_back(rec);
    if (sink) sink(rec);
    if (checkpoint) checkpoint(step, theta);
  }

  report.max_abs_param = max_abs(theta);
  report.final_params = unflatten(spec, as_span(theta));
  report.final_theta = std::move(theta);
  return report;
}

}  // namespace clipnet
