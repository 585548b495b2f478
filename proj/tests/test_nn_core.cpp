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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "clipnet/activation.hpp"
#include "clipnet/error.hpp"
#include "clipnet/network.hpp"
#include "test_support.hpp"

using namespace clipnet;

namespace {

MlpSpec make_spec(std::size_t d, std::vector<std::size_t> hidden, Activation act = Activation::relu()) {
  MlpSpec s;
  s.input_dim = d;
  s.hidden_widths = std::move(hidden);
  s.activation = act;
  return s;
}

}  // namespace

TEST(ParamCount, SmallSpecs) {
  EXPECT_EQ(param_count(make_spec(2, {3})), 13u);
  EXPECT_EQ(param_count(make_spec(1, {1})), 4u);
}

TEST(ParamCount, PaperArchitecture) {
  // 100*10+100 + 4*(100*100+100) + 100+1
  const std::size_t expected = (100 * 10 + 100) + 4 * (100 * 100 + 100) + (100 + 1);
  EXPECT_EQ(expected, 41601u);
  EXPECT_EQ(param_count(make_spec(10, {100, 100, 100, 100, 100})), expected);
}

TEST(MlpSpec, DepthAndWidth) {
  const auto s = make_spec(3, {4, 7, 2});
  EXPECT_EQ(s.depth(), 3u);
  EXPECT_EQ(s.width(), 7u);
  EXPECT_THROW(make_spec(3, {}).validate(), Error);
  EXPECT_THROW(make_spec(3, {4, 0}).validate(), Error);
  EXPECT_THROW(make_spec(0, {4}).validate(), Error);
}

TEST(Forward, ZeroNetwork) {
  const auto s = make_spec(3, {5, 5});
  const auto p = zero_params(s);
  const double x[] = {0.3, -1.0, 2.0};
  EXPECT_EQ(forward(p, s, x), 0.0);
}

TEST(Forward, SingleReluNode) {
  const auto s = make_spec(1, {1});
  auto p = zero_params(s);
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 1.0;
  const double neg[] = {-2.0};
  const double pos[] = {1.5};
  EXPECT_EQ(forward(p, s, neg), 0.0);
  EXPECT_EQ(forward(p, s, pos), 1.5);
}

TEST(Forward, ShapeMismatchNamesLayer) {
  const auto s = make_spec(2, {3});
  auto p = zero_params(s);
  p.weights[1] = Eigen::MatrixXd::Zero(1, 4);
  const double x[] = {0.1, 0.2};
  try {
    forward(p, s, x);
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("layer 2"), std::string::npos) << e.what();
  }
  const double bad_x[] = {0.1, 0.2, 0.3};
  EXPECT_THROW(forward(zero_params(s), s, bad_x), Error);
}

TEST(Forward, OutputClamp) {
  auto s = make_spec(1, {1});
  s.output_bound = 2.0;
  auto p = zero_params(s);
  p.biases[1](0) = 5.0;
  const double x[] = {0.0};
  EXPECT_EQ(forward(p, s, x), 5.0);
  EXPECT_EQ(forward(p, s, x, {true}), 2.0);
}

TEST(Forward, BatchedMatchesScalar) {
  const auto s = make_spec(4, {6, 5}, Activation::tanh());
  const auto p = init_params(s, 7);
  const Eigen::VectorXd theta = flatten(p);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd xs(20, 4);
  for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = u(rng);
  const Eigen::VectorXd batched = predict(s, as_span(theta), xs);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Eigen::VectorXd row = xs.row(i).transpose();
    EXPECT_NEAR(batched(i), forward(p, s, as_span(row)), 1e-13);
  }
}

TEST(Flatten, OrderingConvention) {
  const auto s = make_spec(1, {1});
  auto p = zero_params(s);
  p.weights[0](0, 0) = 2;
  p.biases[0](0) = 3;
  p.weights[1](0, 0) = 4;
  p.biases[1](0) = 5;
  const Eigen::VectorXd v = flatten(p);
  ASSERT_EQ(v.size(), 4);
  EXPECT_EQ(v(0), 2);
  EXPECT_EQ(v(1), 3);
  EXPECT_EQ(v(2), 4);
  EXPECT_EQ(v(3), 5);
}

TEST(Flatten, ColumnMajorWeights) {
  const auto s = make_spec(2, {2});
  auto p = zero_params(s);
  p.weights[0] << 1, 2, 3, 4;  // rows (1,2), (3,4)
  const Eigen::VectorXd v = flatten(p);
  EXPECT_EQ(v(0), 1);
  EXPECT_EQ(v(1), 3);
  EXPECT_EQ(v(2), 2);
  EXPECT_EQ(v(3), 4);
}

TEST(Flatten, RoundTrip) {
  const auto s = make_spec(3, {4, 2});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(param_count(s));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
  const auto p = unflatten(s, as_span(v));
  EXPECT_EQ(flatten(p), v);
  EXPECT_EQ(unflatten(s, as_span(flatten(p))), p);
}

TEST(Flatten, WrongLength) {
  const auto s = make_spec(3, {4});
  Eigen::VectorXd v = Eigen::VectorXd::Zero(param_count(s) + 1);
  try {
    unflatten(s, as_span(v));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(InitParams, Deterministic) {
  const auto s = make_spec(3, {4, 4});
  EXPECT_EQ(init_params(s, 11), init_params(s, 11));
  EXPECT_FALSE(init_params(s, 11) == init_params(s, 12));
}

TEST(InitParams, FanBound) {
  const auto s = make_spec(10, {100, 100, 100, 100, 100});
  const auto p = init_params(s, 0);
  const double first = std::sqrt(6.0 / 110.0);
  EXPECT_NEAR(first, 0.2335, 1e-4);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double fan = static_cast<double>(p.weights[l].rows() + p.weights[l].cols());
    EXPECT_LE(p.weights[l].cwiseAbs().maxCoeff(), std::sqrt(6.0 / fan));
    if (fan >= 110.0) EXPECT_LE(p.weights[l].cwiseAbs().maxCoeff(), first);
    EXPECT_TRUE(p.biases[l].isZero());
  }
}

TEST(Grad, ZeroNetworkZeroResidual) {
  const auto s = make_spec(3, {4});
  Dataset d;
  d.inputs = Eigen::MatrixXd::Constant(1, 3, 0.5);
  d.targets = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd g = grad(zero_params(s), s, LossKind::kSquare, d);
  EXPECT_TRUE(g.isZero());
}

TEST(Grad, DuplicatedBatchIsMeanInvariant) {
  const auto s = make_spec(3, {4}, Activation::tanh());
  const auto p = init_params(s, 2);
  const Dataset d = test::random_regression(5, 3, 9);
  Dataset twice = d;
  twice.inputs.resize(10, 3);
  twice.inputs << d.inputs, d.inputs;
  twice.targets.resize(10);
  twice.targets << d.targets, d.targets;
  const Eigen::VectorXd g1 = grad(p, s, LossKind::kSquare, d);
  const Eigen::VectorXd g2 = grad(p, s, LossKind::kSquare, twice);
  EXPECT_LE((g1 - g2).cwiseAbs().maxCoeff(), 1e-14 * (1.0 + g1.cwiseAbs().maxCoeff()));
}

TEST(Grad, SmallNetMatchesFiniteDifferences) {
  const auto s = make_spec(3, {4}, Activation::tanh());
  const auto p = init_params(s, 5);
  const Dataset d = test::random_regression(5, 3, 6);
  const Eigen::VectorXd theta = flatten(p);
  const Eigen::VectorXd g = grad(p, s, LossKind::kSquare, d);
  const Eigen::VectorXd fd = test::fd_gradient(s, theta, LossKind::kSquare, d, 1e-5);
  test::expect_grad_close(g, fd, 1e-4, 1e-7);
}

// Smooth activations: every coordinate within 1e-4 relative (1e-7 absolute floor).
TEST(Grad, RandomSmoothInstances) {
  const std::vector<Activation> acts = {
      Activation::sigmoid(), Activation::tanh(), Activation::softplus(),
      Activation(ActivationTag::kSwish), Activation(ActivationTag::kSoftsign),
      Activation(ActivationTag::kISRU, 1.0)};
  std::mt19937_64 rng(2024);
  for (int inst = 0; inst < 120; ++inst) {
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
    // nonzero biases so every path is exercised
    std::normal_distribution<double> g(0.0, 0.3);
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) += g(rng);
    const auto rg = risk_and_grad(s, as_span(theta), loss, d);
    const Eigen::VectorXd fd = test::fd_gradient(s, theta, loss, d, 1e-5);
    SCOPED_TRACE("instance " + std::to_string(inst) + " " + s.activation.name());
    test::expect_grad_close(rg.grad, fd, 1e-4, 1e-7);
    EXPECT_NEAR(rg.risk, empirical_risk(s, as_span(theta), loss, d), 1e-12 * (1 + rg.risk));
  }
}

TEST(Grad, RowSubsetMatchesSubsetData) {
  const auto s = make_spec(2, {3, 3});
  const Dataset d = test::random_regression(8, 2, 4);
  const Eigen::VectorXd theta = flatten(init_params(s, 1));
  const std::vector<std::size_t> rows = {6, 1, 3};
  const auto a = risk_and_grad(s, as_span(theta), LossKind::kSquare, d, rows);
  const auto b = risk_and_grad(s, as_span(theta), LossKind::kSquare, d.subset(rows));
  EXPECT_NEAR(a.risk, b.risk, 1e-14);
  EXPECT_LE((a.grad - b.grad).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Grad, NonFiniteReportsLayer) {
  const auto s = make_spec(1, {2});
  Eigen::VectorXd theta = flatten(zero_params(s));
  theta(0) = std::numeric_limits<double>::infinity();
  Dataset d;
  d.inputs = Eigen::MatrixXd::Constant(1, 1, 0.5);
  d.targets = Eigen::VectorXd::Zero(1);
  try {
    risk_and_grad(s, as_span(theta), LossKind::kSquare, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
    EXPECT_NE(std::string(e.what()).find("layer"), std::string::npos) << e.what();
  }
}

TEST(EmpiricalRisk, Examples) {
  const auto s = make_spec(1, {1});
  Dataset d;
  d.inputs = Eigen::MatrixXd::Constant(2, 1, 0.5);
  d.targets = Eigen::Vector2d(1.0, -1.0);
  EXPECT_DOUBLE_EQ(empirical_risk(zero_params(s), s, LossKind::kSquare, d), 1.0);
  Dataset empty;
  empty.inputs.resize(0, 1);
  EXPECT_THROW(empirical_risk(zero_params(s), s, LossKind::kSquare, empty), Error);
}

TEST(EmpiricalRisk, PerfectPredictor) {
  const auto s = make_spec(2, {3});
  const auto p = init_params(s, 4);
  Dataset d = test::random_regression(7, 2, 8);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Eigen::VectorXd row = d.inputs.row(i).transpose();
    d.targets(i) = forward(p, s, as_span(row));
  }
  EXPECT_NEAR(empirical_risk(p, s, LossKind::kSquare, d), 0.0, 1e-28);
}

TEST(EmpiricalRisk, MatchesNaiveSummation) {
  const auto s = make_spec(3, {5, 2}, Activation::sigmoid());
  const auto p = init_params(s, 10);
  for (auto loss : {LossKind::kSquare, LossKind::kLogistic, LossKind::kExponential}) {
    const Dataset d = loss == LossKind::kSquare ? test::random_regression(13, 3, 2)
                                                : test::random_classification(13, 3, 2);
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double f = test::naive_forward(p, s, d.inputs.row(i).transpose());
      const double y = d.targets(i);
      switch (loss) {
        case LossKind::kSquare: total += (y - f) * (y - f); break;
        case LossKind::kLogistic: total += std::log(1.0 + std::exp(-y * f)); break;
        case LossKind::kExponential: total += std::exp(-y * f); break;
      }
    }
    EXPECT_NEAR(empirical_risk(p, s, loss, d), total / d.size(), 1e-13);
  }
}

TEST(Relu, PositiveHomogeneity) {
  const auto s = make_spec(3, {6});
  auto p = init_params(s, 3);
  p.biases[0].setZero();
  p.biases[1].setZero();
  auto doubled = p;
  doubled.weights[0] *= 2.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double x[] = {u(rng), u(rng), u(rng)};
    EXPECT_NEAR(forward(doubled, s, x), 2.0 * forward(p, s, x), 1e-14);
  }
}

TEST(Activation, FamiliesAndParse) {
  EXPECT_EQ(Activation::relu().family(), ActivationFamily::kPiecewiseLinear);
  EXPECT_EQ(Activation::parse("leaky_relu:0.2").family(), ActivationFamily::kPiecewiseLinear);
  EXPECT_DOUBLE_EQ(Activation::parse("leaky_relu:0.2").param(), 0.2);
  for (const char* n : {"sigmoid", "tanh", "softplus", "swish", "elu", "softsign", "isru", "isrlu"}) {
    const auto a = Activation::parse(n);
    EXPECT_EQ(a.family(), ActivationFamily::kLocallyQuadratic) << n;
    EXPECT_EQ(Activation::parse(a.name()), a) << n;
  }
  EXPECT_THROW(Activation::parse("gelu"), Error);
}

// Recorded Lipschitz constant bounds the derivative on a dense grid, and is attained.
TEST(Activation, LipschitzConstants) {
  for (const char* n : {"relu", "leaky_relu", "sigmoid", "tanh", "softplus", "swish", "elu",
                        "softsign", "isru", "isrlu"}) {
    const auto a = Activation::parse(n);
    double sup = 0.0;
    for (int i = -200000; i <= 200000; ++i) {
      const double z = i * 1e-4;
      const double h = 1e-6;
      sup = std::max(sup, std::abs(a.value(z + h) - a.value(z - h)) / (2 * h));
    }
    EXPECT_LE(sup, a.lipschitz() * (1 + 1e-6)) << n;
    EXPECT_GE(sup, a.lipschitz() * (1 - 1e-3)) << n;
  }
}

TEST(Activation, DerivativesMatchDifferences) {
  for (const char* n : {"sigmoid", "tanh", "softplus", "swish", "elu", "softsign", "isru", "isrlu"}) {
    const auto a = Activation::parse(n);
    for (double z : {-3.1, -0.7, 0.4, 1.3, 2.9}) {
      const double h = 1e-5;
      EXPECT_NEAR(a.deriv(z), (a.value(z + h) - a.value(z - h)) / (2 * h), 1e-8) << n << " " << z;
      EXPECT_NEAR(a.deriv2(z), (a.deriv(z + h) - a.deriv(z - h)) / (2 * h), 1e-7) << n << " " << z;
    }
  }
}
