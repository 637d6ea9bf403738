#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <ranges>
#include <sstream>

#include "golden.hpp"
#include "jmpoly/maxent.hpp"
#include "jmpoly/relaxation.hpp"

using namespace jmpoly;
using jmpoly::testing::golden_problem;

namespace {

const InteriorPointSolver& backend() {
  static const InteriorPointSolver solver;
  return solver;
}

MomentTarget unit_target(const std::vector<double>& u) {
  MomentTarget t;
  t.p = 1;
  t.degree = static_cast<int>(u.size()) - 1;
  t.exponents = enumerate_basis(0, 1, static_cast<std::size_t>(t.degree));
  t.u = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  t.box = {{0.0, 1.0}};
  return t;
}

// int_0^1 y^j g(y) dy for g the indicator of [0,1/3] u [2/3,1]
std::vector<double> step_moments(int degree) {
  std::vector<double> u;
  for (int j = 0; j <= degree; ++j) {
    const double a = std::pow(1.0 / 3.0, j + 1), b = 1.0 - std::pow(2.0 / 3.0, j + 1);
    u.push_back((a + b) / (j + 1));
  }
  return u;
}

// int_0^1 y^j sqrt(1 - y^2) dy by the recursion I_j = (j-1)/(j+2) I_{j-2}
double circle_moment(int j) {
  if (j == 0) return std::numbers::pi / 4.0;
  if (j == 1) return 1.0 / 3.0;
  return (j - 1.0) / (j + 2.0) * circle_moment(j - 2);
}

MomentSequence dirac_in_x(double c, int order) {
  // x = c, y uniform on [0,1]: z_{a b} = c^a / (b + 1)
  const auto basis = enumerate_basis(1, 1, static_cast<std::size_t>(2 * order));
  std::vector<double> z;
  for (const auto& idx : basis) z.push_back(std::pow(c, idx[0]) / (idx[1] + 1.0));
  return MomentSequence(1, 1, order, z);
}

}  // namespace

TEST(GaussLegendre, Examples) {
  const QuadratureRule one = gauss_legendre_rule(1);
  ASSERT_EQ(one.nodes.size(), 1u);
  EXPECT_DOUBLE_EQ(one.nodes[0], 0.5);
  EXPECT_DOUBLE_EQ(one.weights[0], 1.0);

  const QuadratureRule two = gauss_legendre_rule(2);
  ASSERT_EQ(two.nodes.size(), 2u);
  const double off = 1.0 / (2.0 * std::sqrt(3.0));
  EXPECT_NEAR(two.nodes[0], 0.5 - off, 1e-15);
  EXPECT_NEAR(two.nodes[1], 0.5 + off, 1e-15);
  EXPECT_NEAR(two.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(two.weights[1], 0.5, 1e-15);

  const QuadratureRule three = gauss_legendre_rule(3);
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) s += three.weights[i] * std::pow(three.nodes[i], 5);
  EXPECT_NEAR(s, 1.0 / 6.0, 1e-14);

  EXPECT_THROW(gauss_legendre_rule(0), std::invalid_argument);
}

TEST(GaussLegendre, ExactToDegreeTwoQMinusOne) {
  for (int q : {1, 2, 5, 8, 16, 32, 64}) {
    const QuadratureRule r = gauss_legendre_rule(q, -1.0, 2.0);
    for (int deg = 0; deg <= 2 * q - 1; ++deg) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
      const double exact = (std::pow(2.0, deg + 1) - std::pow(-1.0, deg + 1)) / (deg + 1);
      EXPECT_NEAR(s, exact, 1e-12 * std::max(1.0, std::abs(exact))) << "q=" << q << " deg=" << deg;
    }
  }
  // degree 2q is not integrated exactly
  const QuadratureRule r = gauss_legendre_rule(2);
  double s = 0.0;
  for (std::size_t i = 0; i < 2; ++i) s += r.weights[i] * std::pow(r.nodes[i], 4);
  EXPECT_GT(std::abs(s - 0.2), 1e-3);
}

TEST(TensorRule, IntegratesProducts) {
  const CubatureRule r = tensor_rule(gauss_legendre_rule(4), 2);
  ASSERT_EQ(r.points.size(), 16u);
  double s = 0.0;
  for (std::size_t q = 0; q < r.points.size(); ++q) s += r.weights[q] * std::pow(r.points[q][0], 3) * r.points[q][1];
  EXPECT_NEAR(s, 0.125, 1e-15);
}

TEST(DualValueGradHess, AtZero) {
  const CubatureRule rule = default_cubature(1);
  const MomentTarget t = unit_target({1.0, 0.5, 1.0 / 3.0, 0.25, 0.2});
  const DualEval e = dual_value_grad_hess(Eigen::VectorXd::Zero(5), t.u, t.exponents, rule);
  EXPECT_NEAR(e.value, -1.0, 1e-15);
  EXPECT_LT(e.gradient.lpNorm<Eigen::Infinity>(), 1e-15);
  for (int j = 0; j < 5; ++j) {
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(e.hessian(j, k), -1.0 / (j + k + 1), 1e-14);
  }
  EXPECT_LT((e.hessian - e.hessian.transpose()).cwiseAbs().maxCoeff(), 1e-16);
  EXPECT_LT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e.hessian).eigenvalues().maxCoeff(), 0.0);
}

TEST(DualValueGradHess, MatchesFiniteDifferences) {
  const CubatureRule rule = default_cubature(1);
  const MomentTarget t = unit_target(step_moments(4));
  Eigen::VectorXd lambda(5);
  lambda << 0.3, -1.0, 2.0, 0.5, -1.5;
  const DualEval e = dual_value_grad_hess(lambda, t.u, t.exponents, rule);
  const double h = 1e-6;
  for (int j = 0; j < 5; ++j) {
    Eigen::VectorXd lp = lambda, lm = lambda;
    lp[j] += h;
    lm[j] -= h;
    const DualEval ep = dual_value_grad_hess(lp, t.u, t.exponents, rule);
    const DualEval em = dual_value_grad_hess(lm, t.u, t.exponents, rule);
    EXPECT_NEAR((ep.value - em.value) / (2 * h), e.gradient[j], 1e-7);
    EXPECT_LT(((ep.gradient - em.gradient) / (2 * h) - e.hessian.col(j)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(DualValueGradHess, SignalsOverflow) {
  const CubatureRule rule = default_cubature(1);
  const MomentTarget t = unit_target({1.0, 0.5, 1.0 / 3.0});
  Eigen::VectorXd lambda(3);
  lambda << 0.0, 0.0, 5000.0;
  EXPECT_THROW(dual_value_grad_hess(lambda, t.u, t.exponents, rule), ExpOverflow);
}

TEST(MaxentFit, UniformFixedPoint) {
  const DensityEstimate est = maxent_fit(unit_target({1.0, 0.5, 1.0 / 3.0, 0.25, 0.2}), 2, default_cubature(1));
  EXPECT_LE(est.lambda.lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(MaxentFit, StepDensityMoments) {
  const MomentTarget t = unit_target(step_moments(4));
  EXPECT_NEAR(t.u[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.u[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.u[2], 20.0 / 81.0, 1e-15);
  const CubatureRule rule = default_cubature(1);
  const DensityEstimate est = maxent_fit(t, 2, rule);
  const Eigen::VectorXd mom = density_moments(est, rule);
  EXPECT_LE((mom - t.u).lpNorm<Eigen::Infinity>(), 1e-8);
  EXPECT_NEAR(mom[0], 2.0 / 3.0, 1e-4);
}

TEST(MaxentFit, Example31Fallback) {
  // fitted density against the true coordinate function
  const ParametricProblem prob = golden_problem("example_3_1");
  const MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 8);
  const RelaxationSolution sol = solve_relaxation(assemble_primal(prob, gamma, 4), backend());
  ASSERT_EQ(sol.status, RelaxationStatus::optimal);
  const MomentTarget t = shifted_moments(*sol.z, gamma, 0, 0.0, 2, {{0.0, 1.0}});
  for (int j = 0; j <= 4; ++j) EXPECT_NEAR(t.u[j], circle_moment(j), 5e-3);
  const CubatureRule rule = default_cubature(1);
  const DensityEstimate est = maxent_fit(t, 2, rule);
  EXPECT_LE((density_moments(est, rule) - t.u).lpNorm<Eigen::Infinity>(), 1e-8);
  double sup = 0.0;
  for (int i = 0; i <= 90; ++i) {
    const double y = 0.05 + 0.01 * i;
    sup = std::max(sup, std::abs(density_eval(est, std::vector<double>{y}) - std::sqrt(1.0 - y * y)));
  }
  EXPECT_LE(sup, 0.1);
  EXPECT_DOUBLE_EQ(density_eval(est, std::vector<double>{0.0}), std::exp(est.lambda[0]));
}

TEST(MaxentFit, Errors) {
  const CubatureRule rule = default_cubature(1);
  EXPECT_THROW(maxent_fit(unit_target({0.0, 0.0, 0.0}), 1, rule), MaxentError);
  EXPECT_THROW(maxent_fit(unit_target({1.0, 0.5, 1.0 / 3.0}), 2, rule), MaxentError);
  std::vector<double> many(13, 0.1);
  EXPECT_THROW(maxent_fit(unit_target(many), 6, rule), MaxentError);
}

TEST(MaxentProperty, ConcaveAndMonotoneAlongIterations) {
  const CubatureRule rule = default_cubature(1);
  std::vector<std::vector<double>> targets{step_moments(4), step_moments(6)};
  std::vector<double> circle;
  for (int j = 0; j <= 4; ++j) circle.push_back(circle_moment(j));
  targets.push_back(circle);
  for (const auto& u : targets) {
    const int d = static_cast<int>(u.size() - 1) / 2;
    const DensityEstimate est = maxent_fit(unit_target(u), d, rule);
    ASSERT_FALSE(est.max_hessian_eigenvalue.empty());
    for (double ev : est.max_hessian_eigenvalue) EXPECT_LE(ev, 0.0);
    for (std::size_t i = 1; i < est.values.size(); ++i) EXPECT_GE(est.values[i], est.values[i - 1] - 1e-15);
    EXPECT_LE(est.gradient_norm, 1e-10);
    for (double t : rule.points | std::views::transform([](const auto& pt) { return pt[0]; })) {
      EXPECT_GT(density_eval(est, std::vector<double>{t}), 0.0);
    }
  }
}

TEST(MaxentProperty, Idempotent) {
  const CubatureRule rule = default_cubature(1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd lambda(5);
    for (auto& v : lambda) v = coef(rng);
    DensityEstimate src;
    src.p = 1;
    src.degree = 4;
    src.exponents = enumerate_basis(0, 1, 4);
    src.lambda = lambda;
    src.box = {{0.0, 1.0}};
    const Eigen::VectorXd mom = density_moments(src, rule);
    const DensityEstimate fit = maxent_fit(unit_target({mom.begin(), mom.end()}), 2, rule);
    EXPECT_LE((fit.lambda - lambda).lpNorm<Eigen::Infinity>(), 1e-6) << "trial " << trial;
  }
}

TEST(MaxentFit, TwoParameters) {
  // u = moments of exp(0.5 t1 - t2) on the unit square
  const CubatureRule rule = default_cubature(2);
  DensityEstimate src;
  src.p = 2;
  src.degree = 2;
  src.exponents = enumerate_basis(0, 2, 2);
  src.lambda = Eigen::VectorXd::Zero(6);
  src.lambda[1] = 0.5;
  src.lambda[2] = -1.0;
  src.box = {{0.0, 1.0}, {0.0, 1.0}};
  MomentTarget t;
  t.p = 2;
  t.degree = 2;
  t.exponents = src.exponents;
  t.u = density_moments(src, rule);
  t.box = src.box;
  const DensityEstimate fit = maxent_fit(t, 1, rule);
  EXPECT_LE((fit.lambda - src.lambda).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(DensityEval, Examples) {
  DensityEstimate est;
  est.p = 1;
  est.degree = 2;
  est.exponents = enumerate_basis(0, 1, 2);
  est.lambda = Eigen::VectorXd::Zero(3);
  est.box = {{0.0, 1.0}};
  for (double y : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(density_eval(est, std::vector<double>{y}), 1.0);
  est.lambda[0] = std::log(2.0);
  for (double y : {0.0, 0.7, 1.0}) EXPECT_NEAR(density_eval(est, std::vector<double>{y}), 2.0, 1e-15);
  EXPECT_THROW(density_eval(est, std::vector<double>{1.5}), std::domain_error);
}

TEST(ShiftedMoments, Examples) {
  const MomentSequence z = dirac_in_x(0.7, 3);
  const MarginalMoments gamma = uniform_box_moments({{0.0, 1.0}}, 6);
  const MomentTarget t0 = shifted_moments(z, gamma, 0, 0.0, 2, {{0.0, 1.0}});
  ASSERT_EQ(t0.u.size(), 5);
  for (int b = 0; b <= 4; ++b) EXPECT_DOUBLE_EQ(t0.u[b], z.at(MultiIndex{1, b}));

  const MomentTarget t1 = shifted_moments(z, gamma, 0, -1.0, 2, {{0.0, 1.0}});
  for (int b = 0; b <= 4; ++b) EXPECT_NEAR(t1.u[b], gamma(MultiIndex{b}) + z.at(MultiIndex{1, b}), 1e-15);

  const MomentTarget t2 = shifted_moments(z, gamma, 0, 0.2, 2, {{0.0, 1.0}});
  for (int b = 0; b <= 4; ++b) EXPECT_NEAR(t2.u[b], 0.5 / (b + 1), 1e-15);

  EXPECT_THROW(shifted_moments(z, gamma, 0, 0.0, 3, {{0.0, 1.0}}), std::out_of_range);
  EXPECT_THROW(shifted_moments(z, gamma, 1, 0.0, 2, {{0.0, 1.0}}), DimensionError);
}

TEST(ShiftedMoments, NonUnitBox) {
  // x = c, y uniform on [1,3]: z_{1 b} = c (3^{b+1} - 1) / (2 (b + 1))
  const double c = 0.4;
  const auto basis = enumerate_basis(1, 1, 6);
  std::vector<double> zv;
  for (const auto& idx : basis) {
    zv.push_back(std::pow(c, idx[0]) * (std::pow(3.0, idx[1] + 1) - 1.0) / (2.0 * (idx[1] + 1)));
  }
  const MomentSequence z(1, 1, 3, zv);
  const MarginalMoments gamma = uniform_box_moments({{1.0, 3.0}}, 6);
  const MomentTarget t = shifted_moments(z, gamma, 0, -0.1, 2, {{1.0, 3.0}});
  for (int b = 0; b <= 4; ++b) EXPECT_NEAR(t.u[b], 0.5 / (b + 1), 1e-13);
  const DensityEstimate est = maxent_fit(t, 2, default_cubature(1));
  EXPECT_NEAR(density_eval(est, std::vector<double>{2.5}), 0.5, 1e-8);
}

TEST(LowerBoundForShift, Examples) {
  const double a31 = lower_bound_for_shift(golden_problem("example_3_1"), 0, 3, backend());
  EXPECT_LE(a31, 0.0);
  EXPECT_GT(a31, -1e-3);

  const ParametricProblem p33 = golden_problem("example_3_3");
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(lower_bound_for_shift(p33, k, 3, backend()), -1.0, 1e-3);

  const ProblemFile interval = parse_problem_text(
      "vars x 1\nparams y 1\nparam_box 0 1\nobjective: x1*y1\nconstraint: (x1 - 2)*(3 - x1) >= 0\n");
  const double a = lower_bound_for_shift(interval.effective_problem(), 0, 2, backend());
  EXPECT_LE(a, 2.0);
  EXPECT_NEAR(a, 2.0, 1e-4);
}

TEST(DensityCsv, Format) {
  DensityEstimate est;
  est.p = 1;
  est.degree = 0;
  est.exponents = enumerate_basis(0, 1, 0);
  est.lambda = Eigen::VectorXd::Constant(1, std::log(2.0));
  est.box = {{0.0, 1.0}};
  std::ostringstream out;
  write_density_csv(out, est, {{0.0}, {0.5}});
  EXPECT_EQ(out.str(), "y,h\n0,2\n0.5,2\n");
}
