#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "golden.hpp"
#include "jmpoly/postproc.hpp"
#include "jmpoly/relaxation.hpp"

using namespace jmpoly;
using jmpoly::testing::golden_problem;

namespace {

const InteriorPointSolver& backend() {
  static const InteriorPointSolver solver;
  return solver;
}

// Order-4 moments of a problem given as text or a golden name, cached.
const MomentSequence& order4(const std::string& key, const ParametricProblem& prob) {
  static std::map<std::string, MomentSequence> cache;
  auto it = cache.find(key);
  if (it == cache.end()) {
    const MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 8);
    const RelaxationSolution sol = solve_relaxation(assemble_primal(prob, gamma, 4), backend());
    if (sol.status != RelaxationStatus::optimal || !sol.z) throw std::runtime_error("relaxation failed for " + key);
    it = cache.emplace(key, *sol.z).first;
  }
  return it->second;
}

const MomentSequence& golden4(const std::string& name) { return order4(name, golden_problem(name)); }

// Exact moments of x = g(y), y uniform on [0,1], with g boolean.
MomentSequence boolean_moments(int order, double (*integral)(int)) {
  const auto basis = enumerate_basis(1, 1, static_cast<std::size_t>(2 * order));
  std::vector<double> z;
  for (const auto& idx : basis) z.push_back(idx[0] == 0 ? 1.0 / (idx[1] + 1.0) : integral(idx[1]));
  return MomentSequence(1, 1, order, z);
}

double step_integral(int b) {
  return (std::pow(1.0 / 3.0, b + 1) + 1.0 - std::pow(2.0 / 3.0, b + 1)) / (b + 1);
}
double one_integral(int b) { return 1.0 / (b + 1); }
double zero_integral(int) { return 0.0; }

}  // namespace

TEST(FunctionalEstimate, Examples) {
  const MomentSequence& z = golden4("example_3_1");
  EXPECT_DOUBLE_EQ(functional_estimate(Polynomial::constant(1, 1, 1.0), z), z.at(MultiIndex{0, 0}));
  EXPECT_NEAR(functional_estimate(Polynomial::constant(1, 1, 1.0), z), 1.0, 1e-7);
  EXPECT_NEAR(functional_estimate(poly_parse("x1", 1, 1), z), std::numbers::pi / 4.0, 5e-3);
  // second moments are only loosely pinned by the objective at order 4
  EXPECT_NEAR(functional_estimate(poly_parse("x1^2", 1, 1), z), 2.0 / 3.0, 1e-2);
  EXPECT_THROW(functional_estimate(poly_parse("x1*y1", 1, 1), z), PostprocError);
  EXPECT_DOUBLE_EQ(functional_estimate(poly_parse("x1*y1", 1, 1), z, true), z.at(MultiIndex{1, 1}));
  EXPECT_THROW(functional_estimate(poly_parse("x1^9", 1, 1), z), PostprocError);
}

TEST(FunctionalEstimate, Linear) {
  const MomentSequence& z = golden4("example_3_2");
  const Polynomial h1 = poly_parse("x1^2 - 3*x2 + 0.5*x1*x2^3", 2, 1);
  const Polynomial h2 = poly_parse("2 + x2^4 - x1", 2, 1);
  for (double a : {-2.5, 0.0, 1.0, 7.0}) {
    const double lhs = functional_estimate(h1 * Polynomial::constant(2, 1, a) + h2, z);
    const double rhs = a * functional_estimate(h1, z) + functional_estimate(h2, z);
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(MeanVector, Examples) {
  const std::vector<double> m32 = mean_vector(golden4("example_3_2"));
  ASSERT_EQ(m32.size(), 2u);
  EXPECT_NEAR(m32[0], -0.6232, 5e-3);

  const ProblemFile identity = jmpoly::testing::golden("identity");
  const ParametricProblem ip = identity.effective_problem();
  InteriorPointSettings tight;
  tight.tolerance = 1e-12;
  const RelaxationSolution sol =
      solve_relaxation(assemble_primal(ip, marginal_moments(ip.marginal, 1, 2 * identity.order), identity.order),
                       InteriorPointSolver(tight));
  ASSERT_EQ(sol.status, RelaxationStatus::optimal);
  const std::vector<double> id = mean_vector(*sol.z);
  ASSERT_EQ(id.size(), 1u);
  EXPECT_NEAR(id[0], 0.5, 1e-6);

  // x*(y) = 0.3 for every y
  const ProblemFile constant = parse_problem_text(
      "vars x 1\nparams y 1\nparam_box 0 1\nobjective: (x1 - 0.3)^2\nconstraint: x1*(1 - x1) >= 0\n");
  EXPECT_NEAR(mean_vector(order4("constant", constant.effective_problem()))[0], 0.3, 1e-6);

  EXPECT_THROW(mean_vector(MomentSequence(1, 1, 0, {1.0})), PostprocError);
}

TEST(Persistency, ExactSequences) {
  const ParametricProblem prob = golden_problem("example_3_5");
  ASSERT_TRUE(is_boolean(prob, 0));
  const Persistency step = persistency(prob, boolean_moments(2, step_integral), 0, 1e-8);
  EXPECT_NEAR(step.value, 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(step.clamped);
  EXPECT_DOUBLE_EQ(persistency(prob, boolean_moments(2, one_integral), 0, 1e-8).value, 1.0);
  EXPECT_DOUBLE_EQ(persistency(prob, boolean_moments(2, zero_integral), 0, 1e-8).value, 0.0);
}

TEST(Persistency, ClampsAndFlags) {
  const ParametricProblem prob = golden_problem("example_3_5");
  std::vector<double> z = boolean_moments(1, one_integral).values();
  z[1] = 1.0 + 1e-3;
  const Persistency over = persistency(prob, MomentSequence(1, 1, 1, z), 0, 1e-8);
  EXPECT_DOUBLE_EQ(over.value, 1.0);
  EXPECT_DOUBLE_EQ(over.raw, 1.0 + 1e-3);
  EXPECT_TRUE(over.clamped);
  z[1] = -1e-9;
  const Persistency under = persistency(prob, MomentSequence(1, 1, 1, z), 0, 1e-8);
  EXPECT_DOUBLE_EQ(under.value, 0.0);
  EXPECT_FALSE(under.clamped);
}

TEST(Persistency, RequiresBoolean) {
  const ParametricProblem prob = golden_problem("identity");
  EXPECT_FALSE(is_boolean(prob, 0));
  EXPECT_THROW(persistency(prob, golden4("identity"), 0, 1e-8), PostprocError);
}

TEST(Persistency, RelaxationStaysInRange) {
  const ParametricProblem prob = golden_problem("example_3_5");
  const MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 8);
  for (int order = min_relaxation_order(prob); order <= 4; ++order) {
    const RelaxationSolution sol = solve_relaxation(assemble_primal(prob, gamma, order), backend());
    ASSERT_EQ(sol.status, RelaxationStatus::optimal);
    const Persistency p = persistency(prob, *sol.z, 0, sol.solver_tolerance);
    EXPECT_GE(p.raw, -10.0 * sol.solver_tolerance);
    EXPECT_LE(p.raw, 1.0 + 10.0 * sol.solver_tolerance);
    EXPECT_FALSE(p.clamped);
  }
}

TEST(CoordinateMomentCurve, Example31) {
  const CoordinateMoments c = coordinate_moment_curve(golden4("example_3_1"), 0, 4);
  ASSERT_EQ(c.entries.size(), 5u);
  // int_0^1 y^b sqrt(1 - y^2) dy
  const double ref[] = {std::numbers::pi / 4.0, 1.0 / 3.0, std::numbers::pi / 16.0, 2.0 / 15.0, std::numbers::pi / 32.0};
  for (int b = 0; b <= 4; ++b) EXPECT_NEAR(c.entries.at(MultiIndex{b}), ref[b], 5e-3) << "beta " << b;
}

TEST(CoordinateMomentCurve, Example32) {
  const CoordinateMoments c = coordinate_moment_curve(golden4("example_3_2"), 0, 4);
  const double listed[] = {-0.6232, -0.4058, -0.2971, -0.2328, -0.1907};
  for (int b = 0; b <= 4; ++b) EXPECT_NEAR(c.entries.at(MultiIndex{b}), listed[b], 5e-3) << "beta " << b;
}

TEST(CoordinateMomentCurve, IdentityToy) {
  const CoordinateMoments c = coordinate_moment_curve(golden4("identity"), 0, 7);
  ASSERT_EQ(c.entries.size(), 8u);
  for (const auto& [beta, v] : c.entries) EXPECT_NEAR(v, 1.0 / (beta[0] + 2.0), 1e-5) << "beta " << beta[0];
  EXPECT_THROW(coordinate_moment_curve(golden4("identity"), 0, 8), PostprocError);
}

TEST(CoordinateMomentCurve, Bounded) {
  // every golden problem keeps x inside the unit ball
  for (const std::string name : {"example_3_1", "example_3_2", "example_3_3", "example_3_4", "identity"}) {
    const MomentSequence& z = golden4(name);
    const MarginalMoments gamma = uniform_box_moments({{0.0, 1.0}}, 8);
    for (std::size_t k = 0; k < z.n(); ++k) {
      for (const auto& [beta, v] : coordinate_moment_curve(z, k, 7).entries) {
        EXPECT_LE(std::abs(v), gamma(beta) + 1e-5) << name << " beta " << beta[0];
      }
    }
  }
}

TEST(CoordinateMomentCurve, CsvFormat) {
  CoordinateMoments c;
  c.k = 0;
  c.p = 1;
  c.entries[MultiIndex{0}] = 0.5;
  c.entries[MultiIndex{1}] = 1.0 / 3.0;
  std::ostringstream out;
  write_curve_csv(out, c);
  EXPECT_EQ(out.str(), "beta,value\n0,0.5\n1,0.333333333333\n");
}
