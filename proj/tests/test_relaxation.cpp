#include <gtest/gtest.h>

#include <map>
#include <string>

#include <Eigen/Dense>

#include "golden.hpp"
#include "jmpoly/marginal.hpp"
#include "jmpoly/oracle.hpp"
#include "jmpoly/relaxation.hpp"

using namespace jmpoly;
using jmpoly::testing::golden_problem;

namespace {

const InteriorPointSolver& backend() {
  static const InteriorPointSolver solver;
  return solver;
}

struct Solved {
  ParametricProblem prob;
  MarginalMoments gamma;
  std::vector<RelaxationSolution> sols;
};

// Orders i_0..4 of a golden problem, solved once per test binary.
const Solved& solved(const std::string& name) {
  static std::map<std::string, Solved> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    ParametricProblem prob = golden_problem(name);
    MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 8);
    auto sols = solve_primal(prob, gamma, min_relaxation_order(prob), 4, backend());
    it = cache.emplace(name, Solved{std::move(prob), std::move(gamma), std::move(sols)}).first;
  }
  return it->second;
}

const RelaxationSolution& at_order(const std::string& name, int order) {
  for (const auto& s : solved(name).sols) {
    if (s.order == order) return s;
  }
  throw std::runtime_error("order not solved");
}

Polynomial univariate(const std::vector<double>& coefs) {
  Polynomial p(0, 1);
  for (std::size_t k = 0; k < coefs.size(); ++k) p.add_term(MultiIndex{static_cast<int>(k)}, coefs[k]);
  return p;
}

const std::vector<std::string> kFeasibleGolden{"example_3_1", "example_3_2", "example_3_3", "example_3_4",
                                               "example_3_5", "identity"};

}  // namespace

TEST(AssemblePrimal, Example31Sizes) {
  const ParametricProblem prob = golden_problem("example_3_1");
  const MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 6);
  const PrimalProgram prog = assemble_primal(prob, gamma, 3);
  EXPECT_EQ(prog.program.num_vars, 28u);
  ASSERT_EQ(prog.program.psd_blocks.size(), 4u);
  EXPECT_EQ(prog.program.psd_blocks[0].side(), 10u);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_EQ(prog.program.psd_blocks[k].side(), 6u);
  EXPECT_EQ(prog.marginal_rows.size(), basis_size(1, 6));
  EXPECT_TRUE(prog.program.check().empty());
}

TEST(AssemblePrimal, EqualitiesBecomePairedBlocks) {
  const ParametricProblem prob = golden_problem("example_3_4");
  const MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 4);
  const PrimalProgram prog = assemble_primal(prob, gamma, 2);
  // moment matrix, +/- for two equalities, one box constraint
  EXPECT_EQ(prog.program.psd_blocks.size(), 6u);
  int negated = 0;
  for (const auto& b : prog.blocks) negated += b.sign < 0 ? 1 : 0;
  EXPECT_EQ(negated, 2);
}

TEST(AssemblePrimal, Errors) {
  const ParametricProblem prob = golden_problem("example_3_1");
  const MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 4);
  EXPECT_THROW(assemble_primal(prob, gamma, 1), std::exception);
  EXPECT_THROW(assemble_primal(prob, gamma, 3), std::exception);
}

TEST(SolvePrimal, ConstantObjective) {
  const ParametricProblem prob =
      make_box_problem(Polynomial::constant(1, 1, 2.5), {{poly_parse("1 - x1^2", 1, 1), false}}, {{0.0, 1.0}});
  const MarginalMoments gamma = marginal_moments(prob.marginal, 1, 6);
  for (const auto& s : solve_primal(prob, gamma, 1, 3, backend())) {
    ASSERT_EQ(s.status, RelaxationStatus::optimal) << s.message;
    EXPECT_NEAR(s.rho, 2.5, 1e-7);
    ASSERT_TRUE(s.dual_poly);
    const Polynomial residual = *s.dual_poly - Polynomial::constant(1, 1, 2.5);
    for (const auto& [idx, c] : residual.terms()) EXPECT_NEAR(c, 0.0, 1e-6);
  }
}

TEST(SolvePrimal, Example31ReferenceValues) {
  EXPECT_NEAR(at_order("example_3_1", 3).rho, -0.250146, 1e-6);
  EXPECT_NEAR(at_order("example_3_1", 4).rho, -0.25001786, 1e-5);
}

TEST(SolvePrimal, Example32ReferenceValues) {
  EXPECT_NEAR(at_order("example_3_2", 3).rho, -0.8117, 1e-4);
  EXPECT_NEAR(at_order("example_3_2", 4).rho, -0.81162, 1e-5);
}

TEST(RecoverDual, Example32Coefficients) {
  const std::vector<double> listed{-1.0000, 0.9983, -0.4537, -0.9941, 2.2488, -7.6739, 11.8448, -7.9606, 1.9903};
  const Polynomial& p = *at_order("example_3_2", 4).dual_poly;
  for (std::size_t k = 0; k < listed.size(); ++k) {
    MultiIndex idx{0, 0, static_cast<int>(k)};
    EXPECT_NEAR(p.coefficient(idx), listed[k], 5e-2) << "y^" << k;
  }
}

TEST(RecoverDual, ListedPolynomialsAgreePointwise) {
  // The dual optimum is not unique, so compare the polynomials as functions.
  const Polynomial listed31 = univariate({-0.0004, -0.9909, -0.0876, 1.4364, -1.2481, 2.1261, -2.1309, 1.1593, -0.2641});
  const Polynomial listed32 = univariate({-1.0000, 0.9983, -0.4537, -0.9941, 2.2488, -7.6739, 11.8448, -7.9606, 1.9903});
  const Polynomial& p31 = *at_order("example_3_1", 4).dual_poly;
  const Polynomial& p32 = *at_order("example_3_2", 4).dual_poly;
  for (int g = 0; g <= 100; ++g) {
    const std::vector<double> y{g / 100.0};
    EXPECT_NEAR(evaluate_in_y(p31, y), listed31.evaluate(y), 1e-3);
    EXPECT_NEAR(evaluate_in_y(p32, y), listed32.evaluate(y), 1e-3);
  }
}

TEST(AssembleDual, AgreesWithMultipliersOnExample31) {
  const Solved& s = solved("example_3_1");
  const DualSolution d = solve_dual(s.prob, s.gamma, 4, backend());
  ASSERT_EQ(d.status, RelaxationStatus::optimal) << d.message;
  ASSERT_TRUE(d.poly);
  const Polynomial& p = *at_order("example_3_1", 4).dual_poly;
  for (int k = 0; k <= 8; ++k) {
    MultiIndex idx{0, k};
    EXPECT_NEAR(d.poly->coefficient(idx), p.coefficient(idx), 1e-3) << "y^" << k;
  }
  EXPECT_NEAR(d.objective, at_order("example_3_1", 4).rho, 1e-6);
}

TEST(AssembleDual, ConstantObjectiveNoConstraints) {
  ParametricProblem prob;
  prob.n = 1;
  prob.p = 1;
  prob.objective = Polynomial::constant(1, 1, -1.5);
  prob.marginal.kind = MarginalKind::uniform_box;
  prob.marginal.box = {{0.0, 1.0}};
  const MarginalMoments gamma = marginal_moments(prob.marginal, 1, 2);
  const DualSolution d = solve_dual(prob, gamma, 1, backend());
  ASSERT_EQ(d.status, RelaxationStatus::optimal) << d.message;
  EXPECT_NEAR(d.objective, -1.5, 1e-7);
  EXPECT_NEAR(d.poly->coefficient(MultiIndex{0, 0}), -1.5, 1e-6);
  for (const auto& gram : d.grams) EXPECT_LE(gram.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(AssembleDual, WeakDualityOnExample32) {
  const Solved& s = solved("example_3_2");
  for (int i : {3, 4}) {
    const DualSolution d = solve_dual(s.prob, s.gamma, i, backend());
    ASSERT_EQ(d.status, RelaxationStatus::optimal) << d.message;
    EXPECT_LE(d.objective, at_order("example_3_2", i).rho + 1e-6);
  }
}

TEST(Envelope, Basics) {
  const Polynomial p = poly_parse("y1 - 1", 0, 1);
  const Polynomial q = poly_parse("-y1", 0, 1);
  const PiecewisePoly one = envelope_update({}, p);
  const PiecewisePoly twice = envelope_update(one, p);
  const PiecewisePoly both = envelope_update(one, q);
  for (double y : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const std::vector<double> pt{y};
    EXPECT_DOUBLE_EQ(one.evaluate(pt), y - 1);
    EXPECT_DOUBLE_EQ(twice.evaluate(pt), y - 1);
    EXPECT_DOUBLE_EQ(both.evaluate(pt), std::max(y - 1, -y));
  }
}

TEST(Envelope, MonotoneOnExample31) {
  PiecewisePoly e3 = envelope_update(envelope_update({}, *at_order("example_3_1", 2).dual_poly),
                                     *at_order("example_3_1", 3).dual_poly);
  PiecewisePoly e4 = envelope_update(e3, *at_order("example_3_1", 4).dual_poly);
  for (int g = 0; g <= 100; ++g) {
    const std::vector<double> y{g / 100.0};
    EXPECT_GE(e4.evaluate(y), e3.evaluate(y));
  }
}

TEST(InfeasibilityCertificate, EmptySlices) {
  const ParametricProblem prob = golden_problem("empty_slices");
  const MarginalMoments gamma = marginal_moments(prob.marginal, 1, 4);
  const auto sols = solve_primal(prob, gamma, 1, 2, backend());
  ASSERT_EQ(sols.back().status, RelaxationStatus::infeasible);
  const InfeasibilityDiagnosis d = check_infeasibility_certificate(sols.back());
  EXPECT_TRUE(d.empty_slices);
  EXPECT_EQ(d.order, 2);
}

TEST(InfeasibilityCertificate, FeasibleSoFar) {
  for (int i = 2; i <= 4; ++i) EXPECT_FALSE(check_infeasibility_certificate(at_order("example_3_1", i)).empty_slices);
  ParametricProblem free_prob = make_box_problem(poly_parse("x1^2 - y1*x1", 1, 1), {}, {{0.0, 1.0}});
  const MarginalMoments gamma = marginal_moments(free_prob.marginal, 1, 2);
  const auto sols = solve_primal(free_prob, gamma, 1, 1, backend());
  EXPECT_FALSE(check_infeasibility_certificate(sols.front()).empty_slices);
}

TEST(RelaxationProperty, MonotoneAndWeaklyDual) {
  for (const auto& name : kFeasibleGolden) {
    const auto& sols = solved(name).sols;
    for (std::size_t k = 0; k < sols.size(); ++k) {
      ASSERT_EQ(sols[k].status, RelaxationStatus::optimal) << name << " order " << sols[k].order;
      EXPECT_LE(sols[k].dual_objective, sols[k].rho + 1e-6) << name;
      if (k > 0) {
        EXPECT_LE(sols[k - 1].rho, sols[k].rho + 1e-7) << name << " order " << sols[k].order;
      }
    }
  }
}

TEST(RelaxationProperty, MassMarginalsAndPsd) {
  for (const auto& name : kFeasibleGolden) {
    const Solved& s = solved(name);
    for (const auto& sol : s.sols) {
      const MomentSequence& z = *sol.z;
      const std::size_t np = s.prob.n + s.prob.p;
      EXPECT_NEAR(z.at(MultiIndex(np)), 1.0, 1e-7) << name;
      for (const auto& beta : enumerate_basis(0, s.prob.p, static_cast<std::size_t>(2 * sol.order))) {
        std::vector<int> full(s.prob.n, 0);
        full.insert(full.end(), beta.exponents().begin(), beta.exponents().end());
        EXPECT_NEAR(z.at(MultiIndex(full)), s.gamma(beta), 1e-7) << name;
      }
      const PrimalProgram prog = assemble_primal(s.prob, s.gamma, sol.order);
      for (const auto& blk : prog.program.psd_blocks) {
        const Eigen::MatrixXd m = blk.instantiate(z.values());
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff(), -1e-6) << name;
      }
      EXPECT_NEAR(z.riesz(s.prob.objective), sol.rho, 1e-7) << name;
    }
  }
}

TEST(RelaxationProperty, DualPolynomialsBoundTheValueFunction) {
  OracleConfig cfg;
  for (const auto& name : kFeasibleGolden) {
    const Solved& s = solved(name);
    const OracleResult ref = run_oracle(s.prob, uniform_grid(s.prob, 101), cfg);
    for (const auto& sol : s.sols) {
      for (std::size_t g = 0; g < ref.grid.size(); ++g) {
        ASSERT_TRUE(ref.points[g].feasible);
        EXPECT_LE(evaluate_in_y(*sol.dual_poly, ref.grid[g]), ref.points[g].value + 1e-6)
            << name << " order " << sol.order << " y " << ref.grid[g][0];
      }
    }
  }
}
