#pragma once

// Moment relaxations of the joint+marginal problem and their SOS duals.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jmpoly/conic.hpp"
#include "jmpoly/marginal.hpp"
#include "jmpoly/moments.hpp"
#include "jmpoly/problem.hpp"

namespace jmpoly {

class RelaxationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RelaxationStatus { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(RelaxationStatus s);

/// What each PSD block of an assembled primal program localizes.
struct BlockInfo {
  /// -1 for the moment matrix, otherwise the index into all_constraints().
  int constraint = -1;
  /// -1 for the negated twin of an equality constraint.
  int sign = 1;
  int half_degree = 0;
};

/// The primal program plus the bookkeeping needed to read its solution back.
struct PrimalProgram {
  ConicProgram program;
  int order = 0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<BlockInfo> blocks;
  /// Pure-y exponent (length p) of each equality row, in row order.
  std::vector<MultiIndex> marginal_rows;
};

/// min L_z(f) s.t. M_i(z) >= 0, M_{i-v_j}(h_j z) >= 0 (and for -h_j on
/// equality constraints), L_z(y^beta) = gamma_beta for |beta| <= 2i.
/// With mass_only the marginal rows are replaced by z_00 = 1 alone, giving
/// the plain (non-parametric) relaxation of min f over K.
PrimalProgram assemble_primal(const ParametricProblem& prob, const MarginalMoments& gamma, int order,
                              bool mass_only = false);

struct RelaxationSolution {
  int order = 0;
  RelaxationStatus status = RelaxationStatus::numerical_failure;
  double rho = 0.0;
  std::optional<MomentSequence> z;
  /// p_i(y), present once a dual has been recovered.
  std::optional<Polynomial> dual_poly;
  double dual_objective = 0.0;
  /// Gram matrices: sigma_0 then one per constraint block.
  std::vector<Eigen::MatrixXd> certificates;
  double solver_tolerance = 0.0;
  std::string message;
  /// Raw multipliers from the backend (kept for recover_dual_from_primal).
  Eigen::VectorXd equality_duals;
  std::vector<MultiIndex> marginal_rows;
};

/// Solves one assembled primal program.
RelaxationSolution solve_relaxation(const PrimalProgram& prog, const SolverBackend& backend);

/// Assembles and solves orders [first, last]; dual polynomials are recovered
/// from the multipliers of every optimal solve.
std::vector<RelaxationSolution> solve_primal(const ParametricProblem& prob, const MarginalMoments& gamma,
                                             int first, int last, const SolverBackend& backend);

/// p_i(y) = sum_beta lambda_beta y^beta from the marginal-row multipliers.
/// Throws RelaxationError when multipliers are missing.
Polynomial recover_dual_from_primal(const RelaxationSolution& solution);

/// The explicit SOS program: max int p dphi s.t. f - p = sigma_0 + sum sigma_j h_j.
struct DualProgram {
  ConicProgram program;
  int order = 0;
  std::size_t n = 0;
  std::size_t p = 0;
  /// Exponents (length p) of the p-coefficient variables, which occupy
  /// positions [0, coefficient_count).
  std::vector<MultiIndex> coefficient_rows;
  std::vector<BlockInfo> blocks;
};

DualProgram assemble_dual(const ParametricProblem& prob, const MarginalMoments& gamma, int order);

struct DualSolution {
  int order = 0;
  RelaxationStatus status = RelaxationStatus::numerical_failure;
  /// int p dphi at the optimum (rho*_i).
  double objective = 0.0;
  std::optional<Polynomial> poly;
  std::vector<Eigen::MatrixXd> grams;
  std::string message;
};

DualSolution solve_dual(const ParametricProblem& prob, const MarginalMoments& gamma, int order,
                        const SolverBackend& backend);

/// Running pointwise maximum of lower-bound polynomials.
class PiecewisePoly {
 public:
  PiecewisePoly() = default;
  explicit PiecewisePoly(std::vector<Polynomial> members) : members_(std::move(members)) {}
  const std::vector<Polynomial>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  /// y has length p; x slots of the members are evaluated at zero.
  double evaluate(std::span<const double> y) const;

 private:
  std::vector<Polynomial> members_;
};

/// max(prev, p_i).
PiecewisePoly envelope_update(const PiecewisePoly& prev, const Polynomial& p_i);

struct InfeasibilityDiagnosis {
  bool empty_slices = false;
  int order = 0;
  std::string message;
};

InfeasibilityDiagnosis check_infeasibility_certificate(const RelaxationSolution& solution);

/// Evaluates a polynomial in (x, y) that only depends on y at a parameter point.
double evaluate_in_y(const Polynomial& poly, std::span<const double> y);

}  // namespace jmpoly
