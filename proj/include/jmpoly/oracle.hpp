#pragma once

// Sampling-based reference solver: minimises f(., y) over K_y pointwise by
// multistart penalised descent plus an active-set Newton polish, then
// integrates the results against phi by Gauss-Legendre quadrature.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "jmpoly/problem.hpp"

namespace jmpoly {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleConfig {
  int samples = 512;
  int descent_iterations = 200;
  std::uint64_t seed = 0;
  double feasibility_tolerance = 1e-9;
  /// Per-coordinate bounds for x; inferred from concave quadratic
  /// constraints when empty.
  std::vector<std::pair<double, double>> x_box;
  /// Worker threads for grid evaluation (0 = hardware concurrency).
  unsigned threads = 0;
};

struct PointSolution {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> x;
  /// Another feasible point within 1e-6 in value but more than 1e-3 away.
  bool tie = false;
};

/// J(y) and a minimiser. feasible = false when no sample reached K_y.
PointSolution solve_pointwise(const ParametricProblem& prob, std::span<const double> y, const OracleConfig& config);

/// Bounds of K_y in x derived from the constraints (empty optional when some
/// coordinate is unbounded by every concave quadratic). An interval with
/// first > second means K_y is empty.
std::optional<std::vector<std::pair<double, double>>> infer_x_box(const ParametricProblem& prob,
                                                                  std::span<const double> y);

struct OracleResult {
  std::vector<std::vector<double>> grid;
  std::vector<PointSolution> points;
};

/// Pointwise solves at the given parameter points; node i uses seed + i.
OracleResult run_oracle(const ParametricProblem& prob, const std::vector<std::vector<double>>& grid,
                        const OracleConfig& config);

/// `count` equally spaced points per parameter over the parameter box.
std::vector<std::vector<double>> uniform_grid(const ParametricProblem& prob, int count);

/// Quadrature nodes and phi-weights (weights sum to one) for Y.
struct ParameterRule {
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;
};

/// Uniform box or uniform simplex marginals with p <= 2; `count` nodes per dimension.
ParameterRule parameter_rule(const ParametricProblem& prob, int count);

/// rho_ref = int_Y J dphi. Throws OracleError if some node is infeasible.
double integrate_value_function(const ParametricProblem& prob, int grid_size, const OracleConfig& config);

struct ReferenceMoments {
  std::vector<double> values;
  /// Quadrature nodes whose minimiser was flagged as a near-tie.
  int ties = 0;
};

/// int_Y y^beta x*_k(y) dphi for each requested degree (p = 1).
ReferenceMoments reference_coordinate_moments(const ParametricProblem& prob, std::size_t k,
                                              const std::vector<int>& degrees, int grid_size,
                                              const OracleConfig& config);

/// Rows `y..., J, x1..xn, tie_flag`.
void write_oracle_csv(std::ostream& out, const ParametricProblem& prob, const OracleResult& result);

}  // namespace jmpoly
