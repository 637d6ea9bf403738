#pragma once

// Maximum-entropy reconstruction of a nonnegative function on a box from
// finitely many of its moments, via Newton's method on the concave dual
//
//   v_d(lambda) = <u, lambda> - int_[0,1]^p exp(sum_beta lambda_beta t^beta) dt.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jmpoly/conic.hpp"
#include "jmpoly/marginal.hpp"
#include "jmpoly/moments.hpp"
#include "jmpoly/problem.hpp"

namespace jmpoly {

class MaxentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Signalled when exp(poly) leaves the representable range.
class ExpOverflow : public MaxentError {
 public:
  using MaxentError::MaxentError;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [a, b].
QuadratureRule gauss_legendre_rule(int num_nodes, double a = 0.0, double b = 1.0);

/// Tensor product of a 1-D rule on [0,1]^p.
struct CubatureRule {
  std::size_t p = 1;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

CubatureRule tensor_rule(const QuadratureRule& rule, std::size_t p);

/// Default rule: 64 Gauss-Legendre nodes per dimension on the unit box.
CubatureRule default_cubature(std::size_t p);

using Box = std::vector<std::pair<double, double>>;

struct MomentTarget {
  std::size_t k = 0;
  double shift = 0.0;
  std::size_t p = 1;
  /// 2d.
  int degree = 0;
  /// enumerate_basis(0, p, degree).
  std::vector<MultiIndex> exponents;
  /// Target moments on the unit box, one per exponent.
  Eigen::VectorXd u;
  /// Parameter box that was mapped onto [0,1]^p.
  Box box;
};

struct DensityEstimate {
  std::size_t p = 1;
  int degree = 0;
  std::vector<MultiIndex> exponents;
  Eigen::VectorXd lambda;
  Box box;
  double shift = 0.0;

  int iterations = 0;
  double gradient_norm = 0.0;
  /// v_d at every accepted iterate, starting point included.
  std::vector<double> values;
  /// Largest Hessian eigenvalue at every iterate.
  std::vector<double> max_hessian_eigenvalue;
};

struct DualEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Throws ExpOverflow when the exponent is not finite or too large.
DualEval dual_value_grad_hess(const Eigen::VectorXd& lambda, const Eigen::VectorXd& u,
                              const std::vector<MultiIndex>& exponents, const CubatureRule& rule);

struct NewtonConfig {
  double tolerance = 1e-10;
  int max_iterations = 200;
  int max_halvings = 50;
};

/// Requires u_0 > 0, p in {1, 2} and 2d <= 10.
DensityEstimate maxent_fit(const MomentTarget& target, int d, const CubatureRule& rule,
                           const NewtonConfig& config = {});

/// exp(sum lambda_beta t^beta) with t the unit-box image of y.
double density_eval(const DensityEstimate& est, std::span<const double> y);

/// Quadrature moments int t^beta h(t) dt of the fitted density.
Eigen::VectorXd density_moments(const DensityEstimate& est, const CubatureRule& rule);

/// rho_i of min x_k over K (mass constraint only) minus 1e-6.
double lower_bound_for_shift(const ParametricProblem& prob, std::size_t k, int order, const SolverBackend& backend);

/// u_beta = -a_k gamma_beta + z_{e(k) beta} for |beta| <= 2d, mapped to the unit box.
MomentTarget shifted_moments(const MomentSequence& z, const MarginalMoments& gamma, std::size_t k, double a_k,
                             int d, const Box& box);

/// Rows `y_1,...,y_p,h`, one per grid point.
void write_density_csv(std::ostream& out, const DensityEstimate& est,
                       const std::vector<std::vector<double>>& grid);

}  // namespace jmpoly
