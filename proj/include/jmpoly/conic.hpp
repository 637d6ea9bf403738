#pragma once

// Linear matrix inequality programs and the solver backend interface.
//
//   minimise    c^T v
//   subject to  B_k(v) >= 0 (PSD) for every block k,
//               e_l^T v = b_l   for every equality l,
//
// where each B_k is a StructuredMatrix (linear in v, no constant part).
// Its conic dual is
//
//   maximise    b^T lambda
//   subject to  sum_k B_k^*(X_k) + E^T lambda = c,  X_k >= 0.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jmpoly/moments.hpp"

namespace jmpoly {

struct LinearEquality {
  LinearForm form;
  double rhs = 0.0;
};

struct ConicProgram {
  std::size_t num_vars = 0;
  LinearForm objective;
  std::vector<StructuredMatrix> psd_blocks;
  std::vector<LinearEquality> equalities;

  /// Empty when positions are in range and coefficients finite.
  std::vector<std::string> check() const;
};

/// Plain-text dump, see README ("Conic program text format").
void write_conic_program(std::ostream& out, const ConicProgram& prog);

enum class SolverStatus { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(SolverStatus s);

struct SolverResult {
  SolverStatus status = SolverStatus::numerical_failure;
  Eigen::VectorXd primal;                  // v
  std::vector<Eigen::MatrixXd> block_duals;  // X_k
  Eigen::VectorXd equality_duals;          // lambda
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  double tolerance = 0.0;
  std::string message;
};

struct SolverCapability {
  std::size_t max_block_side = 0;
  std::size_t max_vars = 0;
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual SolverCapability capability() const = 0;
  virtual double tolerance() const = 0;
  virtual SolverResult solve(const ConicProgram& prog) const = 0;
};

struct InteriorPointSettings {
  double tolerance = 1e-8;
  int max_iterations = 120;
  /// Fraction of the distance to the cone boundary taken per step.
  double step_fraction = 0.95;
  /// Objective growth beyond this (relative to the data) with a vanishing
  /// normalised residual is read as an infeasibility certificate.
  double divergence_threshold = 1e8;
  /// When the iteration stalls, the best iterate is still reported optimal
  /// if its residuals and relative gap are below this; the achieved level
  /// is returned as SolverResult::tolerance.
  double near_optimal_tolerance = 1e-6;
  bool verbose = false;
};

/// Primal-dual infeasible path-following method with the HKM search
/// direction and Mehrotra predictor-corrector steps. Dense blocks; the
/// Schur/KKT system is assembled sparsely so block-diagonal structure (Gram
/// variables) stays cheap.
class InteriorPointSolver final : public SolverBackend {
 public:
  explicit InteriorPointSolver(InteriorPointSettings settings = {}) : settings_(settings) {}

  SolverCapability capability() const override { return {200, 20000}; }
  double tolerance() const override { return settings_.tolerance; }
  SolverResult solve(const ConicProgram& prog) const override;

  const InteriorPointSettings& settings() const { return settings_; }

 private:
  InteriorPointSettings settings_;
};

}  // namespace jmpoly
