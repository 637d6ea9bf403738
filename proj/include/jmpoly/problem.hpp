#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "jmpoly/polynomial.hpp"

namespace jmpoly {

enum class MarginalKind { uniform_box, uniform_simplex, explicit_moments };

/// The probability measure phi on the parameter set Y.
struct MarginalSpec {
  MarginalKind kind = MarginalKind::uniform_box;
  /// Per-parameter [a_j, b_j]. Required for uniform_box; for the other kinds
  /// it is the bounding box of Y used by quadrature and density fitting.
  std::vector<std::pair<double, double>> box;
  /// Moment table for explicit_moments, keyed by length-p exponent vectors.
  std::map<MultiIndex, double, GradedOrder> table;
};

/// A joint constraint h(x, y) >= 0, or h(x, y) = 0 when `equality` is set.
struct Constraint {
  Polynomial poly;
  bool equality = false;

  int half_degree() const { return (poly.degree() + 1) / 2; }
};

/// A parametric polynomial program: for each y in Y, minimise f(x, y) over
/// K_y = {x : h_j(x, y) >= 0 (or = 0)}, with Y = {y : h_k(y) >= 0}.
struct ParametricProblem {
  std::size_t n = 0;
  std::size_t p = 0;
  Polynomial objective;
  std::vector<Constraint> joint_constraints;
  /// Polynomials in y only, each constrained >= 0.
  std::vector<Polynomial> param_constraints;
  MarginalSpec marginal;

  /// Every constraint in relaxation order: joint ones first, then the
  /// parameter-set ones (as inequalities).
  std::vector<Constraint> all_constraints() const;

  /// ceil(deg/2) for each entry of all_constraints().
  std::vector<int> half_degrees() const;
};

/// Builds a problem with a uniform marginal on the given box; the box is
/// compiled into one quadratic (y_j - a_j)(b_j - y_j) >= 0 per parameter.
ParametricProblem make_box_problem(Polynomial objective, std::vector<Constraint> joint,
                                   std::vector<std::pair<double, double>> box);

/// Parameter constraints describing a box, one quadratic per coordinate.
std::vector<Polynomial> box_constraints(std::size_t n, std::size_t p,
                                        const std::vector<std::pair<double, double>>& box);

/// Parameter constraints of the unit simplex {y >= 0, sum y <= 1}.
std::vector<Polynomial> simplex_constraints(std::size_t n, std::size_t p);

/// max(ceil(deg f / 2), max_k ceil(deg h_k / 2)).
int min_relaxation_order(const ParametricProblem& prob);

/// Copy of prob with the joint inequality radius^2 - |x|^2 - |y|^2 >= 0 appended.
ParametricProblem add_ball_constraint(const ParametricProblem& prob, double radius);

/// Human-readable problems with prob; empty when it is well formed.
std::vector<std::string> validate(const ParametricProblem& prob);

}  // namespace jmpoly
