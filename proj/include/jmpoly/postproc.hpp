#pragma once

// Quantities read off a solved moment sequence: functionals of the optimal
// solutions, the mean vector, persistency of boolean coordinates and the
// moment curves y^beta * x*_k(y).

#include <cstddef>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <vector>

#include "jmpoly/moments.hpp"
#include "jmpoly/polynomial.hpp"
#include "jmpoly/problem.hpp"

namespace jmpoly {

class PostprocError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sum_alpha h_alpha z_{alpha 0}. Polynomials with y-terms are rejected
/// unless allow_mixed is set, in which case every term uses z_{alpha beta}.
double functional_estimate(const Polynomial& h, const MomentSequence& z, bool allow_mixed = false);

/// Component k is z_{e(k) 0}.
std::vector<double> mean_vector(const MomentSequence& z);

struct Persistency {
  double value = 0.0;
  /// z_{e(k) 0} before clamping.
  double raw = 0.0;
  /// Set when raw left [0, 1] by more than 10 * tolerance.
  bool clamped = false;
};

/// True when the problem carries x_k^2 - x_k = 0 (either sign).
bool is_boolean(const ParametricProblem& prob, std::size_t k);

Persistency persistency(const ParametricProblem& prob, const MomentSequence& z, std::size_t k, double tolerance);

struct CoordinateMoments {
  std::size_t k = 0;
  std::size_t p = 0;
  std::map<MultiIndex, double, GradedOrder> entries;
};

/// z_{e(k) beta} for |beta| <= budget; needs budget + 1 <= 2 * order.
CoordinateMoments coordinate_moment_curve(const MomentSequence& z, std::size_t k, int budget);

/// Rows `beta_1,...,beta_p,value`.
void write_curve_csv(std::ostream& out, const CoordinateMoments& curve);

}  // namespace jmpoly
