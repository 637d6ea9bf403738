#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "jmpoly/polynomial.hpp"
#include "jmpoly/problem.hpp"

namespace jmpoly {

/// Moments gamma_beta = int_Y y^beta dphi(y) for all |beta| <= max_degree.
class MarginalMoments {
 public:
  MarginalMoments(std::size_t p, int max_degree, std::map<MultiIndex, double, GradedOrder> values);

  std::size_t p() const { return p_; }
  int max_degree() const { return max_degree_; }
  /// Throws std::out_of_range for |beta| > max_degree.
  double operator()(const MultiIndex& beta) const;
  const std::map<MultiIndex, double, GradedOrder>& values() const { return values_; }

 private:
  std::size_t p_;
  int max_degree_;
  std::map<MultiIndex, double, GradedOrder> values_;
};

MarginalMoments uniform_box_moments(const std::vector<std::pair<double, double>>& bounds, int max_degree);

/// Uniform measure on {y >= 0, sum_j y_j <= 1}.
MarginalMoments uniform_simplex_moments(std::size_t p, int max_degree);

/// Wraps a user table; every |beta| <= max_degree must be present and gamma_0 = 1.
MarginalMoments explicit_moments(const std::map<MultiIndex, double, GradedOrder>& table, std::size_t p,
                                 int max_degree);

/// Reads rows `beta_1,...,beta_p,value`. Blank lines and `#` comments are skipped.
std::map<MultiIndex, double, GradedOrder> read_moment_csv(std::istream& in, std::size_t p);

/// Dispatches on spec.kind.
MarginalMoments marginal_moments(const MarginalSpec& spec, std::size_t p, int max_degree);

}  // namespace jmpoly
