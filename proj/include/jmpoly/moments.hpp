#pragma once

// Truncated moment sequences and the symbolic moment / localizing matrices
// built over them.

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jmpoly/polynomial.hpp"

namespace jmpoly {

/// Sparse linear form over decision-vector positions: sum coef * v[pos].
using LinearForm = std::vector<std::pair<std::size_t, double>>;

/// Position lookup for enumerate_basis(n, p, degree).
class MonomialBasis {
 public:
  MonomialBasis(std::size_t n, std::size_t p, int degree);

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }
  int degree() const { return degree_; }
  std::size_t size() const { return elems_.size(); }
  const MultiIndex& operator[](std::size_t pos) const { return elems_[pos]; }
  const std::vector<MultiIndex>& elements() const { return elems_; }
  /// Throws std::out_of_range when idx is beyond the truncation degree.
  std::size_t position(const MultiIndex& idx) const;
  bool contains(const MultiIndex& idx) const { return lookup_.count(idx) != 0; }

 private:
  std::size_t n_;
  std::size_t p_;
  int degree_;
  std::vector<MultiIndex> elems_;
  std::map<MultiIndex, std::size_t, GradedOrder> lookup_;
};

/// Position of idx in enumerate_basis(n, p, 2 * order).
std::size_t moment_index(std::size_t n, std::size_t p, int order, const MultiIndex& idx);

/// z = (z_{alpha beta}) for |alpha + beta| <= 2 * order, laid out in basis order.
class MomentSequence {
 public:
  MomentSequence(std::size_t n, std::size_t p, int order, std::vector<double> values);

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }
  int order() const { return order_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const MonomialBasis& basis() const { return basis_; }

  double operator[](std::size_t pos) const { return values_[pos]; }
  double at(const MultiIndex& idx) const { return values_[basis_.position(idx)]; }

  /// The Riesz functional L_z(f) = sum_{ab} f_{ab} z_{ab}.
  double riesz(const Polynomial& f) const;

 private:
  std::size_t n_;
  std::size_t p_;
  int order_;
  MonomialBasis basis_;
  std::vector<double> values_;
};

/// Symmetric matrix whose entries are linear forms over a decision vector.
class StructuredMatrix {
 public:
  explicit StructuredMatrix(std::size_t side = 0) : side_(side), entries_(side * side) {}

  std::size_t side() const { return side_; }
  const LinearForm& entry(std::size_t r, std::size_t c) const { return entries_[r * side_ + c]; }
  /// Sets both (r, c) and (c, r).
  void set(std::size_t r, std::size_t c, LinearForm form);

  /// Largest referenced position plus one (0 when every entry is empty).
  std::size_t referenced_size() const;

  Eigen::MatrixXd instantiate(const std::vector<double>& values) const;

 private:
  std::size_t side_;
  std::vector<LinearForm> entries_;
};

/// M_d(z): rows/columns indexed by monomials of degree <= half_degree.
StructuredMatrix build_moment_matrix(std::size_t n, std::size_t p, int half_degree, int order);

/// M_d(q z): entry (r, c) = sum_{uv} q_{uv} z at (b_r + b_c + (u, v)).
StructuredMatrix build_localizing_matrix(const Polynomial& q, std::size_t n, std::size_t p, int half_degree,
                                         int order);

/// Numeric instantiation against z; throws if a position is beyond z.
Eigen::MatrixXd instantiate(const StructuredMatrix& m, const MomentSequence& z);

}  // namespace jmpoly
