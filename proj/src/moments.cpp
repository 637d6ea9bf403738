#include "jmpoly/moments.hpp"

#include <algorithm>
#include <stdexcept>

namespace jmpoly {

MonomialBasis::MonomialBasis(std::size_t n, std::size_t p, int degree)
    : n_(n), p_(p), degree_(degree), elems_(enumerate_basis(n, p, static_cast<std::size_t>(degree))) {
  for (std::size_t i = 0; i < elems_.size(); ++i) lookup_.emplace(elems_[i], i);
}

std::size_t MonomialBasis::position(const MultiIndex& idx) const {
  auto it = lookup_.find(idx);
  if (it == lookup_.end()) {
    throw std::out_of_range("monomial of degree " + std::to_string(idx.degree()) +
                            " exceeds truncation degree " + std::to_string(degree_));
  }
  return it->second;
}

std::size_t moment_index(std::size_t n, std::size_t p, int order, const MultiIndex& idx) {
  if (idx.size() != n + p) throw DimensionError("multi-index length mismatch");
  if (idx.degree() > 2 * order) throw std::out_of_range("moment index degree exceeds 2*order");
  // Rank within the graded order: count everything of smaller degree, then
  // the same-degree indices that precede idx.
  const std::size_t nv = n + p;
  const int d = idx.degree();
  std::size_t pos = d == 0 ? 0 : basis_size(nv, static_cast<std::size_t>(d - 1));
  int remaining = d;
  for (std::size_t slot = 0; slot + 1 < nv; ++slot) {
    // indices with a larger exponent in this slot come first
    for (int e = remaining; e > idx[slot]; --e) {
      pos += basis_size(nv - slot - 2, static_cast<std::size_t>(remaining - e));
    }
    remaining -= idx[slot];
  }
  return pos;
}

MomentSequence::MomentSequence(std::size_t n, std::size_t p, int order, std::vector<double> values)
    : n_(n), p_(p), order_(order), basis_(n, p, 2 * order), values_(std::move(values)) {
  if (values_.size() != basis_.size()) {
    throw DimensionError("moment sequence length " + std::to_string(values_.size()) + " != basis size " +
                         std::to_string(basis_.size()));
  }
}

double MomentSequence::riesz(const Polynomial& f) const {
  if (f.n() != n_ || f.p() != p_) throw DimensionError("polynomial ring mismatch");
  double s = 0.0;
  for (const auto& [idx, c] : f.terms()) s += c * values_[basis_.position(idx)];
  return s;
}

void StructuredMatrix::set(std::size_t r, std::size_t c, LinearForm form) {
  entries_[c * side_ + r] = form;
  entries_[r * side_ + c] = std::move(form);
}

std::size_t StructuredMatrix::referenced_size() const {
  std::size_t top = 0;
  for (const auto& e : entries_) {
    for (const auto& [pos, coef] : e) top = std::max(top, pos + 1);
  }
  return top;
}

Eigen::MatrixXd StructuredMatrix::instantiate(const std::vector<double>& values) const {
  if (referenced_size() > values.size()) throw std::out_of_range("structured matrix references beyond vector");
  Eigen::MatrixXd out(side_, side_);
  for (std::size_t r = 0; r < side_; ++r) {
    for (std::size_t c = 0; c < side_; ++c) {
      double v = 0.0;
      for (const auto& [pos, coef] : entry(r, c)) v += coef * values[pos];
      out(r, c) = v;
    }
  }
  return out;
}

StructuredMatrix build_localizing_matrix(const Polynomial& q, std::size_t n, std::size_t p, int half_degree,
                                         int order) {
  if (q.n() != n || q.p() != p) throw DimensionError("localizing polynomial ring mismatch");
  if (half_degree < 0) throw std::invalid_argument("negative half degree");
  if (2 * half_degree + q.degree() > 2 * order) {
    throw std::out_of_range("localizing matrix needs moments beyond 2*order");
  }
  const MonomialBasis rows(n, p, half_degree);
  const MonomialBasis moments(n, p, 2 * order);
  StructuredMatrix m(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = r; c < rows.size(); ++c) {
      LinearForm form;
      const MultiIndex base = rows[r] + rows[c];
      for (const auto& [u, coef] : q.terms()) form.emplace_back(moments.position(base + u), coef);
      std::sort(form.begin(), form.end());
      m.set(r, c, std::move(form));
    }
  }
  return m;
}

StructuredMatrix build_moment_matrix(std::size_t n, std::size_t p, int half_degree, int order) {
  if (half_degree > order) throw std::out_of_range("moment matrix half degree exceeds order");
  return build_localizing_matrix(Polynomial::constant(n, p, 1.0), n, p, half_degree, order);
}

Eigen::MatrixXd instantiate(const StructuredMatrix& m, const MomentSequence& z) {
  return m.instantiate(z.values());
}

}  // namespace jmpoly
