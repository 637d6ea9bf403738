#pragma once

// Sparse polynomials over the joint variable vector (x_1..x_n, y_1..y_p).

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jmpoly {

/// Exponent vector over (x_1..x_n, y_1..y_p). The first n slots belong to x.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t size) : exps_(size, 0) {}
  MultiIndex(std::initializer_list<int> exps);
  explicit MultiIndex(std::vector<int> exps);

  /// Index with a single 1 in slot k (the e(k) direction).
  static MultiIndex unit(std::size_t size, std::size_t k);

  std::size_t size() const { return exps_.size(); }
  int operator[](std::size_t i) const { return exps_[i]; }
  int& operator[](std::size_t i) { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }
  int degree() const;

  MultiIndex operator+(const MultiIndex& other) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> exps_;
};

/// Graded order: lower total degree first, ties broken by descending
/// lexicographic order on the exponent vector (x_1 has highest priority),
/// so the degree-1 block reads x_1, ..., x_n, y_1, ..., y_p.
struct GradedOrder {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// binomial(num_vars + degree, degree).
std::size_t basis_size(std::size_t num_vars, std::size_t degree);

/// All exponent vectors of length n + p with total degree <= degree, in
/// GradedOrder. The first element is the zero index.
std::vector<MultiIndex> enumerate_basis(std::size_t n, std::size_t p, std::size_t degree);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Polynomial {
 public:
  using Terms = std::map<MultiIndex, double, GradedOrder>;

  Polynomial(std::size_t n = 0, std::size_t p = 0) : n_(n), p_(p) {}

  static Polynomial constant(std::size_t n, std::size_t p, double c);
  /// The monomial x_k (k < n) or y_{k-n} (k >= n) with coefficient c.
  static Polynomial variable(std::size_t n, std::size_t p, std::size_t k, double c = 1.0);
  static Polynomial monomial(std::size_t n, std::size_t p, MultiIndex idx, double c = 1.0);

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }
  std::size_t num_vars() const { return n_ + p_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  double coefficient(const MultiIndex& idx) const;

  /// Adds c to the coefficient of idx, dropping the term if it cancels.
  void add_term(const MultiIndex& idx, double c);

  /// True when some stored term has a nonzero exponent on an x slot.
  bool depends_on_x() const;
  bool depends_on_y() const;

  double evaluate(std::span<const double> point) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator-() const;
  Polynomial scaled(double c) const;
  Polynomial pow(int e) const;

  /// d/dv for joint variable v.
  Polynomial derivative(std::size_t v) const;

  /// Renders in the problem-file expression grammar; parse(to_string()) is
  /// exact because coefficients are printed with 17 significant digits.
  std::string to_string() const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.n_ == b.n_ && a.p_ == b.p_ && a.terms_ == b.terms_;
  }

 private:
  void check_same_space(const Polynomial& other) const;

  std::size_t n_;
  std::size_t p_;
  Terms terms_;
};

/// Name of joint variable v: "x<k>" or "y<k>", 1-based.
std::string variable_name(std::size_t n, std::size_t v);

/// Parses expressions such as `-2*x1^2*y1 + (1 - y1)*x2 + 1/2`.
/// Grammar: sums of products of factors; a factor is a number, a variable
/// x<k>/y<k> (bare x/y mean index 1), or a parenthesised expression, with an
/// optional nonnegative integer power `^e`. Division is by constants only.
Polynomial poly_parse(std::string_view text, std::size_t n, std::size_t p);

}  // namespace jmpoly
