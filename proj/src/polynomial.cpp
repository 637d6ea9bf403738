#include "jmpoly/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace jmpoly {

MultiIndex::MultiIndex(std::initializer_list<int> exps) : exps_(exps) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("negative exponent");
  }
}

MultiIndex::MultiIndex(std::vector<int> exps) : exps_(std::move(exps)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("negative exponent");
  }
}

MultiIndex MultiIndex::unit(std::size_t size, std::size_t k) {
  MultiIndex idx(size);
  idx.exps_.at(k) = 1;
  return idx;
}

int MultiIndex::degree() const { return std::accumulate(exps_.begin(), exps_.end(), 0); }

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.size() != size()) throw DimensionError("multi-index length mismatch");
  MultiIndex out(*this);
  for (std::size_t i = 0; i < size(); ++i) out.exps_[i] += other.exps_[i];
  return out;
}

bool GradedOrder::operator()(const MultiIndex& a, const MultiIndex& b) const {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da < db;
  // descending lex: larger leading exponent comes first
  return std::lexicographical_compare(b.exponents().begin(), b.exponents().end(),
                                      a.exponents().begin(), a.exponents().end());
}

std::size_t basis_size(std::size_t num_vars, std::size_t degree) {
  // C(num_vars + degree, degree), computed incrementally to stay exact.
  std::size_t r = 1;
  for (std::size_t k = 1; k <= degree; ++k) r = r * (num_vars + k) / k;
  return r;
}

namespace {

// Appends, in descending lex order, every vector of length `size` summing to `total`.
void compositions(std::size_t slot, int remaining, std::vector<int>& cur,
                  std::vector<MultiIndex>& out) {
  if (slot + 1 == cur.size()) {
    cur[slot] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[slot] = e;
    compositions(slot + 1, remaining - e, cur, out);
  }
  cur[slot] = 0;
}

}  // namespace

std::vector<MultiIndex> enumerate_basis(std::size_t n, std::size_t p, std::size_t degree) {
  const std::size_t nv = n + p;
  std::vector<MultiIndex> out;
  if (nv == 0) {
    out.emplace_back(0);
    return out;
  }
  out.reserve(basis_size(nv, degree));
  std::vector<int> cur(nv, 0);
  for (int d = 0; d <= static_cast<int>(degree); ++d) compositions(0, d, cur, out);
  return out;
}

Polynomial Polynomial::constant(std::size_t n, std::size_t p, double c) {
  Polynomial out(n, p);
  out.add_term(MultiIndex(n + p), c);
  return out;
}

Polynomial Polynomial::variable(std::size_t n, std::size_t p, std::size_t k, double c) {
  if (k >= n + p) throw DimensionError("variable index out of range");
  return monomial(n, p, MultiIndex::unit(n + p, k), c);
}

Polynomial Polynomial::monomial(std::size_t n, std::size_t p, MultiIndex idx, double c) {
  if (idx.size() != n + p) throw DimensionError("multi-index length mismatch");
  Polynomial out(n, p);
  out.add_term(idx, c);
  return out;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [idx, c] : terms_) d = std::max(d, idx.degree());
  return d;
}

double Polynomial::coefficient(const MultiIndex& idx) const {
  auto it = terms_.find(idx);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& idx, double c) {
  if (idx.size() != num_vars()) throw DimensionError("multi-index length mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(idx, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

bool Polynomial::depends_on_x() const {
  for (const auto& [idx, c] : terms_) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (idx[i] != 0) return true;
    }
  }
  return false;
}

bool Polynomial::depends_on_y() const {
  for (const auto& [idx, c] : terms_) {
    for (std::size_t i = n_; i < n_ + p_; ++i) {
      if (idx[i] != 0) return true;
    }
  }
  return false;
}

double Polynomial::evaluate(std::span<const double> point) const {
  if (point.size() != num_vars()) throw DimensionError("evaluation point has wrong length");
  double sum = 0.0;
  for (const auto& [idx, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < point.size(); ++i) {
      for (int e = 0; e < idx[i]; ++e) t *= point[i];
    }
    sum += t;
  }
  return sum;
}

void Polynomial::check_same_space(const Polynomial& other) const {
  if (n_ != other.n_ || p_ != other.p_) throw DimensionError("polynomials live in different rings");
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  check_same_space(other);
  Polynomial out(*this);
  for (const auto& [idx, c] : other.terms_) out.add_term(idx, c);
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + (-other); }

Polynomial Polynomial::operator-() const { return scaled(-1.0); }

Polynomial Polynomial::scaled(double c) const {
  Polynomial out(n_, p_);
  if (c == 0.0) return out;
  for (const auto& [idx, v] : terms_) out.terms_.emplace(idx, v * c);
  return out;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  check_same_space(other);
  Polynomial out(n_, p_);
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : other.terms_) out.add_term(a + b, ca * cb);
  }
  return out;
}

Polynomial Polynomial::pow(int e) const {
  if (e < 0) throw std::invalid_argument("negative power");
  Polynomial out = constant(n_, p_, 1.0);
  for (int k = 0; k < e; ++k) out = out * *this;
  return out;
}

Polynomial Polynomial::derivative(std::size_t v) const {
  if (v >= num_vars()) throw DimensionError("variable index out of range");
  Polynomial out(n_, p_);
  for (const auto& [idx, c] : terms_) {
    if (idx[v] == 0) continue;
    MultiIndex d(idx);
    d[v] -= 1;
    out.add_term(d, c * idx[v]);
  }
  return out;
}

std::string variable_name(std::size_t n, std::size_t v) {
  return v < n ? "x" + std::to_string(v + 1) : "y" + std::to_string(v - n + 1);
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [idx, c] : terms_) {
    double mag = c;
    if (first) {
      if (c < 0) {
        out += "-";
        mag = -c;
      }
    } else {
      out += c < 0 ? " - " : " + ";
      mag = std::abs(c);
    }
    first = false;
    std::string factors;
    for (std::size_t v = 0; v < idx.size(); ++v) {
      if (idx[v] == 0) continue;
      if (!factors.empty()) factors += "*";
      factors += variable_name(n_, v);
      if (idx[v] > 1) factors += "^" + std::to_string(idx[v]);
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", mag);
    if (factors.empty()) {
      out += buf;
    } else if (mag == 1.0) {
      out += factors;
    } else {
      out += buf;
      out += "*" + factors;
    }
  }
  return out;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::size_t n, std::size_t p) : s_(text), n_(n), p_(p) {}

  Polynomial parse() {
    Polynomial out = expression();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return out;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char ch) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expression() {
    skip_ws();
    Polynomial out(n_, p_);
    bool negate = false;
    if (accept('-')) {
      negate = true;
    } else {
      accept('+');
    }
    Polynomial t = term();
    out = negate ? -t : t;
    for (;;) {
      if (accept('+')) {
        out = out + term();
      } else if (accept('-')) {
        out = out - term();
      } else {
        break;
      }
    }
    return out;
  }

  Polynomial term() {
    Polynomial out = power();
    for (;;) {
      if (accept('*')) {
        out = out * power();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Polynomial d = power();
        if (d.degree() != 0 || d.is_zero()) throw ParseError("division by a non-constant or zero", at);
        out = out.scaled(1.0 / d.coefficient(MultiIndex(n_ + p_)));
      } else {
        break;
      }
    }
    return out;
  }

  Polynomial power() {
    Polynomial base = factor();
    if (accept('^')) {
      skip_ws();
      const std::size_t at = pos_;
      int e = 0;
      auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), e);
      if (ec != std::errc() || e < 0) throw ParseError("expected nonnegative integer exponent", at);
      pos_ = static_cast<std::size_t>(ptr - s_.data());
      return base.pow(e);
    }
    return base;
  }

  Polynomial factor() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char ch = s_[pos_];
    if (ch == '(') {
      ++pos_;
      Polynomial inner = expression();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (ch == '-') {  // unary minus inside a product, e.g. 2*-x1
      ++pos_;
      return -power();
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
    if (ch == 'x' || ch == 'y') return variable();
    throw ParseError("unexpected character '" + std::string(1, ch) + "'", pos_);
  }

  Polynomial number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return Polynomial::constant(n_, p_, v);
  }

  Polynomial variable() {
    const std::size_t start = pos_;
    const char kind = s_[pos_++];
    std::size_t index = 1;
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), index);
      if (ec != std::errc()) throw ParseError("malformed variable index", start);
      pos_ = static_cast<std::size_t>(ptr - s_.data());
    }
    const std::size_t limit = kind == 'x' ? n_ : p_;
    if (index == 0 || index > limit) {
      throw ParseError(std::string("variable ") + kind + std::to_string(index) + " out of range (have " +
                           std::to_string(limit) + ")",
                       start);
    }
    const std::size_t v = kind == 'x' ? index - 1 : n_ + index - 1;
    return Polynomial::variable(n_, p_, v);
  }

  std::string_view s_;
  std::size_t n_;
  std::size_t p_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial poly_parse(std::string_view text, std::size_t n, std::size_t p) {
  return Parser(text, n, p).parse();
}

}  // namespace jmpoly
