#include "jmpoly/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "jmpoly/csv.hpp"
#include "jmpoly/relaxation.hpp"

namespace jmpoly {

QuadratureRule gauss_legendre_rule(int num_nodes, double a, double b) {
  if (num_nodes < 1) throw std::invalid_argument("gauss_legendre_rule needs at least one node");
  const int n = num_nodes;
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  if (n == 1) {
    rule.nodes[0] = mid;
    rule.weights[0] = b - a;
    return rule;
  }
  // Legendre P_n and its derivative at x by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, dpn] = legendre(x);
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dpn = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dpn * dpn);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = mid - half * x;
    rule.nodes[hi] = mid + half * x;
    rule.weights[lo] = half * w;
    rule.weights[hi] = half * w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = mid;
  return rule;
}

CubatureRule tensor_rule(const QuadratureRule& rule, std::size_t p) {
  if (p < 1) throw std::invalid_argument("tensor_rule needs p >= 1");
  CubatureRule out;
  out.p = p;
  const std::size_t m = rule.nodes.size();
  std::size_t total = 1;
  for (std::size_t j = 0; j < p; ++j) total *= m;
  out.points.reserve(total);
  out.weights.reserve(total);
  std::vector<std::size_t> digit(p, 0);
  for (std::size_t c = 0; c < total; ++c) {
    std::vector<double> pt(p);
    double w = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      pt[j] = rule.nodes[digit[j]];
      w *= rule.weights[digit[j]];
    }
    out.points.push_back(std::move(pt));
    out.weights.push_back(w);
    for (std::size_t j = 0; j < p; ++j) {
      if (++digit[j] < m) break;
      digit[j] = 0;
    }
  }
  return out;
}

CubatureRule default_cubature(std::size_t p) { return tensor_rule(gauss_legendre_rule(64), p); }

namespace {

// Monomial values t^beta for every exponent.
Eigen::VectorXd monomials(const std::vector<MultiIndex>& exponents, std::span<const double> t) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(exponents.size()));
  for (std::size_t e = 0; e < exponents.size(); ++e) {
    double v = 1.0;
    for (std::size_t j = 0; j < t.size(); ++j) v *= std::pow(t[j], exponents[e][j]);
    out[static_cast<Eigen::Index>(e)] = v;
  }
  return out;
}

// The dual value cancels heavily once lambda is large.
long double dot_extended(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return s;
}

// Exponents above this overflow exp() soon after summation.
constexpr double max_exponent = 700.0;

void check_dimensions(std::size_t p, int degree) {
  if (p < 1 || p > 2) throw MaxentError("maximum entropy fits support p = 1 or p = 2 only");
  if (degree > 10) throw MaxentError("maximum entropy degree 2d must not exceed 10");
  if (degree < 0) throw MaxentError("negative maximum entropy degree");
}

std::vector<double> to_unit_box(const Box& box, std::span<const double> y) {
  if (y.size() != box.size()) throw DimensionError("point has wrong length for the density domain");
  std::vector<double> t(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    const auto [a, b] = box[j];
    const double slack = 1e-12 * (b - a);
    if (y[j] < a - slack || y[j] > b + slack) throw std::domain_error("point outside the density domain");
    t[j] = std::clamp((y[j] - a) / (b - a), 0.0, 1.0);
  }
  return t;
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

}  // namespace

DualEval dual_value_grad_hess(const Eigen::VectorXd& lambda, const Eigen::VectorXd& u,
                              const std::vector<MultiIndex>& exponents, const CubatureRule& rule) {
  const auto m = static_cast<Eigen::Index>(exponents.size());
  if (lambda.size() != m || u.size() != m) throw DimensionError("lambda, u and exponents differ in length");
  DualEval out;
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(m);
  out.hessian = Eigen::MatrixXd::Zero(m, m);
  long double integral = 0.0L;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::VectorXd mono = monomials(exponents, rule.points[q]);
    const long double expo = dot_extended(lambda, mono);
    if (!std::isfinite(expo) || expo > max_exponent) throw ExpOverflow("exp overflow in the maximum entropy dual");
    const long double wl = rule.weights[q] * std::exp(expo);
    const double w = static_cast<double>(wl);
    integral += wl;
    moments += w * mono;
    out.hessian.noalias() -= w * mono * mono.transpose();
  }
  out.value = static_cast<double>(dot_extended(u, lambda) - integral);
  out.gradient = u - moments;
  return out;
}

namespace {

// v_d(lambda + delta) - v_d(lambda) without cancellation: the exponentials
// enter through expm1 of the exponent change.
double value_increase(const Eigen::VectorXd& lambda, const Eigen::VectorXd& delta, const Eigen::VectorXd& u,
                      const std::vector<MultiIndex>& exponents, const CubatureRule& rule) {
  long double change = dot_extended(u, delta);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::VectorXd mono = monomials(exponents, rule.points[q]);
    change -= rule.weights[q] * std::exp(dot_extended(lambda, mono)) * std::expm1(dot_extended(delta, mono));
  }
  return static_cast<double>(change);
}

}  // namespace

DensityEstimate maxent_fit(const MomentTarget& target, int d, const CubatureRule& rule, const NewtonConfig& config) {
  check_dimensions(target.p, 2 * d);
  if (target.degree != 2 * d) throw MaxentError("moment target degree does not match 2d");
  if (rule.p != target.p) throw DimensionError("cubature dimension does not match the target");
  const auto m = static_cast<Eigen::Index>(target.exponents.size());
  if (target.u.size() != m || m == 0) throw DimensionError("moment target has the wrong length");
  if (!(target.u[0] > 0.0)) {
    throw MaxentError("u_0 must be positive (the shifted coordinate has no mass)");
  }

  DensityEstimate est;
  est.p = target.p;
  est.degree = target.degree;
  est.exponents = target.exponents;
  est.box = target.box;
  est.shift = target.shift;
  est.lambda = Eigen::VectorXd::Zero(m);
  est.lambda[0] = std::log(target.u[0]);

  DualEval cur = dual_value_grad_hess(est.lambda, target.u, target.exponents, rule);
  for (int it = 0;; ++it) {
    est.iterations = it;
    est.gradient_norm = cur.gradient.lpNorm<Eigen::Infinity>();
    est.values.push_back(cur.value);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cur.hessian, Eigen::EigenvaluesOnly);
    est.max_hessian_eigenvalue.push_back(es.eigenvalues().maxCoeff());
    if (est.gradient_norm <= config.tolerance) return est;
    if (it == config.max_iterations) {
      char msg[96];
      std::snprintf(msg, sizeof(msg), "maximum entropy Newton iteration did not converge (gradient %.3g)",
                    est.gradient_norm);
      throw MaxentError(msg);
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(-cur.hessian);
    const Eigen::VectorXd step = ldlt.solve(cur.gradient);
    if (!step.allFinite()) throw MaxentError("singular maximum entropy Hessian");

    // Backtracking: halve until v_d does not decrease.
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= config.max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = est.lambda + t * step;
      try {
        DualEval next = dual_value_grad_hess(trial, target.u, target.exponents, rule);
        if (value_increase(est.lambda, t * step, target.u, target.exponents, rule) >= 0.0) {
          est.lambda = trial;
          cur = std::move(next);
          accepted = true;
          break;
        }
      } catch (const ExpOverflow&) {
        // damp further
      }
    }
    if (!accepted) throw ExpOverflow("no damped Newton step improves the maximum entropy dual");
  }
}

double density_eval(const DensityEstimate& est, std::span<const double> y) {
  const std::vector<double> t = to_unit_box(est.box, y);
  return std::exp(est.lambda.dot(monomials(est.exponents, t)));
}

Eigen::VectorXd density_moments(const DensityEstimate& est, const CubatureRule& rule) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(est.exponents.size()));
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Eigen::VectorXd mono = monomials(est.exponents, rule.points[q]);
    out += rule.weights[q] * std::exp(est.lambda.dot(mono)) * mono;
  }
  return out;
}

double lower_bound_for_shift(const ParametricProblem& prob, std::size_t k, int order, const SolverBackend& backend) {
  if (k >= prob.n) throw DimensionError("coordinate index out of range");
  ParametricProblem aux = prob;
  aux.objective = Polynomial::variable(prob.n, prob.p, k);
  const MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 2 * order);
  const RelaxationSolution sol = solve_relaxation(assemble_primal(aux, gamma, order, true), backend);
  if (sol.status != RelaxationStatus::optimal) {
    throw MaxentError("auxiliary relaxation for the shift of x" + std::to_string(k + 1) + " failed: " +
                      to_string(sol.status) + (sol.message.empty() ? "" : " (" + sol.message + ")"));
  }
  return sol.rho - 1e-6;
}

MomentTarget shifted_moments(const MomentSequence& z, const MarginalMoments& gamma, std::size_t k, double a_k,
                             int d, const Box& box) {
  const std::size_t n = z.n();
  const std::size_t p = z.p();
  if (k >= n) throw DimensionError("coordinate index out of range");
  if (box.size() != p) throw DimensionError("normalisation box has the wrong dimension");
  check_dimensions(p, 2 * d);
  if (2 * d + 1 > 2 * z.order()) {
    throw std::out_of_range("moments z_{e(k) beta} with |beta| = " + std::to_string(2 * d) +
                            " exceed the relaxation order " + std::to_string(z.order()));
  }
  MomentTarget out;
  out.k = k;
  out.shift = a_k;
  out.p = p;
  out.degree = 2 * d;
  out.exponents = enumerate_basis(0, p, static_cast<std::size_t>(2 * d));
  out.box = box;
  const std::size_t m = out.exponents.size();
  std::vector<double> raw(m);
  for (std::size_t e = 0; e < m; ++e) {
    MultiIndex idx(n + p);
    idx[k] = 1;
    for (std::size_t j = 0; j < p; ++j) idx[n + j] = out.exponents[e][j];
    raw[e] = -a_k * gamma(out.exponents[e]) + z.at(idx);
  }
  // t = (y - lo) / (hi - lo): expand t^beta binomially in y.
  const MonomialBasis lookup(0, p, 2 * d);
  out.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t e = 0; e < m; ++e) {
    const MultiIndex& beta = out.exponents[e];
    double acc = 0.0;
    for (std::size_t f = 0; f < m; ++f) {
      const MultiIndex& alpha = out.exponents[f];
      double coef = 1.0;
      for (std::size_t j = 0; j < p && coef != 0.0; ++j) {
        if (alpha[j] > beta[j]) {
          coef = 0.0;
          break;
        }
        const auto [lo, hi] = box[j];
        coef *= binomial(beta[j], alpha[j]) * std::pow(-lo, beta[j] - alpha[j]) / std::pow(hi - lo, beta[j]);
      }
      acc += coef * raw[lookup.position(alpha)];
    }
    out.u[static_cast<Eigen::Index>(e)] = acc;
  }
  return out;
}

void write_density_csv(std::ostream& out, const DensityEstimate& est, const std::vector<std::vector<double>>& grid) {
  std::vector<std::string> header;
  for (std::size_t j = 0; j < est.p; ++j) header.push_back(est.p == 1 ? "y" : "y" + std::to_string(j + 1));
  header.push_back("h");
  write_csv_row(out, header);
  for (const auto& y : grid) {
    std::vector<double> row = y;
    row.push_back(density_eval(est, y));
    write_csv_row(out, row);
  }
}

}  // namespace jmpoly
