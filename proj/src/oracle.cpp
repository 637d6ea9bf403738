#include "jmpoly/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include <Eigen/Dense>

#include "jmpoly/csv.hpp"
#include "jmpoly/maxent.hpp"

namespace jmpoly {

namespace {

// Polynomial in x alone with flattened exponents, for fast evaluation.
class XPoly {
 public:
  XPoly() = default;
  XPoly(const Polynomial& poly, std::span<const double> y) : n_(poly.n()) {
    std::map<std::vector<int>, double> merged;
    for (const auto& [idx, coef] : poly.terms()) {
      double c = coef;
      for (std::size_t j = 0; j < y.size(); ++j) c *= std::pow(y[j], idx[n_ + j]);
      std::vector<int> xe(idx.exponents().begin(), idx.exponents().begin() + static_cast<long>(n_));
      merged[xe] += c;
    }
    for (const auto& [xe, c] : merged) {
      if (c == 0.0) continue;
      coef_.push_back(c);
      exps_.insert(exps_.end(), xe.begin(), xe.end());
      for (int e : xe) max_exp_ = std::max(max_exp_, e);
    }
  }

  double operator()(const double* x) const {
    double out = 0.0;
    for (std::size_t t = 0; t < coef_.size(); ++t) {
      double v = coef_[t];
      const int* e = &exps_[t * n_];
      for (std::size_t i = 0; i < n_; ++i) {
        for (int k = 0; k < e[i]; ++k) v *= x[i];
      }
      out += v;
    }
    return out;
  }

  XPoly derivative(std::size_t v) const {
    XPoly out;
    out.n_ = n_;
    for (std::size_t t = 0; t < coef_.size(); ++t) {
      const int* e = &exps_[t * n_];
      if (e[v] == 0) continue;
      out.coef_.push_back(coef_[t] * e[v]);
      for (std::size_t i = 0; i < n_; ++i) {
        const int ei = i == v ? e[i] - 1 : e[i];
        out.exps_.push_back(ei);
        out.max_exp_ = std::max(out.max_exp_, ei);
      }
    }
    return out;
  }

  // Coefficients of a polynomial of degree <= 2 without cross terms:
  // c + sum l_i x_i + sum q_i x_i^2. False when the shape does not match.
  bool separable_quadratic(double& c, std::vector<double>& l, std::vector<double>& q) const {
    c = 0.0;
    l.assign(n_, 0.0);
    q.assign(n_, 0.0);
    for (std::size_t t = 0; t < coef_.size(); ++t) {
      const int* e = &exps_[t * n_];
      int deg = 0;
      std::size_t var = 0;
      int nz = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        deg += e[i];
        if (e[i]) {
          ++nz;
          var = i;
        }
      }
      if (deg == 0) {
        c += coef_[t];
      } else if (deg == 1) {
        l[var] += coef_[t];
      } else if (deg == 2 && nz == 1) {
        q[var] += coef_[t];
      } else {
        return false;
      }
    }
    return true;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> coef_;
  std::vector<int> exps_;
  int max_exp_ = 0;
};

struct Restricted {
  std::size_t n = 0;
  XPoly f;
  std::vector<XPoly> g;  // >= 0
  std::vector<XPoly> h;  // == 0
  std::vector<XPoly> df;
  std::vector<std::vector<XPoly>> dg, dh;
  std::vector<std::vector<XPoly>> d2f;
  std::vector<std::vector<std::vector<XPoly>>> d2g, d2h;
};

Restricted restrict_to(const ParametricProblem& prob, std::span<const double> y) {
  Restricted r;
  r.n = prob.n;
  r.f = XPoly(prob.objective, y);
  for (const auto& c : prob.joint_constraints) {
    if (!c.poly.depends_on_x()) continue;
    (c.equality ? r.h : r.g).emplace_back(c.poly, y);
  }
  auto grad = [&](const XPoly& p) {
    std::vector<XPoly> out;
    for (std::size_t i = 0; i < r.n; ++i) out.push_back(p.derivative(i));
    return out;
  };
  auto hess = [&](const XPoly& p) {
    std::vector<std::vector<XPoly>> out;
    for (std::size_t i = 0; i < r.n; ++i) out.push_back(grad(p.derivative(i)));
    return out;
  };
  r.df = grad(r.f);
  r.d2f = hess(r.f);
  for (const auto& p : r.g) {
    r.dg.push_back(grad(p));
    r.d2g.push_back(hess(p));
  }
  for (const auto& p : r.h) {
    r.dh.push_back(grad(p));
    r.d2h.push_back(hess(p));
  }
  return r;
}

// Largest violation over the restricted constraints.
double violation(const Restricted& r, const double* x) {
  double v = 0.0;
  for (const auto& g : r.g) v = std::max(v, -g(x));
  for (const auto& h : r.h) v = std::max(v, std::abs(h(x)));
  return v;
}

// Parameter-only constraints that fail at y make K_y empty outright.
bool parameter_feasible(const ParametricProblem& prob, std::span<const double> y, double tol) {
  std::vector<double> pt(prob.n, 0.0);
  pt.insert(pt.end(), y.begin(), y.end());
  for (const auto& c : prob.joint_constraints) {
    if (c.poly.depends_on_x()) continue;
    const double v = c.poly.evaluate(pt);
    if (c.equality ? std::abs(v) > tol : v < -tol) return false;
  }
  return true;
}

double penalised(const Restricted& r, const double* x, double mu) {
  double pen = 0.0;
  for (const auto& g : r.g) {
    const double v = std::min(0.0, g(x));
    pen += v * v;
  }
  for (const auto& h : r.h) {
    const double v = h(x);
    pen += v * v;
  }
  return r.f(x) + mu * pen;
}

// Coordinate descent with shrinking steps on the penalised objective.
void descend(const Restricted& r, std::vector<double>& x, const std::vector<std::pair<double, double>>& box,
             int iterations) {
  double width = 0.0;
  for (const auto& [a, b] : box) width = std::max(width, b - a);
  for (double mu : {1e2, 1e4, 1e6}) {
    double step = 0.125 * width;
    double cur = penalised(r, x.data(), mu);
    for (int it = 0; it < iterations && step > 1e-9 * std::max(1.0, width); ++it) {
      bool moved = false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        for (double dir : {1.0, -1.0}) {
          const double old = x[i];
          x[i] = std::clamp(old + dir * step, box[i].first, box[i].second);
          const double val = penalised(r, x.data(), mu);
          if (val < cur) {
            cur = val;
            moved = true;
            break;
          }
          x[i] = old;
        }
      }
      if (!moved) step *= 0.5;
    }
  }
}

// Newton on the KKT system of the given active set. Returns the point and
// multipliers (inequalities first) or nothing on failure.
bool kkt_polish(const Restricted& r, std::vector<double>& x, const std::vector<std::size_t>& active_g,
                std::vector<double>& mult_g) {
  const std::size_t n = r.n;
  const std::size_t na = active_g.size() + r.h.size();
  const auto dim = static_cast<Eigen::Index>(n + na);
  Eigen::VectorXd z(dim);
  for (std::size_t i = 0; i < n; ++i) z[static_cast<Eigen::Index>(i)] = x[i];

  auto jac_row = [&](std::size_t a, const double* px) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    const auto& d = a < active_g.size() ? r.dg[active_g[a]] : r.dh[a - active_g.size()];
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = d[i](px);
    return out;
  };
  auto cons_val = [&](std::size_t a, const double* px) {
    return a < active_g.size() ? r.g[active_g[a]](px) : r.h[a - active_g.size()](px);
  };
  auto residual = [&](const Eigen::VectorXd& zz) {
    const double* px = zz.data();
    Eigen::VectorXd out(dim);
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = r.df[i](px);
    for (std::size_t a = 0; a < na; ++a) {
      const double m = zz[static_cast<Eigen::Index>(n + a)];
      out.head(static_cast<Eigen::Index>(n)) -= m * jac_row(a, px);
      out[static_cast<Eigen::Index>(n + a)] = cons_val(a, px);
    }
    return out;
  };

  // least-squares multipliers at the start
  if (na > 0) {
    Eigen::MatrixXd jt(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(na));
    Eigen::VectorXd grad(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) grad[static_cast<Eigen::Index>(i)] = r.df[i](x.data());
    for (std::size_t a = 0; a < na; ++a) jt.col(static_cast<Eigen::Index>(a)) = jac_row(a, x.data());
    z.tail(static_cast<Eigen::Index>(na)) = jt.completeOrthogonalDecomposition().solve(grad);
  }

  Eigen::VectorXd res = residual(z);
  for (int it = 0; it < 60; ++it) {
    if (res.lpNorm<Eigen::Infinity>() < 1e-13) break;
    const double* px = z.data();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double hij = r.d2f[i][j](px);
        for (std::size_t a = 0; a < na; ++a) {
          const double m = z[static_cast<Eigen::Index>(n + a)];
          const auto& h2 = a < active_g.size() ? r.d2g[active_g[a]] : r.d2h[a - active_g.size()];
          hij -= m * h2[i][j](px);
        }
        kkt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hij;
      }
    }
    for (std::size_t a = 0; a < na; ++a) {
      const Eigen::VectorXd row = jac_row(a, px);
      const auto col = static_cast<Eigen::Index>(n + a);
      kkt.block(0, col, static_cast<Eigen::Index>(n), 1) = -row;
      kkt.block(col, 0, 1, static_cast<Eigen::Index>(n)) = row.transpose();
    }
    const Eigen::VectorXd step = kkt.colPivHouseholderQr().solve(-res);
    if (!step.allFinite()) return false;
    double t = 1.0;
    bool ok = false;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = z + t * step;
      const Eigen::VectorXd tr = residual(trial);
      if (tr.norm() < (1.0 - 1e-4 * t) * res.norm() || tr.norm() < 1e-14) {
        z = trial;
        res = tr;
        ok = true;
        break;
      }
    }
    if (!ok) break;
  }
  if (res.lpNorm<Eigen::Infinity>() > 1e-10) return false;
  for (std::size_t i = 0; i < n; ++i) x[i] = z[static_cast<Eigen::Index>(i)];
  mult_g.assign(active_g.size(), 0.0);
  for (std::size_t a = 0; a < active_g.size(); ++a) mult_g[a] = z[static_cast<Eigen::Index>(n + a)];
  return true;
}

// Polishes a descent end point into a KKT point, dropping active
// inequalities whose multipliers come out negative.
bool polish(const Restricted& r, std::vector<double>& x) {
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < r.g.size(); ++j) {
    if (r.g[j](x.data()) < 1e-4) active.push_back(j);
  }
  for (std::size_t tries = 0; tries <= r.g.size(); ++tries) {
    std::vector<double> trial = x;
    std::vector<double> mult;
    if (active.size() + r.h.size() > r.n) {
      // keep the most nearly active constraints only
      std::sort(active.begin(), active.end(),
                [&](std::size_t a, std::size_t b) { return r.g[a](x.data()) < r.g[b](x.data()); });
      active.resize(r.n >= r.h.size() ? r.n - r.h.size() : 0);
    }
    if (!kkt_polish(r, trial, active, mult)) return false;
    std::size_t worst = mult.size();
    double most = -1e-10;
    for (std::size_t a = 0; a < mult.size(); ++a) {
      if (mult[a] < most) {
        most = mult[a];
        worst = a;
      }
    }
    if (worst == mult.size()) {
      x = std::move(trial);
      return true;
    }
    active.erase(active.begin() + static_cast<long>(worst));
  }
  return false;
}

// Gauss-Newton on the violated constraints, used where the penalty stalls
// (slices that shrink to a point).
bool restore(const Restricted& r, std::vector<double>& x, double tol) {
  const std::size_t n = r.n;
  double cur = violation(r, x.data());
  for (int it = 0; it < 100 && cur > 0.1 * tol; ++it) {
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    auto add = [&](const std::vector<XPoly>& d, double v) {
      Eigen::VectorXd row(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) row[static_cast<Eigen::Index>(i)] = d[i](x.data());
      rows.push_back(row);
      rhs.push_back(-v);
    };
    for (std::size_t j = 0; j < r.g.size(); ++j) {
      const double v = r.g[j](x.data());
      if (v < 0.0) add(r.dg[j], v);
    }
    for (std::size_t j = 0; j < r.h.size(); ++j) add(r.dh[j], r.h[j](x.data()));
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < rows.size(); ++a) jac.row(static_cast<Eigen::Index>(a)) = rows[a].transpose();
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    const Eigen::VectorXd dx = jac.completeOrthogonalDecomposition().solve(b);
    if (!dx.allFinite()) return false;
    bool ok = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      std::vector<double> trial = x;
      for (std::size_t i = 0; i < n; ++i) trial[i] += t * dx[static_cast<Eigen::Index>(i)];
      const double v = violation(r, trial.data());
      if (v < cur) {
        x = std::move(trial);
        cur = v;
        ok = true;
        break;
      }
    }
    if (!ok) break;
  }
  return cur <= tol;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

std::optional<std::vector<std::pair<double, double>>> infer_x_box(const ParametricProblem& prob,
                                                                  std::span<const double> y) {
  const std::size_t n = prob.n;
  std::vector<std::pair<double, double>> box(n, {-std::numeric_limits<double>::infinity(),
                                                 std::numeric_limits<double>::infinity()});
  auto use = [&](const XPoly& g) {
    double c;
    std::vector<double> l, q;
    if (!g.separable_quadratic(c, l, q)) return;
    // c + sum l_i x_i - sum (-q_i) x_i^2 >= 0 with -q_i > 0 bounds x_i
    double rad = c;
    for (std::size_t i = 0; i < n; ++i) {
      if (q[i] > 0.0 || (q[i] == 0.0 && l[i] != 0.0)) return;
      if (q[i] < 0.0) rad += l[i] * l[i] / (-4.0 * q[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (q[i] < 0.0 && rad < 0.0) {
        box[i] = {1.0, 0.0};  // K_y empty
        continue;
      }
      if (q[i] >= 0.0) continue;
      const double center = l[i] / (-2.0 * q[i]);
      const double half = std::sqrt(rad / -q[i]);
      box[i].first = std::max(box[i].first, center - half);
      box[i].second = std::min(box[i].second, center + half);
    }
  };
  for (const auto& c : prob.joint_constraints) {
    if (!c.poly.depends_on_x()) continue;
    const XPoly g(c.poly, y);
    use(g);
    if (c.equality) use(XPoly(-c.poly, y));
  }
  for (const auto& [a, b] : box) {
    if (a > b) return box;
  }
  for (const auto& [a, b] : box) {
    if (!std::isfinite(a) || !std::isfinite(b)) return std::nullopt;
  }
  return box;
}

PointSolution solve_pointwise(const ParametricProblem& prob, std::span<const double> y, const OracleConfig& config) {
  if (y.size() != prob.p) throw DimensionError("parameter point has wrong length");
  PointSolution out;
  const double tol = config.feasibility_tolerance;
  if (!parameter_feasible(prob, y, tol)) return out;

  std::vector<std::pair<double, double>> box = config.x_box;
  const bool inferred_box = box.empty();
  if (inferred_box) {
    auto inferred = infer_x_box(prob, y);
    if (!inferred) throw OracleError("cannot bound the decision variables; add a ball constraint or an x box");
    box = *inferred;
  }
  if (box.size() != prob.n) throw DimensionError("x box has the wrong dimension");
  for (auto& [a, b] : box) {
    if (a > b) return out;  // empty by the bounding constraints
    if (!inferred_box) continue;
    const double pad = 1e-9 * std::max(1.0, b - a);
    a -= pad;
    b += pad;
  }

  const Restricted r = restrict_to(prob, y);
  std::mt19937_64 rng(config.seed);
  std::vector<std::uniform_real_distribution<double>> dist;
  for (const auto& [a, b] : box) dist.emplace_back(a, b);

  struct Candidate {
    std::vector<double> x;
    double merit;
  };
  std::vector<Candidate> ends;
  ends.reserve(static_cast<std::size_t>(config.samples));
  for (int s = 0; s < config.samples; ++s) {
    std::vector<double> x(prob.n);
    for (std::size_t i = 0; i < prob.n; ++i) x[i] = dist[i](rng);
    descend(r, x, box, config.descent_iterations);
    ends.push_back({x, penalised(r, x.data(), 1e6)});
  }
  std::stable_sort(ends.begin(), ends.end(), [](const Candidate& a, const Candidate& b) { return a.merit < b.merit; });

  // distinct end points, best first
  std::vector<Candidate> distinct;
  for (const auto& c : ends) {
    bool dup = false;
    for (const auto& d : distinct) {
      if (distance(c.x, d.x) < 1e-4) {
        dup = true;
        break;
      }
    }
    if (!dup) distinct.push_back(c);
    if (distinct.size() >= 16) break;
  }

  std::vector<std::pair<double, std::vector<double>>> feasible;
  for (const auto& c : distinct) {
    std::vector<double> start = c.x;
    if (violation(r, start.data()) > tol && !restore(r, start, tol)) continue;
    std::vector<double> x = start;
    if (!polish(r, x) || violation(r, x.data()) > tol) x = std::move(start);
    feasible.emplace_back(r.f(x.data()), x);
  }
  if (feasible.empty()) return out;
  std::stable_sort(feasible.begin(), feasible.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  out.feasible = true;
  out.value = feasible.front().first;
  out.x = feasible.front().second;
  for (std::size_t i = 1; i < feasible.size(); ++i) {
    if (feasible[i].first - out.value <= 1e-6 && distance(feasible[i].second, out.x) > 1e-3) {
      out.tie = true;
      break;
    }
  }
  return out;
}

OracleResult run_oracle(const ParametricProblem& prob, const std::vector<std::vector<double>>& grid,
                        const OracleConfig& config) {
  OracleResult out;
  out.grid = grid;
  out.points.resize(grid.size());
  unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, grid.size())));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < grid.size(); i += workers) {
          OracleConfig node = config;
          node.seed = config.seed + i;
          out.points[i] = solve_pointwise(prob, grid[i], node);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<std::vector<double>> uniform_grid(const ParametricProblem& prob, int count) {
  if (count < 2) throw std::invalid_argument("grid needs at least two points per parameter");
  if (prob.marginal.box.size() != prob.p) throw DimensionError("parameter box is missing");
  std::vector<std::vector<double>> out{{}};
  for (std::size_t j = 0; j < prob.p; ++j) {
    const auto [a, b] = prob.marginal.box[j];
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out) {
      for (int i = 0; i < count; ++i) {
        auto pt = prefix;
        pt.push_back(a + (b - a) * i / (count - 1));
        next.push_back(std::move(pt));
      }
    }
    out = std::move(next);
  }
  if (prob.marginal.kind == MarginalKind::uniform_simplex) {
    std::erase_if(out, [](const std::vector<double>& y) {
      return std::accumulate(y.begin(), y.end(), 0.0) > 1.0 + 1e-12;
    });
  }
  return out;
}

ParameterRule parameter_rule(const ParametricProblem& prob, int count) {
  if (prob.p < 1 || prob.p > 2) throw OracleError("value-function quadrature supports p = 1 or p = 2 only");
  ParameterRule out;
  const QuadratureRule unit = gauss_legendre_rule(count);
  switch (prob.marginal.kind) {
    case MarginalKind::uniform_box: {
      if (prob.marginal.box.size() != prob.p) throw DimensionError("parameter box is missing");
      const CubatureRule cube = tensor_rule(unit, prob.p);
      for (std::size_t q = 0; q < cube.points.size(); ++q) {
        std::vector<double> y(prob.p);
        for (std::size_t j = 0; j < prob.p; ++j) {
          const auto [a, b] = prob.marginal.box[j];
          y[j] = a + (b - a) * cube.points[q][j];
        }
        out.nodes.push_back(std::move(y));
        out.weights.push_back(cube.weights[q]);
      }
      break;
    }
    case MarginalKind::uniform_simplex: {
      if (prob.p == 1) {
        out.nodes.reserve(unit.nodes.size());
        for (std::size_t q = 0; q < unit.nodes.size(); ++q) {
          out.nodes.push_back({unit.nodes[q]});
          out.weights.push_back(unit.weights[q]);
        }
      } else {
        // Duffy map (u, v) -> (u, (1 - u) v), Jacobian 1 - u, density 2.
        for (std::size_t a = 0; a < unit.nodes.size(); ++a) {
          for (std::size_t b = 0; b < unit.nodes.size(); ++b) {
            const double u = unit.nodes[a];
            out.nodes.push_back({u, (1.0 - u) * unit.nodes[b]});
            out.weights.push_back(2.0 * (1.0 - u) * unit.weights[a] * unit.weights[b]);
          }
        }
      }
      break;
    }
    case MarginalKind::explicit_moments:
      throw OracleError("the oracle needs a density for phi; explicit moment marginals are not supported");
  }
  return out;
}

double integrate_value_function(const ParametricProblem& prob, int grid_size, const OracleConfig& config) {
  const ParameterRule rule = parameter_rule(prob, grid_size);
  const OracleResult res = run_oracle(prob, rule.nodes, config);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    if (!res.points[q].feasible) throw OracleError("K_y is empty at a quadrature node");
    acc += rule.weights[q] * res.points[q].value;
  }
  return acc;
}

ReferenceMoments reference_coordinate_moments(const ParametricProblem& prob, std::size_t k,
                                              const std::vector<int>& degrees, int grid_size,
                                              const OracleConfig& config) {
  if (prob.p != 1) throw OracleError("reference coordinate moments need p = 1");
  if (k >= prob.n) throw DimensionError("coordinate index out of range");
  const ParameterRule rule = parameter_rule(prob, grid_size);
  const OracleResult res = run_oracle(prob, rule.nodes, config);
  ReferenceMoments out;
  out.values.assign(degrees.size(), 0.0);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const PointSolution& pt = res.points[q];
    if (!pt.feasible) throw OracleError("K_y is empty at a quadrature node");
    if (pt.tie) ++out.ties;
    for (std::size_t d = 0; d < degrees.size(); ++d) {
      out.values[d] += rule.weights[q] * std::pow(rule.nodes[q][0], degrees[d]) * pt.x[k];
    }
  }
  return out;
}

void write_oracle_csv(std::ostream& out, const ParametricProblem& prob, const OracleResult& result) {
  std::vector<std::string> header;
  for (std::size_t j = 0; j < prob.p; ++j) header.push_back(variable_name(prob.n, prob.n + j));
  header.push_back("J");
  for (std::size_t i = 0; i < prob.n; ++i) header.push_back(variable_name(prob.n, i));
  header.push_back("tie_flag");
  write_csv_row(out, header);
  for (std::size_t g = 0; g < result.grid.size(); ++g) {
    const PointSolution& pt = result.points[g];
    std::vector<std::string> row;
    for (double v : result.grid[g]) row.push_back(format_number(v));
    if (pt.feasible) {
      row.push_back(format_number(pt.value));
      for (double v : pt.x) row.push_back(format_number(v));
    } else {
      row.push_back("inf");
      for (std::size_t i = 0; i < prob.n; ++i) row.push_back("nan");
    }
    row.push_back(pt.tie ? "1" : "0");
    write_csv_row(out, row);
  }
}

}  // namespace jmpoly
