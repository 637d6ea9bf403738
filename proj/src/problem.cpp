#include "jmpoly/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jmpoly {

std::vector<Constraint> ParametricProblem::all_constraints() const {
  std::vector<Constraint> out = joint_constraints;
  for (const auto& h : param_constraints) out.push_back({h, false});
  return out;
}

std::vector<int> ParametricProblem::half_degrees() const {
  std::vector<int> out;
  for (const auto& c : all_constraints()) out.push_back(c.half_degree());
  return out;
}

std::vector<Polynomial> box_constraints(std::size_t n, std::size_t p,
                                        const std::vector<std::pair<double, double>>& box) {
  if (box.size() != p) throw DimensionError("box must have one interval per parameter");
  std::vector<Polynomial> out;
  for (std::size_t j = 0; j < p; ++j) {
    const auto [a, b] = box[j];
    if (!(a < b)) throw std::invalid_argument("parameter box needs a_j < b_j");
    const Polynomial y = Polynomial::variable(n, p, n + j);
    out.push_back((y - Polynomial::constant(n, p, a)) * (Polynomial::constant(n, p, b) - y));
  }
  return out;
}

std::vector<Polynomial> simplex_constraints(std::size_t n, std::size_t p) {
  std::vector<Polynomial> out;
  Polynomial slack = Polynomial::constant(n, p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    out.push_back(Polynomial::variable(n, p, n + j));
    slack = slack - Polynomial::variable(n, p, n + j);
  }
  out.push_back(slack);
  return out;
}

ParametricProblem make_box_problem(Polynomial objective, std::vector<Constraint> joint,
                                   std::vector<std::pair<double, double>> box) {
  ParametricProblem prob;
  prob.n = objective.n();
  prob.p = objective.p();
  prob.param_constraints = box_constraints(prob.n, prob.p, box);
  prob.objective = std::move(objective);
  prob.joint_constraints = std::move(joint);
  prob.marginal.kind = MarginalKind::uniform_box;
  prob.marginal.box = std::move(box);
  return prob;
}

int min_relaxation_order(const ParametricProblem& prob) {
  int order = (prob.objective.degree() + 1) / 2;
  for (int v : prob.half_degrees()) order = std::max(order, v);
  return order;
}

ParametricProblem add_ball_constraint(const ParametricProblem& prob, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("ball radius must be positive");
  ParametricProblem out = prob;
  Polynomial ball = Polynomial::constant(prob.n, prob.p, radius * radius);
  for (std::size_t v = 0; v < prob.n + prob.p; ++v) {
    ball.add_term(MultiIndex::unit(prob.n + prob.p, v) + MultiIndex::unit(prob.n + prob.p, v), -1.0);
  }
  out.joint_constraints.push_back({std::move(ball), false});
  return out;
}

std::vector<std::string> validate(const ParametricProblem& prob) {
  std::vector<std::string> diags;
  auto check_space = [&](const Polynomial& q, const std::string& what) {
    if (q.n() != prob.n || q.p() != prob.p) diags.push_back(what + " has mismatched variable counts");
  };
  check_space(prob.objective, "objective");
  if (prob.objective.is_zero()) diags.push_back("objective is empty (identically zero)");
  for (std::size_t j = 0; j < prob.joint_constraints.size(); ++j) {
    check_space(prob.joint_constraints[j].poly, "constraint " + std::to_string(j + 1));
  }
  for (std::size_t k = 0; k < prob.param_constraints.size(); ++k) {
    const auto& h = prob.param_constraints[k];
    check_space(h, "parameter constraint " + std::to_string(k + 1));
    if (h.depends_on_x()) {
      diags.push_back("parameter constraint " + std::to_string(k + 1) + " (" + h.to_string() +
                      ") mentions a decision variable x");
    }
  }
  const auto& m = prob.marginal;
  if (m.kind == MarginalKind::uniform_box) {
    if (m.box.size() != prob.p) {
      diags.push_back("uniform marginal needs one box interval per parameter");
    }
    for (std::size_t j = 0; j < m.box.size(); ++j) {
      if (!(m.box[j].first < m.box[j].second)) {
        diags.push_back("parameter box " + std::to_string(j + 1) + " is degenerate (a >= b)");
      }
    }
  }
  if (m.kind == MarginalKind::explicit_moments) {
    auto it = m.table.find(MultiIndex(prob.p));
    const double g0 = it == m.table.end() ? 0.0 : it->second;
    if (std::abs(g0 - 1.0) > 1e-12) {
      diags.push_back("explicit marginal moments must have gamma_0 = 1 (got " + std::to_string(g0) + ")");
    }
  }
  return diags;
}

}  // namespace jmpoly
