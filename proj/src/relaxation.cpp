#include "jmpoly/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jmpoly {

std::string to_string(RelaxationStatus s) {
  switch (s) {
    case RelaxationStatus::optimal:
      return "optimal";
    case RelaxationStatus::infeasible:
      return "infeasible";
    case RelaxationStatus::unbounded:
      return "unbounded";
    case RelaxationStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

RelaxationStatus from_solver(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal:
      return RelaxationStatus::optimal;
    case SolverStatus::infeasible:
      return RelaxationStatus::infeasible;
    case SolverStatus::unbounded:
      return RelaxationStatus::unbounded;
    case SolverStatus::numerical_failure:
      break;
  }
  return RelaxationStatus::numerical_failure;
}

void check_order(const ParametricProblem& prob, const MarginalMoments& gamma, int order) {
  const int i0 = min_relaxation_order(prob);
  if (order < i0) {
    throw RelaxationError("relaxation order " + std::to_string(order) + " is below the minimum order " +
                          std::to_string(i0));
  }
  if (gamma.max_degree() < 2 * order) {
    throw RelaxationError("marginal moments known up to degree " + std::to_string(gamma.max_degree()) +
                          ", need " + std::to_string(2 * order));
  }
  if (gamma.p() != prob.p) throw RelaxationError("marginal moment table has the wrong parameter count");
}

// Embeds a length-p exponent into the joint (x, y) space.
MultiIndex lift_y(const MultiIndex& beta, std::size_t n) {
  MultiIndex out(n + beta.size());
  for (std::size_t j = 0; j < beta.size(); ++j) out[n + j] = beta[j];
  return out;
}

// Block layout shared by the primal and the dual: moment matrix first,
// then one localizing block per inequality and two per equality.
std::vector<BlockInfo> block_layout(const ParametricProblem& prob, int order) {
  std::vector<BlockInfo> out;
  out.push_back({-1, 1, order});
  const auto cons = prob.all_constraints();
  for (std::size_t j = 0; j < cons.size(); ++j) {
    const int d = order - cons[j].half_degree();
    out.push_back({static_cast<int>(j), 1, d});
    if (cons[j].equality) out.push_back({static_cast<int>(j), -1, d});
  }
  return out;
}

Polynomial block_multiplier(const ParametricProblem& prob, const std::vector<Constraint>& cons,
                            const BlockInfo& info) {
  if (info.constraint < 0) return Polynomial::constant(prob.n, prob.p, 1.0);
  const Polynomial& h = cons[static_cast<std::size_t>(info.constraint)].poly;
  return info.sign > 0 ? h : -h;
}

}  // namespace

PrimalProgram assemble_primal(const ParametricProblem& prob, const MarginalMoments& gamma, int order,
                              bool mass_only) {
  check_order(prob, gamma, order);
  PrimalProgram out;
  out.order = order;
  out.n = prob.n;
  out.p = prob.p;
  const MonomialBasis basis(prob.n, prob.p, 2 * order);
  out.program.num_vars = basis.size();
  for (const auto& [idx, coef] : prob.objective.terms()) {
    if (idx.degree() > 2 * order) throw RelaxationError("objective degree exceeds 2*order");
    out.program.objective.emplace_back(basis.position(idx), coef);
  }
  const auto cons = prob.all_constraints();
  out.blocks = block_layout(prob, order);
  for (const auto& info : out.blocks) {
    out.program.psd_blocks.push_back(
        build_localizing_matrix(block_multiplier(prob, cons, info), prob.n, prob.p, info.half_degree, order));
  }
  const int rows_degree = mass_only ? 0 : 2 * order;
  for (const auto& beta : enumerate_basis(0, prob.p, static_cast<std::size_t>(rows_degree))) {
    const double rhs = mass_only ? 1.0 : gamma(beta);
    out.program.equalities.push_back({{{basis.position(lift_y(beta, prob.n)), 1.0}}, rhs});
    out.marginal_rows.push_back(beta);
  }
  return out;
}

RelaxationSolution solve_relaxation(const PrimalProgram& prog, const SolverBackend& backend) {
  RelaxationSolution sol;
  sol.order = prog.order;
  sol.solver_tolerance = backend.tolerance();
  sol.marginal_rows = prog.marginal_rows;
  const auto cap = backend.capability();
  for (const auto& blk : prog.program.psd_blocks) {
    if (blk.side() > cap.max_block_side) {
      sol.message = "block side " + std::to_string(blk.side()) + " exceeds backend capability";
      return sol;
    }
  }
  if (prog.program.num_vars > cap.max_vars) {
    sol.message = "variable count exceeds backend capability";
    return sol;
  }
  const SolverResult res = backend.solve(prog.program);
  sol.status = from_solver(res.status);
  sol.message = res.message;
  sol.solver_tolerance = std::max(sol.solver_tolerance, res.tolerance);
  if (res.status != SolverStatus::optimal) {
    if (res.status == SolverStatus::infeasible) sol.rho = std::numeric_limits<double>::infinity();
    return sol;
  }
  std::vector<double> zv(res.primal.data(), res.primal.data() + res.primal.size());
  sol.z.emplace(prog.n, prog.p, prog.order, std::move(zv));
  sol.rho = res.primal_objective;
  sol.dual_objective = res.dual_objective;
  sol.certificates = res.block_duals;
  sol.equality_duals = res.equality_duals;
  return sol;
}

Polynomial recover_dual_from_primal(const RelaxationSolution& solution) {
  if (!solution.z) throw RelaxationError("relaxation was not solved to optimality");
  if (solution.equality_duals.size() != static_cast<Eigen::Index>(solution.marginal_rows.size()) ||
      solution.marginal_rows.empty()) {
    throw RelaxationError("equality multipliers are unavailable; use the explicit SOS program");
  }
  const std::size_t n = solution.z->n();
  const std::size_t p = solution.z->p();
  Polynomial out(n, p);
  for (std::size_t l = 0; l < solution.marginal_rows.size(); ++l) {
    out.add_term(lift_y(solution.marginal_rows[l], n), solution.equality_duals[static_cast<Eigen::Index>(l)]);
  }
  return out;
}

std::vector<RelaxationSolution> solve_primal(const ParametricProblem& prob, const MarginalMoments& gamma,
                                             int first, int last, const SolverBackend& backend) {
  std::vector<RelaxationSolution> out;
  for (int i = first; i <= last; ++i) {
    RelaxationSolution sol = solve_relaxation(assemble_primal(prob, gamma, i), backend);
    if (sol.status == RelaxationStatus::optimal) sol.dual_poly = recover_dual_from_primal(sol);
    if (sol.status == RelaxationStatus::numerical_failure) {
      sol.message = "order " + std::to_string(i) + ": " + sol.message;
    }
    out.push_back(std::move(sol));
  }
  return out;
}

DualProgram assemble_dual(const ParametricProblem& prob, const MarginalMoments& gamma, int order) {
  check_order(prob, gamma, order);
  DualProgram out;
  out.order = order;
  out.n = prob.n;
  out.p = prob.p;
  const MonomialBasis moments(prob.n, prob.p, 2 * order);
  // one equality per monomial of degree <= 2i
  std::vector<LinearForm> rows(moments.size());

  out.coefficient_rows = enumerate_basis(0, prob.p, static_cast<std::size_t>(2 * order));
  std::size_t next = 0;
  for (const auto& beta : out.coefficient_rows) {
    const std::size_t var = next++;
    rows[moments.position(lift_y(beta, prob.n))].emplace_back(var, 1.0);
    // maximise int p dphi == minimise -sum p_beta gamma_beta
    out.program.objective.emplace_back(var, -gamma(beta));
  }

  const auto cons = prob.all_constraints();
  out.blocks = block_layout(prob, order);
  for (const auto& info : out.blocks) {
    const Polynomial mult = block_multiplier(prob, cons, info);
    const MonomialBasis gram_basis(prob.n, prob.p, info.half_degree);
    const std::size_t side = gram_basis.size();
    StructuredMatrix gram(side);
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = r; c < side; ++c) {
        const std::size_t var = next++;
        gram.set(r, c, {{var, 1.0}});
        const MultiIndex base = gram_basis[r] + gram_basis[c];
        const double weight = r == c ? 1.0 : 2.0;
        for (const auto& [u, coef] : mult.terms()) {
          rows[moments.position(base + u)].emplace_back(var, weight * coef);
        }
      }
    }
    out.program.psd_blocks.push_back(std::move(gram));
  }
  out.program.num_vars = next;
  for (std::size_t r = 0; r < moments.size(); ++r) {
    out.program.equalities.push_back({std::move(rows[r]), prob.objective.coefficient(moments[r])});
  }
  return out;
}

DualSolution solve_dual(const ParametricProblem& prob, const MarginalMoments& gamma, int order,
                        const SolverBackend& backend) {
  const DualProgram prog = assemble_dual(prob, gamma, order);
  const SolverResult res = backend.solve(prog.program);
  DualSolution out;
  out.order = order;
  out.message = res.message;
  // The SOS program is the conic dual of the moment relaxation, so an
  // unbounded SOS objective is the emptiness certificate.
  switch (res.status) {
    case SolverStatus::optimal:
      out.status = RelaxationStatus::optimal;
      break;
    case SolverStatus::unbounded:
      out.status = RelaxationStatus::infeasible;
      return out;
    case SolverStatus::infeasible:
      out.status = RelaxationStatus::unbounded;
      return out;
    case SolverStatus::numerical_failure:
      out.status = RelaxationStatus::numerical_failure;
      return out;
  }
  out.objective = -res.primal_objective;
  Polynomial poly(prob.n, prob.p);
  for (std::size_t l = 0; l < prog.coefficient_rows.size(); ++l) {
    poly.add_term(lift_y(prog.coefficient_rows[l], prob.n), res.primal[static_cast<Eigen::Index>(l)]);
  }
  out.poly = std::move(poly);
  for (const auto& blk : prog.program.psd_blocks) {
    std::vector<double> v(res.primal.data(), res.primal.data() + res.primal.size());
    out.grams.push_back(blk.instantiate(v));
  }
  return out;
}

double evaluate_in_y(const Polynomial& poly, std::span<const double> y) {
  if (y.size() != poly.p()) throw DimensionError("parameter point has wrong length");
  std::vector<double> pt(poly.n(), 0.0);
  pt.insert(pt.end(), y.begin(), y.end());
  return poly.evaluate(pt);
}

double PiecewisePoly::evaluate(std::span<const double> y) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& m : members_) best = std::max(best, evaluate_in_y(m, y));
  return best;
}

PiecewisePoly envelope_update(const PiecewisePoly& prev, const Polynomial& p_i) {
  if (!prev.empty() && prev.members().front().p() != p_i.p()) {
    throw DimensionError("envelope members must share the parameter dimension");
  }
  std::vector<Polynomial> members = prev.members();
  members.push_back(p_i);
  return PiecewisePoly(std::move(members));
}

InfeasibilityDiagnosis check_infeasibility_certificate(const RelaxationSolution& solution) {
  InfeasibilityDiagnosis d;
  d.order = solution.order;
  if (solution.status == RelaxationStatus::infeasible) {
    d.empty_slices = true;
    d.message = "relaxation of order " + std::to_string(solution.order) +
                " is infeasible (rho_i = +inf): K_y is empty for every y in a subset of Y of positive "
                "phi-measure";
  } else {
    d.message = "feasible so far at order " + std::to_string(solution.order);
  }
  return d;
}

}  // namespace jmpoly
