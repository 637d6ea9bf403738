#include "jmpoly/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "jmpoly/csv.hpp"
#include "jmpoly/marginal.hpp"
#include "jmpoly/maxent.hpp"
#include "jmpoly/postproc.hpp"

namespace jmpoly {

namespace {

class Writer {
 public:
  Writer(const RunOptions& opts, RunReport& report) : opts_(opts), report_(report) {
    std::filesystem::create_directories(opts.out_dir);
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(opts_.out_dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (opts_.out_dir / name).string());
    report_.written.emplace_back(name);
    return out;
  }

 private:
  const RunOptions& opts_;
  RunReport& report_;
};

std::vector<std::string> y_header(std::size_t n, std::size_t p) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < p; ++j) out.push_back(variable_name(n, n + j));
  return out;
}

void write_moments(Writer& w, const ParametricProblem& prob, const std::vector<RelaxationSolution>& sols) {
  auto out = w.open("moments.csv");
  std::vector<std::string> header{"order"};
  for (std::size_t v = 0; v < prob.n + prob.p; ++v) header.push_back(variable_name(prob.n, v));
  header.push_back("value");
  write_csv_row(out, header);
  for (const auto& s : sols) {
    if (!s.z) continue;
    const MomentSequence& z = *s.z;
    for (std::size_t pos = 0; pos < z.size(); ++pos) {
      std::vector<std::string> row{std::to_string(s.order)};
      for (int e : z.basis()[pos].exponents()) row.push_back(std::to_string(e));
      row.push_back(format_number(z[pos]));
      write_csv_row(out, row);
    }
  }
}

void write_rho(Writer& w, const std::vector<RelaxationSolution>& sols) {
  auto out = w.open("rho.csv");
  write_csv_row(out, std::vector<std::string>{"order", "rho", "dual_objective", "status"});
  for (const auto& s : sols) {
    const bool have = s.status == RelaxationStatus::optimal;
    const double inf = std::numeric_limits<double>::infinity();
    const double rho = have ? s.rho : (s.status == RelaxationStatus::infeasible ? inf : std::nan(""));
    const double dual = have ? s.dual_objective : std::nan("");
    write_csv_row(out, std::vector<std::string>{std::to_string(s.order), format_number(rho), format_number(dual),
                                                to_string(s.status)});
  }
}

void write_dual_polys(Writer& w, const ParametricProblem& prob, const std::vector<RelaxationSolution>& sols) {
  auto out = w.open("dual_poly.csv");
  std::vector<std::string> header{"order"};
  for (const auto& h : y_header(prob.n, prob.p)) header.push_back(h);
  header.push_back("coefficient");
  write_csv_row(out, header);
  for (const auto& s : sols) {
    if (!s.dual_poly) continue;
    for (const auto& beta : enumerate_basis(0, prob.p, static_cast<std::size_t>(2 * s.order))) {
      std::vector<int> full(prob.n, 0);
      full.insert(full.end(), beta.exponents().begin(), beta.exponents().end());
      std::vector<std::string> row{std::to_string(s.order)};
      for (int e : beta.exponents()) row.push_back(std::to_string(e));
      row.push_back(format_number(s.dual_poly->coefficient(MultiIndex(full))));
      write_csv_row(out, row);
    }
  }
}

void write_envelope(Writer& w, const ParametricProblem& prob, const std::vector<RelaxationSolution>& sols,
                    const std::vector<std::vector<double>>& grid) {
  auto out = w.open("envelope.csv");
  std::vector<std::string> header = y_header(prob.n, prob.p);
  std::vector<const RelaxationSolution*> members;
  PiecewisePoly env;
  for (const auto& s : sols) {
    if (!s.dual_poly) continue;
    members.push_back(&s);
    header.push_back("p_" + std::to_string(s.order));
    env = envelope_update(env, *s.dual_poly);
  }
  header.push_back("envelope");
  write_csv_row(out, header);
  for (const auto& y : grid) {
    std::vector<double> row = y;
    for (const auto* s : members) row.push_back(evaluate_in_y(*s->dual_poly, y));
    row.push_back(env.evaluate(y));
    write_csv_row(out, row);
  }
}

void write_persistency(Writer& w, const ParametricProblem& prob, const ProblemFile& pf,
                       const std::vector<RelaxationSolution>& sols, double tol) {
  auto out = w.open("persistency.csv");
  write_csv_row(out, std::vector<std::string>{"order", "variable", "persistency", "raw", "clamped"});
  for (const auto& s : sols) {
    if (!s.z) continue;
    for (std::size_t k : pf.booleans) {
      const Persistency per = persistency(prob, *s.z, k, tol);
      write_csv_row(out, std::vector<std::string>{std::to_string(s.order), variable_name(prob.n, k),
                                                  format_number(per.value), format_number(per.raw),
                                                  per.clamped ? "1" : "0"});
    }
  }
}

// Grid over the parameter box used for density tables.
std::vector<std::vector<double>> density_grid(const ParametricProblem& prob, int count) {
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
  return out;
}

bool write_density(Writer& w, const ParametricProblem& prob, const DensityRequest& req,
                   const RelaxationSolution& sol, const MarginalMoments& gamma, const SolverBackend& backend,
                   int grid_count, std::ostream& log) {
  const std::string name = "density_" + std::to_string(req.k + 1) + ".csv";
  try {
    double a = 0.0;
    if (req.lower) {
      a = *req.lower;
    } else {
      a = std::min(0.0, lower_bound_for_shift(prob, req.k, sol.order, backend));
    }
    const MomentTarget target = shifted_moments(*sol.z, gamma, req.k, a, req.degree / 2, prob.marginal.box);
    const DensityEstimate est = maxent_fit(target, req.degree / 2, default_cubature(prob.p));
    log << name << ": order " << sol.order << ", shift " << format_number(a) << ", lambda";
    for (double l : est.lambda) log << " " << format_number(l);
    log << " (" << est.iterations << " Newton steps, |grad| " << format_number(est.gradient_norm) << ")\n";

    const bool uniform = prob.marginal.kind == MarginalKind::uniform_box;
    auto out = w.open(name);
    std::vector<std::string> header = y_header(prob.n, prob.p);
    header.push_back("h");
    if (uniform) header.push_back("estimate");
    write_csv_row(out, header);
    for (const auto& y : density_grid(prob, grid_count)) {
      std::vector<double> row = y;
      const double h = density_eval(est, y);
      row.push_back(h);
      if (uniform) row.push_back(h + a);
      write_csv_row(out, row);
    }
    return true;
  } catch (const std::exception& e) {
    log << "skipped " << name << ": " << e.what() << "\n";
    return false;
  }
}

std::pair<std::vector<std::vector<double>>, OracleResult> oracle_grid(const ParametricProblem& prob,
                                                                       const RunOptions& opts) {
  OracleConfig cfg;
  cfg.seed = opts.seed;
  cfg.threads = opts.threads;
  auto grid = uniform_grid(prob, opts.grid);
  OracleResult res = run_oracle(prob, grid, cfg);
  return {std::move(grid), std::move(res)};
}

}  // namespace

std::pair<int, int> parse_order_range(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || v < 1) throw std::invalid_argument("bad order range '" + text + "'");
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int v = to_int(text);
    return {v, v};
  }
  const int a = to_int(text.substr(0, dots));
  const int b = to_int(text.substr(dots + 2));
  if (a > b) throw std::invalid_argument("bad order range '" + text + "'");
  return {a, b};
}

std::pair<int, int> resolve_orders(const ProblemFile& pf, const RunOptions& opts) {
  const int i0 = min_relaxation_order(pf.effective_problem());
  std::pair<int, int> r = opts.orders ? *opts.orders : std::pair<int, int>{i0, std::max(i0, pf.order)};
  if (r.first < i0) throw std::invalid_argument("order " + std::to_string(r.first) + " is below the minimum " +
                                                std::to_string(i0));
  return r;
}

RunReport run_solve(const ProblemFile& pf, const RunOptions& opts, const SolverBackend& backend, std::ostream& log) {
  RunReport report;
  const ParametricProblem prob = pf.effective_problem();
  const auto [first, last] = resolve_orders(pf, opts);
  const MarginalMoments gamma = marginal_moments(prob.marginal, prob.p, 2 * last);
  Writer w(opts, report);

  bool failed = false;
  bool infeasible = false;
  for (int i = first; i <= last; ++i) {
    RelaxationSolution sol;
    try {
      sol = solve_relaxation(assemble_primal(prob, gamma, i), backend);
      if (sol.status == RelaxationStatus::optimal) sol.dual_poly = recover_dual_from_primal(sol);
    } catch (const std::exception& e) {
      sol.order = i;
      sol.status = RelaxationStatus::numerical_failure;
      sol.message = e.what();
    }
    log << "order " << i << ": " << to_string(sol.status);
    if (sol.status == RelaxationStatus::optimal) {
      log << " rho " << format_number(sol.rho) << " dual " << format_number(sol.dual_objective);
    }
    if (!sol.message.empty()) log << " (" << sol.message << ")";
    log << "\n";
    report.solutions.push_back(std::move(sol));
    const RelaxationSolution& s = report.solutions.back();
    if (s.status == RelaxationStatus::infeasible) {
      log << check_infeasibility_certificate(s).message << "\n";
      infeasible = true;
      break;
    }
    if (s.status != RelaxationStatus::optimal) {
      log << "order " << i << " failed\n";
      failed = true;
      break;
    }
  }

  write_rho(w, report.solutions);
  write_moments(w, prob, report.solutions);
  write_dual_polys(w, prob, report.solutions);
  const RelaxationSolution* best = nullptr;
  for (const auto& s : report.solutions) {
    if (s.status == RelaxationStatus::optimal) best = &s;
  }
  if (best) {
    write_envelope(w, prob, report.solutions, uniform_grid(prob, opts.grid));
  } else {
    log << "skipped envelope.csv: no optimal order\n";
  }
  if (pf.booleans.empty()) {
    log << "skipped persistency.csv: no boolean variables\n";
  } else if (best) {
    write_persistency(w, prob, pf, report.solutions, backend.tolerance());
  } else {
    log << "skipped persistency.csv: no optimal order\n";
  }
  for (const auto& req : pf.densities) {
    if (!best) {
      log << "skipped density_" << req.k + 1 << ".csv: no optimal order\n";
      continue;
    }
    write_density(w, prob, req, *best, gamma, backend, opts.grid, log);
  }

  report.exit_code = infeasible ? exit_infeasible : failed ? exit_failure : exit_ok;
  return report;
}

RunReport run_oracle_only(const ProblemFile& pf, const RunOptions& opts, std::ostream& log) {
  RunReport report;
  const ParametricProblem prob = pf.effective_problem();
  Writer w(opts, report);
  const auto [grid, res] = oracle_grid(prob, opts);
  auto out = w.open("oracle.csv");
  write_oracle_csv(out, prob, res);
  int empty = 0, ties = 0;
  for (const auto& pt : res.points) {
    empty += pt.feasible ? 0 : 1;
    ties += pt.tie ? 1 : 0;
  }
  log << "oracle: " << grid.size() << " points, " << empty << " with empty K_y, " << ties << " near-ties\n";
  report.exit_code = exit_ok;
  return report;
}

RunReport run_compare(const ProblemFile& pf, const RunOptions& opts, const SolverBackend& backend, std::ostream& log) {
  RunReport report = run_solve(pf, opts, backend, log);
  const ParametricProblem prob = pf.effective_problem();
  Writer w(opts, report);

  const auto [grid, res] = oracle_grid(prob, opts);
  {
    auto out = w.open("oracle.csv");
    write_oracle_csv(out, prob, res);
  }

  PiecewisePoly env;
  for (const auto& s : report.solutions) {
    if (s.dual_poly) env = envelope_update(env, *s.dual_poly);
  }
  if (env.empty()) {
    log << "skipped gap.csv: no dual polynomial\n";
  } else {
    auto out = w.open("gap.csv");
    std::vector<std::string> header = y_header(prob.n, prob.p);
    for (const char* h : {"J", "envelope", "gap"}) header.emplace_back(h);
    write_csv_row(out, header);
    double worst_gap = 0.0, worst_violation = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::vector<double> row = grid[g];
      const double e = env.evaluate(grid[g]);
      const double j = res.points[g].feasible ? res.points[g].value : std::numeric_limits<double>::infinity();
      row.push_back(j);
      row.push_back(e);
      row.push_back(j - e);
      write_csv_row(out, row);
      if (std::isfinite(j)) {
        worst_gap = std::max(worst_gap, j - e);
        worst_violation = std::max(worst_violation, e - j);
      }
    }
    log << "max (J - envelope) " << format_number(worst_gap) << ", max (envelope - J) "
        << format_number(worst_violation) << "\n";
  }

  try {
    OracleConfig cfg;
    cfg.seed = opts.seed;
    cfg.threads = opts.threads;
    report.rho_ref = integrate_value_function(prob, opts.quadrature_nodes, cfg);
    log << "rho_ref " << format_number(*report.rho_ref) << "\n";
  } catch (const std::exception& e) {
    log << "skipped rho_ref: " << e.what() << "\n";
  }
  {
    auto out = w.open("rho_compare.csv");
    write_csv_row(out, std::vector<std::string>{"order", "rho", "rho_ref", "difference"});
    const double ref = report.rho_ref.value_or(std::nan(""));
    for (const auto& s : report.solutions) {
      if (s.status != RelaxationStatus::optimal) continue;
      write_csv_row(out, std::vector<double>{static_cast<double>(s.order), s.rho, ref, ref - s.rho});
    }
  }
  return report;
}

}  // namespace jmpoly
