#pragma once

// Orchestration behind the command-line verbs: relaxations, dual bounds,
// post-processing, density fits and oracle comparisons, written as CSV
// tables into an output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "jmpoly/conic.hpp"
#include "jmpoly/oracle.hpp"
#include "jmpoly/problem_file.hpp"
#include "jmpoly/relaxation.hpp"

namespace jmpoly {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_infeasible = 2 };

struct RunOptions {
  /// [first, last]; defaults to [i_0, file order].
  std::optional<std::pair<int, int>> orders;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  /// Points per parameter of the envelope and oracle grids.
  int grid = 101;
  /// Gauss-Legendre nodes per parameter for rho_ref.
  int quadrature_nodes = 64;
  unsigned threads = 0;
};

struct RunReport {
  int exit_code = exit_failure;
  std::vector<RelaxationSolution> solutions;
  std::optional<double> rho_ref;
  /// Files written, relative to out_dir.
  std::vector<std::filesystem::path> written;
};

/// Parses "a..b" or a single order "a".
std::pair<int, int> parse_order_range(const std::string& text);

/// Orders actually solved for pf under opts.
std::pair<int, int> resolve_orders(const ProblemFile& pf, const RunOptions& opts);

RunReport run_solve(const ProblemFile& pf, const RunOptions& opts, const SolverBackend& backend, std::ostream& log);

/// Writes oracle.csv on a uniform grid with opts.grid points per parameter.
RunReport run_oracle_only(const ProblemFile& pf, const RunOptions& opts, std::ostream& log);

/// run_solve plus oracle.csv, gap.csv (J - envelope per grid point) and
/// rho_compare.csv (rho_i against rho_ref).
RunReport run_compare(const ProblemFile& pf, const RunOptions& opts, const SolverBackend& backend, std::ostream& log);

}  // namespace jmpoly
