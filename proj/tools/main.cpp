#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jmpoly/conic.hpp"
#include "jmpoly/pipeline.hpp"
#include "jmpoly/problem_file.hpp"

namespace {

struct Common {
  std::string file;
  std::string orders;
  std::string out = ".";
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool relaxation) {
  cmd->add_option("file", c.file, "problem file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "oracle seed");
  cmd->add_option("--threads", c.threads, "oracle worker threads (0 = all cores)");
  if (relaxation) {
    cmd->add_option("--orders", c.orders, "relaxation orders a..b");
    cmd->add_option("--tolerance", c.tolerance, "solver tolerance")->check(CLI::PositiveNumber);
  }
}

jmpoly::RunOptions options(const Common& c) {
  jmpoly::RunOptions opts;
  if (!c.orders.empty()) opts.orders = jmpoly::parse_order_range(c.orders);
  opts.out_dir = c.out;
  opts.seed = c.seed;
  opts.tolerance = c.tolerance;
  opts.threads = c.threads;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint+marginal moment relaxations for parametric polynomial programs"};
  app.require_subcommand(1);

  Common solve_args, oracle_args, compare_args;
  int grid = 101;
  auto* solve = app.add_subcommand("solve", "solve the relaxation hierarchy and write CSV tables");
  add_common(solve, solve_args, true);
  auto* oracle = app.add_subcommand("oracle", "pointwise reference solutions on a parameter grid");
  add_common(oracle, oracle_args, false);
  oracle->add_option("--grid", grid, "points per parameter")->check(CLI::Range(2, 100000));
  auto* compare = app.add_subcommand("compare", "solve, run the oracle and write comparison tables");
  add_common(compare, compare_args, true);
  compare->add_option("--grid", grid, "points per parameter")->check(CLI::Range(2, 100000));

  CLI11_PARSE(app, argc, argv);

  try {
    const Common& args = solve->parsed() ? solve_args : oracle->parsed() ? oracle_args : compare_args;
    const jmpoly::ProblemFile pf = jmpoly::parse_problem_file(args.file);
    jmpoly::RunOptions opts = options(args);
    opts.grid = grid;
    jmpoly::InteriorPointSettings settings;
    settings.tolerance = opts.tolerance;
    const jmpoly::InteriorPointSolver backend(settings);

    jmpoly::RunReport report;
    if (solve->parsed()) {
      report = jmpoly::run_solve(pf, opts, backend, std::cerr);
    } else if (oracle->parsed()) {
      report = jmpoly::run_oracle_only(pf, opts, std::cerr);
    } else {
      report = jmpoly::run_compare(pf, opts, backend, std::cerr);
    }
    for (const auto& f : report.written) std::cout << (opts.out_dir / f).string() << "\n";
    return report.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return jmpoly::exit_failure;
  }
}
