#pragma once

// Line-oriented problem files:
//
//   vars x 2
//   params y 1
//   param_box 0 1
//   objective: y1*x1 + (1 - y1)*x2
//   constraint: 1 - x1^2 - x2^2 >= 0
//   boolean: x1
//   marginal: uniform            (uniform | simplex | file <path>)
//   order: 4
//   density: x1 degree 4 [lower a]
//   ball: 2.0
//
// `#` starts a comment.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jmpoly/problem.hpp"

namespace jmpoly {

class ProblemFileError : public std::runtime_error {
 public:
  ProblemFileError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  /// 1-based; 0 for whole-file diagnostics.
  int line() const { return line_; }

 private:
  int line_;
};

struct DensityRequest {
  std::size_t k = 0;
  /// Total moment degree 2d.
  int degree = 4;
  /// Lower bound a_k for x_k; computed by an auxiliary relaxation when absent.
  std::optional<double> lower;
};

struct ProblemFile {
  /// As written, boolean equalities included; the ball is not applied.
  ParametricProblem problem;
  int order = 0;
  bool order_given = false;
  std::vector<std::size_t> booleans;
  std::vector<DensityRequest> densities;
  std::optional<double> ball;
  /// For `marginal: file`, the path as written.
  std::string marginal_path;

  /// problem with the ball constraint appended when one is declared.
  ParametricProblem effective_problem() const;
};

/// base_dir resolves relative moment-file paths.
ProblemFile parse_problem_text(std::string_view text, const std::filesystem::path& base_dir = {});

ProblemFile parse_problem_file(const std::filesystem::path& path);

/// Inverse of parse_problem_text up to whitespace and comments.
std::string print_problem_file(const ProblemFile& pf);

}  // namespace jmpoly
