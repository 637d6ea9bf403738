#include <cmath>
#include <cstdio>
#include <ostream>

#include "jmpoly/conic.hpp"

namespace jmpoly {

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal:
      return "optimal";
    case SolverStatus::infeasible:
      return "infeasible";
    case SolverStatus::unbounded:
      return "unbounded";
    case SolverStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

std::vector<std::string> ConicProgram::check() const {
  std::vector<std::string> out;
  auto check_form = [&](const LinearForm& f, const std::string& what) {
    for (const auto& [pos, coef] : f) {
      if (pos >= num_vars) out.push_back(what + " references position " + std::to_string(pos));
      if (!std::isfinite(coef)) out.push_back(what + " has a non-finite coefficient");
    }
  };
  check_form(objective, "objective");
  for (std::size_t l = 0; l < equalities.size(); ++l) {
    check_form(equalities[l].form, "equality " + std::to_string(l));
    if (!std::isfinite(equalities[l].rhs)) out.push_back("equality " + std::to_string(l) + " has non-finite rhs");
  }
  for (std::size_t k = 0; k < psd_blocks.size(); ++k) {
    if (psd_blocks[k].referenced_size() > num_vars) {
      out.push_back("block " + std::to_string(k) + " references beyond num_vars");
    }
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_conic_program(std::ostream& out, const ConicProgram& prog) {
  out << "conic-program 1\n";
  out << "vars " << prog.num_vars << "\n";
  out << "objective " << prog.objective.size() << "\n";
  for (const auto& [pos, coef] : prog.objective) out << pos << " " << num(coef) << "\n";
  out << "equalities " << prog.equalities.size() << "\n";
  for (std::size_t l = 0; l < prog.equalities.size(); ++l) {
    const auto& eq = prog.equalities[l];
    out << "eq " << l << " " << num(eq.rhs) << " " << eq.form.size() << "\n";
    for (const auto& [pos, coef] : eq.form) out << pos << " " << num(coef) << "\n";
  }
  out << "blocks " << prog.psd_blocks.size() << "\n";
  for (std::size_t k = 0; k < prog.psd_blocks.size(); ++k) {
    const auto& blk = prog.psd_blocks[k];
    std::size_t count = 0;
    for (std::size_t r = 0; r < blk.side(); ++r) {
      for (std::size_t c = r; c < blk.side(); ++c) count += blk.entry(r, c).size();
    }
    out << "block " << k << " " << blk.side() << " " << count << "\n";
    for (std::size_t r = 0; r < blk.side(); ++r) {
      for (std::size_t c = r; c < blk.side(); ++c) {
        for (const auto& [pos, coef] : blk.entry(r, c)) {
          out << r << " " << c << " " << pos << " " << num(coef) << "\n";
        }
      }
    }
  }
}

}  // namespace jmpoly
