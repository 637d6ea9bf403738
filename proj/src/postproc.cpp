#include "jmpoly/postproc.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "jmpoly/csv.hpp"

namespace jmpoly {

double functional_estimate(const Polynomial& h, const MomentSequence& z, bool allow_mixed) {
  if (h.n() != z.n() || h.p() != z.p()) throw DimensionError("functional and moment sequence differ in dimension");
  if (!allow_mixed && h.depends_on_y()) throw PostprocError("functional depends on the parameters y");
  if (h.degree() > 2 * z.order()) throw PostprocError("functional degree exceeds the relaxation budget");
  return z.riesz(h);
}

std::vector<double> mean_vector(const MomentSequence& z) {
  if (z.order() < 1) throw PostprocError("mean vector needs relaxation order >= 1");
  std::vector<double> out(z.n());
  for (std::size_t k = 0; k < z.n(); ++k) out[k] = z.at(MultiIndex::unit(z.n() + z.p(), k));
  return out;
}

bool is_boolean(const ParametricProblem& prob, std::size_t k) {
  if (k >= prob.n) return false;
  const Polynomial xk = Polynomial::variable(prob.n, prob.p, k);
  const Polynomial target = xk * xk - xk;
  for (const auto& c : prob.all_constraints()) {
    if (!c.equality) continue;
    const Polynomial diff = c.poly - target;
    const Polynomial sum = c.poly + target;
    if (diff.terms().empty() || sum.terms().empty()) return true;
  }
  return false;
}

Persistency persistency(const ParametricProblem& prob, const MomentSequence& z, std::size_t k, double tolerance) {
  if (!is_boolean(prob, k)) {
    throw PostprocError("x" + std::to_string(k + 1) + " is not declared boolean (x^2 - x = 0 missing)");
  }
  Persistency out;
  out.raw = z.at(MultiIndex::unit(z.n() + z.p(), k));
  out.value = std::clamp(out.raw, 0.0, 1.0);
  const double slack = 10.0 * tolerance;
  out.clamped = out.raw < -slack || out.raw > 1.0 + slack;
  return out;
}

CoordinateMoments coordinate_moment_curve(const MomentSequence& z, std::size_t k, int budget) {
  if (k >= z.n()) throw DimensionError("coordinate index out of range");
  if (budget < 0 || budget + 1 > 2 * z.order()) {
    throw PostprocError("moment curve budget " + std::to_string(budget) + " exceeds 2*order - 1 = " +
                        std::to_string(2 * z.order() - 1));
  }
  CoordinateMoments out;
  out.k = k;
  out.p = z.p();
  for (const auto& beta : enumerate_basis(0, z.p(), static_cast<std::size_t>(budget))) {
    MultiIndex idx(z.n() + z.p());
    idx[k] = 1;
    for (std::size_t j = 0; j < z.p(); ++j) idx[z.n() + j] = beta[j];
    out.entries.emplace(beta, z.at(idx));
  }
  return out;
}

void write_curve_csv(std::ostream& out, const CoordinateMoments& curve) {
  std::vector<std::string> header;
  for (std::size_t j = 0; j < curve.p; ++j) header.push_back(curve.p == 1 ? "beta" : "beta" + std::to_string(j + 1));
  header.push_back("value");
  write_csv_row(out, header);
  for (const auto& [beta, v] : curve.entries) {
    std::vector<std::string> row;
    for (int b : beta.exponents()) row.push_back(std::to_string(b));
    row.push_back(format_number(v));
    write_csv_row(out, row);
  }
}

}  // namespace jmpoly
