#include "jmpoly/marginal.hpp"

#include <cctype>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace jmpoly {

MarginalMoments::MarginalMoments(std::size_t p, int max_degree,
                                 std::map<MultiIndex, double, GradedOrder> values)
    : p_(p), max_degree_(max_degree), values_(std::move(values)) {}

double MarginalMoments::operator()(const MultiIndex& beta) const {
  auto it = values_.find(beta);
  if (it == values_.end()) {
    throw std::out_of_range("marginal moment of degree " + std::to_string(beta.degree()) +
                            " not available (max " + std::to_string(max_degree_) + ")");
  }
  return it->second;
}

MarginalMoments uniform_box_moments(const std::vector<std::pair<double, double>>& bounds, int max_degree) {
  for (const auto& [a, b] : bounds) {
    if (!(a < b)) throw std::invalid_argument("degenerate parameter interval");
  }
  const std::size_t p = bounds.size();
  std::map<MultiIndex, double, GradedOrder> values;
  for (const auto& beta : enumerate_basis(0, p, static_cast<std::size_t>(max_degree))) {
    double g = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      const auto [a, b] = bounds[j];
      const int e = beta[j] + 1;
      g *= (std::pow(b, e) - std::pow(a, e)) / (e * (b - a));
    }
    values.emplace(beta, g);
  }
  return {p, max_degree, std::move(values)};
}

MarginalMoments uniform_simplex_moments(std::size_t p, int max_degree) {
  if (p == 0) throw std::invalid_argument("simplex needs p >= 1");
  std::map<MultiIndex, double, GradedOrder> values;
  for (const auto& beta : enumerate_basis(0, p, static_cast<std::size_t>(max_degree))) {
    // p! prod beta_j! / (|beta| + p)!
    double g = 1.0;
    for (int k = 1; k <= beta.degree(); ++k) g /= static_cast<double>(p + k);
    for (std::size_t j = 0; j < p; ++j) {
      for (int k = 2; k <= beta[j]; ++k) g *= k;
    }
    values.emplace(beta, g);
  }
  return {p, max_degree, std::move(values)};
}

MarginalMoments explicit_moments(const std::map<MultiIndex, double, GradedOrder>& table, std::size_t p,
                                 int max_degree) {
  std::map<MultiIndex, double, GradedOrder> values;
  for (const auto& beta : enumerate_basis(0, p, static_cast<std::size_t>(max_degree))) {
    auto it = table.find(beta);
    if (it == table.end()) {
      std::string idx;
      for (std::size_t j = 0; j < p; ++j) idx += (j ? "," : "") + std::to_string(beta[j]);
      throw std::invalid_argument("explicit moment table is missing beta=(" + idx + ")");
    }
    values.emplace(beta, it->second);
  }
  if (std::abs(values.at(MultiIndex(p)) - 1.0) > 1e-12) {
    throw std::invalid_argument("explicit moment table must have gamma_0 = 1");
  }
  return {p, max_degree, std::move(values)};
}

std::map<MultiIndex, double, GradedOrder> read_moment_csv(std::istream& in, std::size_t p) {
  std::map<MultiIndex, double, GradedOrder> table;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    // a header such as the one write_curve_csv emits
    const char lead = line[line.find_first_not_of(" \t")];
    const bool header = first && std::isalpha(static_cast<unsigned char>(lead));
    first = false;
    if (header) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != p + 1) {
      throw std::invalid_argument("moment csv line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(p + 1) + " fields");
    }
    try {
      std::vector<int> beta;
      for (std::size_t j = 0; j < p; ++j) beta.push_back(std::stoi(cells[j]));
      table[MultiIndex(beta)] = std::stod(cells[p]);
    } catch (const std::exception&) {
      throw std::invalid_argument("moment csv line " + std::to_string(lineno) + ": malformed field");
    }
  }
  return table;
}

MarginalMoments marginal_moments(const MarginalSpec& spec, std::size_t p, int max_degree) {
  switch (spec.kind) {
    case MarginalKind::uniform_box:
      if (spec.box.size() != p) throw DimensionError("box marginal needs one interval per parameter");
      return uniform_box_moments(spec.box, max_degree);
    case MarginalKind::uniform_simplex:
      return uniform_simplex_moments(p, max_degree);
    case MarginalKind::explicit_moments:
      return explicit_moments(spec.table, p, max_degree);
  }
  throw std::logic_error("unknown marginal kind");
}

}  // namespace jmpoly
