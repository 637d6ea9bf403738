#include "jmpoly/problem_file.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jmpoly/marginal.hpp"
#include "jmpoly/postproc.hpp"

namespace jmpoly {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ProblemFileError("expected a number, got '" + s + "'", line);
  }
}

int to_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ProblemFileError("expected an integer, got '" + s + "'", line);
  }
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Statement {
  std::string key;
  std::string value;
  int line = 0;
};

std::size_t coordinate(const std::string& name, std::size_t n, int line) {
  if (name.size() < 2 || name[0] != 'x') throw ProblemFileError("expected a decision variable, got '" + name + "'", line);
  const int k = to_int(name.substr(1), line);
  if (k < 1 || static_cast<std::size_t>(k) > n) throw ProblemFileError("no variable " + name, line);
  return static_cast<std::size_t>(k - 1);
}

Polynomial expression(const std::string& text, std::size_t n, std::size_t p, int line) {
  try {
    return poly_parse(text, n, p);
  } catch (const std::exception& e) {
    throw ProblemFileError(e.what(), line);
  }
}

Constraint parse_constraint(const std::string& text, std::size_t n, std::size_t p, int line) {
  for (const char* op : {">=", "<=", "=="}) {
    const auto pos = text.find(op);
    if (pos == std::string::npos) continue;
    const Polynomial lhs = expression(text.substr(0, pos), n, p, line);
    const Polynomial rhs = expression(text.substr(pos + 2), n, p, line);
    const std::string o = op;
    if (o == "<=") return {rhs - lhs, false};
    return {lhs - rhs, o == "=="};
  }
  throw ProblemFileError("constraint needs one of >=, <=, ==", line);
}

}  // namespace

ParametricProblem ProblemFile::effective_problem() const {
  return ball ? add_ball_constraint(problem, *ball) : problem;
}

ProblemFile parse_problem_text(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<Statement> stmts;
  {
    std::istringstream in{std::string(text)};
    int lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
      ++lineno;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      std::string line = trim(raw);
      if (line.empty()) continue;
      Statement st;
      st.line = lineno;
      const auto colon = line.find(':');
      const auto space = line.find_first_of(" \t");
      if (colon != std::string::npos && (space == std::string::npos || colon < space)) {
        st.key = trim(line.substr(0, colon));
        st.value = trim(line.substr(colon + 1));
      } else {
        st.key = line.substr(0, space);
        st.value = space == std::string::npos ? std::string() : trim(line.substr(space));
      }
      stmts.push_back(std::move(st));
    }
  }

  ProblemFile pf;
  std::optional<std::size_t> n, p;
  std::vector<std::pair<double, double>> box;
  for (const auto& st : stmts) {
    if (st.key != "vars" && st.key != "params") continue;
    const auto w = words(st.value);
    const char letter = st.key == "vars" ? 'x' : 'y';
    if (w.size() != 2 || w[0] != std::string(1, letter)) {
      throw ProblemFileError(st.key + " expects '" + letter + " <count>'", st.line);
    }
    const int count = to_int(w[1], st.line);
    if (count < (letter == 'x' ? 1 : 0)) throw ProblemFileError("invalid variable count", st.line);
    auto& slot = letter == 'x' ? n : p;
    if (slot) throw ProblemFileError(st.key + " declared twice", st.line);
    slot = static_cast<std::size_t>(count);
  }
  if (!n) throw ProblemFileError("missing 'vars x <n>'", 0);
  if (!p) throw ProblemFileError("missing 'params y <p>'", 0);

  ParametricProblem& prob = pf.problem;
  prob.n = *n;
  prob.p = *p;
  std::optional<Polynomial> objective;
  std::string marginal = "uniform";
  int marginal_line = 0;
  for (const auto& st : stmts) {
    const std::string& key = st.key;
    if (key == "vars" || key == "params") continue;
    if (key == "param_box") {
      const auto w = words(st.value);
      if (w.size() != 2) throw ProblemFileError("param_box expects two bounds", st.line);
      const double a = to_double(w[0], st.line), b = to_double(w[1], st.line);
      if (!(a < b)) throw ProblemFileError("param_box needs lower < upper", st.line);
      box.emplace_back(a, b);
    } else if (key == "objective") {
      if (objective) throw ProblemFileError("objective declared twice", st.line);
      objective = expression(st.value, prob.n, prob.p, st.line);
    } else if (key == "constraint") {
      prob.joint_constraints.push_back(parse_constraint(st.value, prob.n, prob.p, st.line));
    } else if (key == "boolean") {
      std::string list = st.value;
      std::replace(list.begin(), list.end(), ',', ' ');
      for (const auto& w : words(list)) {
        const std::size_t k = coordinate(w, prob.n, st.line);
        if (std::find(pf.booleans.begin(), pf.booleans.end(), k) == pf.booleans.end()) pf.booleans.push_back(k);
      }
    } else if (key == "marginal") {
      marginal = st.value;
      marginal_line = st.line;
    } else if (key == "order") {
      pf.order = to_int(st.value, st.line);
      pf.order_given = true;
      if (pf.order < 1) throw ProblemFileError("order must be positive", st.line);
    } else if (key == "density") {
      const auto w = words(st.value);
      if (w.size() != 3 && w.size() != 5) throw ProblemFileError("density expects 'x<k> degree <2d> [lower <a>]'", st.line);
      DensityRequest req;
      req.k = coordinate(w[0], prob.n, st.line);
      if (w[1] != "degree") throw ProblemFileError("density expects 'degree'", st.line);
      req.degree = to_int(w[2], st.line);
      if (req.degree < 0 || req.degree % 2 != 0) throw ProblemFileError("density degree must be even", st.line);
      if (w.size() == 5) {
        if (w[3] != "lower") throw ProblemFileError("density expects 'lower'", st.line);
        req.lower = to_double(w[4], st.line);
      }
      pf.densities.push_back(req);
    } else if (key == "ball") {
      pf.ball = to_double(st.value, st.line);
      if (!(*pf.ball > 0)) throw ProblemFileError("ball radius must be positive", st.line);
    } else {
      throw ProblemFileError("unknown statement '" + key + "'", st.line);
    }
  }
  if (!objective) throw ProblemFileError("missing objective", 0);
  prob.objective = std::move(*objective);

  for (std::size_t k : pf.booleans) {
    if (is_boolean(prob, k)) continue;
    const Polynomial xk = Polynomial::variable(prob.n, prob.p, k);
    prob.joint_constraints.push_back({xk * xk - xk, true});
  }

  const auto mw = words(marginal);
  if (mw.empty()) throw ProblemFileError("empty marginal", marginal_line);
  if (mw[0] == "uniform" && mw.size() == 1) {
    if (box.size() != prob.p) {
      throw ProblemFileError("uniform marginal needs one param_box line per parameter", marginal_line);
    }
    prob.marginal.kind = MarginalKind::uniform_box;
    prob.marginal.box = box;
    prob.param_constraints = box_constraints(prob.n, prob.p, box);
  } else if (mw[0] == "simplex" && mw.size() == 1) {
    if (!box.empty()) throw ProblemFileError("simplex marginal takes no param_box", marginal_line);
    prob.marginal.kind = MarginalKind::uniform_simplex;
    prob.marginal.box.assign(prob.p, {0.0, 1.0});
    prob.param_constraints = simplex_constraints(prob.n, prob.p);
  } else if (mw[0] == "file" && mw.size() == 2) {
    if (box.size() != prob.p) {
      throw ProblemFileError("file marginal needs one param_box line per parameter", marginal_line);
    }
    pf.marginal_path = mw[1];
    std::filesystem::path path = mw[1];
    if (path.is_relative()) path = base_dir / path;
    std::ifstream in(path);
    if (!in) throw ProblemFileError("cannot open moment file " + path.string(), marginal_line);
    try {
      prob.marginal.table = read_moment_csv(in, prob.p);
    } catch (const std::exception& e) {
      throw ProblemFileError(e.what(), marginal_line);
    }
    prob.marginal.kind = MarginalKind::explicit_moments;
    prob.marginal.box = box;
    prob.param_constraints = box_constraints(prob.n, prob.p, box);
  } else {
    throw ProblemFileError("marginal must be uniform, simplex or 'file <path>'", marginal_line);
  }

  const auto diags = validate(pf.effective_problem());
  if (!diags.empty()) {
    std::string msg = "invalid problem:";
    for (const auto& d : diags) msg += " " + d + ";";
    throw ProblemFileError(msg, 0);
  }
  if (!pf.order_given) pf.order = min_relaxation_order(pf.effective_problem()) + 2;
  return pf;
}

ProblemFile parse_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProblemFileError("cannot open " + path.string(), 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), path.parent_path());
}

std::string print_problem_file(const ProblemFile& pf) {
  const ParametricProblem& prob = pf.problem;
  std::ostringstream out;
  out << "vars x " << prob.n << "\n";
  out << "params y " << prob.p << "\n";
  if (prob.marginal.kind != MarginalKind::uniform_simplex) {
    for (const auto& [a, b] : prob.marginal.box) out << "param_box " << number(a) << " " << number(b) << "\n";
  }
  out << "objective: " << prob.objective.to_string() << "\n";
  for (const auto& c : prob.joint_constraints) {
    out << "constraint: " << c.poly.to_string() << (c.equality ? " == 0" : " >= 0") << "\n";
  }
  if (!pf.booleans.empty()) {
    out << "boolean:";
    for (std::size_t k : pf.booleans) out << " x" << k + 1;
    out << "\n";
  }
  switch (prob.marginal.kind) {
    case MarginalKind::uniform_box:
      out << "marginal: uniform\n";
      break;
    case MarginalKind::uniform_simplex:
      out << "marginal: simplex\n";
      break;
    case MarginalKind::explicit_moments:
      out << "marginal: file " << pf.marginal_path << "\n";
      break;
  }
  if (pf.order_given) out << "order: " << pf.order << "\n";
  for (const auto& d : pf.densities) {
    out << "density: x" << d.k + 1 << " degree " << d.degree;
    if (d.lower) out << " lower " << number(*d.lower);
    out << "\n";
  }
  if (pf.ball) out << "ball: " << number(*pf.ball) << "\n";
  return out.str();
}

}  // namespace jmpoly
