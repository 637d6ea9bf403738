#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "jmpoly/conic.hpp"

namespace jmpoly {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
// The iteration runs in extended precision: the relaxations are rarely
// strictly complementary and stall early in double.
using Real = long double;
using MatX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VecX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

struct Entry {
  int row;
  int col;
  Real coef;
};

// One decision variable's footprint inside one PSD block (both triangles).
struct BlockVar {
  std::size_t var;
  std::vector<Entry> entries;
};

struct Block {
  int side = 0;
  std::vector<BlockVar> vars;
};

std::vector<Block> index_blocks(const ConicProgram& prog) {
  std::vector<Block> blocks;
  for (const auto& sm : prog.psd_blocks) {
    Block b;
    b.side = static_cast<int>(sm.side());
    std::vector<std::vector<Entry>> per_var(prog.num_vars);
    std::vector<std::size_t> touched;
    for (std::size_t r = 0; r < sm.side(); ++r) {
      for (std::size_t c = 0; c < sm.side(); ++c) {
        for (const auto& [pos, coef] : sm.entry(r, c)) {
          if (coef == 0.0) continue;
          if (per_var[pos].empty()) touched.push_back(pos);
          per_var[pos].push_back({static_cast<int>(r), static_cast<int>(c), coef});
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::size_t v : touched) b.vars.push_back({v, std::move(per_var[v])});
    blocks.push_back(std::move(b));
  }
  return blocks;
}

MatX apply_block(const Block& b, const VecX& x) {
  MatX out = MatX::Zero(b.side, b.side);
  for (const auto& bv : b.vars) {
    const Real xv = x[static_cast<Eigen::Index>(bv.var)];
    if (xv == 0.0) continue;
    for (const auto& e : bv.entries) out(e.row, e.col) += e.coef * xv;
  }
  return out;
}

// out += B^*(M), i.e. out[v] += <A_v, M>.
void add_adjoint(const Block& b, const MatX& m, VecX& out) {
  for (const auto& bv : b.vars) {
    Real s = 0.0;
    for (const auto& e : bv.entries) s += e.coef * m(e.row, e.col);
    out[static_cast<Eigen::Index>(bv.var)] += s;
  }
}

// Largest alpha with M + alpha*dM still PSD (infinity when unbounded).
Real max_step(const MatX& m, const MatX& dm) {
  Eigen::LLT<MatX> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto l = llt.matrixL();
  MatX t = l.solve(dm);
  t = l.solve(t.transpose()).transpose();
  t = 0.5 * (t + t.transpose());
  Eigen::SelfAdjointEigenSolver<MatX> es(t, Eigen::EigenvaluesOnly);
  const Real lmin = es.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<Real>::infinity() : -1.0 / lmin;
}

Real frob_dot(const MatX& a, const MatX& b) { return (a.array() * b.array()).sum(); }

MatX sym(const MatX& m) { return 0.5 * (m + m.transpose()); }

// Solves [H -E^T; -E 0][dx; dl] = [r1; -re] by a Cholesky factor of H and a
// dense Schur complement E H^{-1} E^T for the equality multipliers.
class KktSystem {
 public:
  KktSystem(std::size_t m, const Eigen::SparseMatrix<Real>& e) : m_(m), e_(e) {}

  bool factor(const std::vector<Block>& blocks, const std::vector<MatX>& x,
              const std::vector<MatX>& sinv) {
    const auto m = static_cast<Eigen::Index>(m_);
    std::vector<Eigen::Triplet<Real>> trip;
    VecX diag = VecX::Zero(m);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const Block& b = blocks[k];
      const MatX& xk = x[k];
      const MatX& sk = sinv[k];
      MatX t(b.side, b.side);
      for (std::size_t ia = 0; ia < b.vars.size(); ++ia) {
        // T = X A_a S^{-1}
        t.setZero();
        for (const auto& e : b.vars[ia].entries) t.noalias() += e.coef * xk.col(e.row) * sk.row(e.col);
        for (std::size_t ib = ia; ib < b.vars.size(); ++ib) {
          Real h = 0.0;
          for (const auto& e : b.vars[ib].entries) h += e.coef * t(e.row, e.col);
          const auto ra = static_cast<int>(b.vars[ib].var);
          const auto ca = static_cast<int>(b.vars[ia].var);
          trip.emplace_back(ra, ca, h);
          if (ra == ca) diag[ra] += h;
        }
      }
    }
    h_.resize(m, m);
    h_.setFromTriplets(trip.begin(), trip.end());
    const Real scale = std::max<Real>(1.0, diag.cwiseAbs().maxCoeff());
    bool ok = false;
    for (Real reg : {0.0, 1e-14, 1e-12, 1e-10}) {
      Eigen::SparseMatrix<Real> hr = h_;
      if (reg > 0) {
        for (Eigen::Index i = 0; i < m; ++i) hr.coeffRef(i, i) += reg * scale;
      }
      if (!analyzed_) {
        llt_.analyzePattern(hr);
        analyzed_ = true;
      }
      llt_.factorize(hr);
      if (llt_.info() == Eigen::Success) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
    const Eigen::Index q = e_.rows();
    if (q > 0) {
      hinv_et_ = llt_.solve(MatX(e_.transpose()));
      MatX schur = e_ * hinv_et_;
      schur = 0.5 * (schur + schur.transpose());
      schur_.compute(schur);
      if (schur_.info() != Eigen::Success) return false;
    }
    return true;
  }

  // apply_h evaluates H*v through the block operators, which is more
  // accurate than the assembled matrix once H is badly conditioned.
  template <class ApplyH>
  std::pair<VecX, VecX> solve(const VecX& r1, const VecX& re, const ApplyH& apply_h) const {
    VecX dx, dl;
    solve_once(r1, re, dx, dl);
    const Real scale = 1.0 + std::max(r1.lpNorm<Eigen::Infinity>(), re.size() ? re.lpNorm<Eigen::Infinity>() : 0.0);
    Real last = std::numeric_limits<Real>::infinity();
    for (int it = 0; it < 6; ++it) {
      const VecX s1 = r1 - (apply_h(dx) - e_.transpose() * dl);
      const VecX s2 = re - e_ * dx;
      const Real res = std::max(s1.lpNorm<Eigen::Infinity>(), s2.size() ? s2.lpNorm<Eigen::Infinity>() : 0.0);
      if (res <= 1e-15 * scale || res > 0.5 * last) break;
      last = res;
      VecX cx, cl;
      solve_once(s1, s2, cx, cl);
      dx += cx;
      dl += cl;
    }
    return {dx, dl};
  }

 private:
  void solve_once(const VecX& r1, const VecX& re, VecX& dx, VecX& dl) const {
    const VecX hr = llt_.solve(r1);
    if (e_.rows() > 0) {
      dl = schur_.solve(re - e_ * hr);
      dx = hr + hinv_et_ * dl;
    } else {
      dl = VecX(0);
      dx = hr;
    }
  }

  std::size_t m_;
  const Eigen::SparseMatrix<Real>& e_;
  Eigen::SparseMatrix<Real> h_;
  bool analyzed_ = false;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<Real>, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
  MatX hinv_et_;
  Eigen::LDLT<MatX> schur_;
};

}  // namespace

namespace {

// Program after presolve:
//   min c^T x + offset  s.t.  B_k(x) + C_k >= 0,  E x = b.
// Two reductions are applied. A row with a single entry fixes its variable.
// A variable outside every block that occurs in a single row is free, so it
// absorbs that row and drops out.
struct Reduced {
  std::vector<Block> blocks;
  std::vector<MatX> constant;
  VecX c;
  Eigen::SparseMatrix<Real> e;
  VecX b;
  Real offset = 0.0;
  // full variable -> reduced variable, or -1 when eliminated
  std::vector<long> map;
  VecX fixed_value;
  // equality row -> reduced row; fixed_row, free_row or empty_row otherwise
  std::vector<long> row_map;
  // variable eliminated together with each removed row
  std::vector<std::size_t> row_var;
  bool inconsistent = false;
};

constexpr long fixed_row = -1;
constexpr long empty_row = -2;
constexpr long free_row = -3;

Real row_coef(const LinearEquality& eq, std::size_t var) {
  Real out = 0.0;
  for (const auto& [pos, coef] : eq.form) {
    if (pos == var) out += coef;
  }
  return out;
}

Reduced presolve(const ConicProgram& prog, const std::vector<MatrixXd>* constants) {
  Reduced r;
  const std::size_t m = prog.num_vars;
  const std::size_t q = prog.equalities.size();
  r.map.assign(m, 0);
  r.fixed_value = VecX::Zero(static_cast<Eigen::Index>(m));
  r.row_map.assign(q, 0);
  r.row_var.assign(q, 0);
  std::vector<bool> fixed(m, false), freed(m, false);
  for (std::size_t l = 0; l < q; ++l) {
    const auto& eq = prog.equalities[l];
    std::size_t nnz = 0, var = 0;
    for (const auto& [pos, cf] : eq.form) {
      if (cf == 0.0) continue;
      ++nnz;
      var = pos;
    }
    if (nnz == 1 && !fixed[var]) {
      fixed[var] = true;
      r.fixed_value[static_cast<Eigen::Index>(var)] = eq.rhs / row_coef(eq, var);
      r.row_map[l] = fixed_row;
      r.row_var[l] = var;
    }
  }

  std::vector<bool> in_block(m, false);
  for (const auto& sm : prog.psd_blocks) {
    for (std::size_t i = 0; i < sm.side(); ++i) {
      for (std::size_t j = i; j < sm.side(); ++j) {
        for (const auto& [pos, coef] : sm.entry(i, j)) {
          if (coef != 0.0) in_block[pos] = true;
        }
      }
    }
  }
  std::vector<int> rows_of(m, 0);
  std::vector<std::size_t> last_row(m, 0);
  for (std::size_t l = 0; l < q; ++l) {
    if (r.row_map[l] == fixed_row) continue;
    for (const auto& [pos, coef] : prog.equalities[l].form) {
      if (coef == 0.0 || (rows_of[pos] > 0 && last_row[pos] == l)) continue;
      ++rows_of[pos];
      last_row[pos] = l;
    }
  }

  VecX cfull = VecX::Zero(static_cast<Eigen::Index>(m));
  for (const auto& [pos, coef] : prog.objective) cfull[static_cast<Eigen::Index>(pos)] += coef;
  for (std::size_t v = 0; v < m; ++v) {
    const std::size_t l = last_row[v];
    if (fixed[v] || in_block[v] || rows_of[v] != 1 || r.row_map[l] != 0) continue;
    const auto& eq = prog.equalities[l];
    const Real ev = row_coef(eq, v);
    if (ev == 0.0) continue;
    freed[v] = true;
    r.row_map[l] = free_row;
    r.row_var[l] = v;
    // substitute v = (b_l - sum_{j != v} e_j x_j) / e_v into the objective
    const Real ratio = cfull[static_cast<Eigen::Index>(v)] / ev;
    r.offset += ratio * eq.rhs;
    for (const auto& [pos, coef] : eq.form) {
      if (pos != v) cfull[static_cast<Eigen::Index>(pos)] -= ratio * coef;
    }
    cfull[static_cast<Eigen::Index>(v)] = 0.0;
  }

  long next = 0;
  for (std::size_t v = 0; v < m; ++v) r.map[v] = (fixed[v] || freed[v]) ? -1 : next++;
  const auto mr = static_cast<Eigen::Index>(next);

  r.c = VecX::Zero(mr);
  for (std::size_t v = 0; v < m; ++v) {
    const Real cv = cfull[static_cast<Eigen::Index>(v)];
    if (r.map[v] >= 0) {
      r.c[r.map[v]] = cv;
    } else if (fixed[v]) {
      r.offset += cv * r.fixed_value[static_cast<Eigen::Index>(v)];
    }
  }

  std::vector<Eigen::Triplet<Real>> trip;
  std::vector<Real> rhs;
  long row = 0;
  for (std::size_t l = 0; l < q; ++l) {
    if (r.row_map[l] < 0) continue;
    const auto& eq = prog.equalities[l];
    Real bl = eq.rhs;
    bool any = false;
    for (const auto& [pos, coef] : eq.form) {
      if (coef == 0.0) continue;
      if (r.map[pos] < 0) {
        bl -= coef * r.fixed_value[static_cast<Eigen::Index>(pos)];
      } else {
        trip.emplace_back(static_cast<int>(row), static_cast<int>(r.map[pos]), coef);
        any = true;
      }
    }
    if (!any) {
      if (std::abs(bl) > 1e-12 * (1.0 + std::abs(eq.rhs))) r.inconsistent = true;
      r.row_map[l] = empty_row;
      continue;
    }
    r.row_map[l] = row++;
    rhs.push_back(bl);
  }
  r.e.resize(row, mr);
  r.e.setFromTriplets(trip.begin(), trip.end());
  r.b = Eigen::Map<VecX>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));

  const std::vector<Block> full_blocks = index_blocks(prog);
  for (std::size_t k = 0; k < full_blocks.size(); ++k) {
    const Block& full = full_blocks[k];
    Block blk;
    blk.side = full.side;
    MatX cst = constants ? MatX((*constants)[k].cast<Real>()) : MatX::Zero(full.side, full.side);
    for (const auto& bv : full.vars) {
      if (r.map[bv.var] >= 0) {
        blk.vars.push_back({static_cast<std::size_t>(r.map[bv.var]), bv.entries});
      } else {
        const Real xv = r.fixed_value[static_cast<Eigen::Index>(bv.var)];
        for (const auto& en : bv.entries) cst(en.row, en.col) += en.coef * xv;
      }
    }
    r.blocks.push_back(std::move(blk));
    r.constant.push_back(std::move(cst));
  }
  return r;
}


struct Core {
  SolverStatus status = SolverStatus::numerical_failure;
  VecX x, lam;
  std::vector<MatX> xd;
  Real pobj = 0.0, dobj = 0.0;
  int iterations = 0;
  Real tolerance = 0.0;
  std::string message;
};

Core run_core(const Reduced& red, const InteriorPointSettings& settings) {
  Core res;
  res.tolerance = settings.tolerance;
  const std::vector<Block>& blocks = red.blocks;
  const std::vector<MatX>& c0 = red.constant;
  const VecX& c = red.c;
  const VecX& b = red.b;
  const Eigen::SparseMatrix<Real>& e = red.e;
  const auto m = c.size();
  const auto q = b.size();
  const std::size_t nb = blocks.size();

  Real total_side = 0.0;
  for (const auto& blk : blocks) total_side += blk.side;
  const Real cnorm = m > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
  Real bnorm = q > 0 ? b.lpNorm<Eigen::Infinity>() : 0.0;
  for (const auto& ck : c0) bnorm = std::max(bnorm, ck.size() ? ck.cwiseAbs().maxCoeff() : 0.0);

  if (m == 0) {
    // nothing left to optimise: the constant blocks decide feasibility
    res.x = VecX::Zero(0);
    res.lam = VecX::Zero(q);
    res.xd.resize(nb);
    bool feasible = q == 0 || b.lpNorm<Eigen::Infinity>() <= settings.tolerance * (1.0 + bnorm);
    for (std::size_t k = 0; k < nb; ++k) {
      res.xd[k] = MatX::Zero(blocks[k].side, blocks[k].side);
      if (blocks[k].side > 0 && c0[k].size() > 0 &&
          Eigen::SelfAdjointEigenSolver<MatX>(c0[k]).eigenvalues().minCoeff() < -settings.tolerance * (1.0 + bnorm)) {
        feasible = false;
      }
    }
    res.status = feasible ? SolverStatus::optimal : SolverStatus::infeasible;
    res.pobj = res.dobj = red.offset;
    res.message = feasible ? "all variables fixed by presolve" : "fixed variables violate a block";
    return res;
  }

  // Infeasible start: x = 0, lambda = 0, S and X scaled identities.
  VecX x = VecX::Zero(m);
  VecX lam = VecX::Zero(q);
  std::vector<MatX> s(nb), xd(nb);
  const Real xi_x = 10.0 * std::max<Real>(1.0, cnorm);
  const Real xi_s = 10.0 * std::max<Real>(1.0, bnorm);
  for (std::size_t k = 0; k < nb; ++k) {
    s[k] = xi_s * MatX::Identity(blocks[k].side, blocks[k].side);
    xd[k] = xi_x * MatX::Identity(blocks[k].side, blocks[k].side);
  }

  KktSystem kkt(static_cast<std::size_t>(m), e);
  // G = B B^*, used to push the dual residual of each direction back onto
  // the affine space B^*(X) + E^T lambda = c.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>> gram;
  {
    std::vector<Eigen::Triplet<Real>> trip;
    for (const Block& blk : blocks) {
      std::vector<std::vector<std::pair<std::size_t, Real>>> cells(
          static_cast<std::size_t>(blk.side) * static_cast<std::size_t>(blk.side));
      for (const auto& bv : blk.vars) {
        for (const auto& en : bv.entries) {
          cells[static_cast<std::size_t>(en.row) * static_cast<std::size_t>(blk.side) + static_cast<std::size_t>(en.col)]
              .emplace_back(bv.var, en.coef);
        }
      }
      for (const auto& cell : cells) {
        for (const auto& [va, ca] : cell) {
          for (const auto& [vb, cb] : cell) {
            trip.emplace_back(static_cast<int>(va), static_cast<int>(vb), ca * cb);
          }
        }
      }
    }
    Eigen::SparseMatrix<Real> g(m, m);
    g.setFromTriplets(trip.begin(), trip.end());
    for (Eigen::Index i = 0; i < m; ++i) g.coeffRef(i, i) += 1e-14;
    gram.compute(g);
  }
  const bool gram_ok = gram.info() == Eigen::Success;
  const Real tol = settings.tolerance;
  int stalls = 0;
  int idle = 0;
  struct Iterate {
    VecX x, lam;
    std::vector<MatX> xd;
    Real pobj = 0.0, dobj = 0.0;
    Real merit = std::numeric_limits<Real>::infinity();
  } best;
  // Falls back to the best iterate when it met the near-optimal threshold.
  auto give_up = [&](const std::string& why) {
    if (best.merit <= settings.near_optimal_tolerance) {
      res.status = SolverStatus::optimal;
      res.x = best.x;
      res.lam = best.lam;
      res.xd = best.xd;
      res.pobj = best.pobj;
      res.dobj = best.dobj;
      res.tolerance = std::max(tol, best.merit);
      res.message = "near-optimal (" + why + ")";
    } else {
      res.x = x;
      res.lam = lam;
      res.xd = xd;
      res.message = why;
    }
    return res;
  };
  auto finish = [&](SolverStatus status, const std::string& why) {
    res.status = status;
    res.x = x;
    res.lam = lam;
    res.xd = xd;
    res.message = why;
    return res;
  };

  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    res.iterations = iter;
    std::vector<MatX> rp(nb);
    Real rp_norm = 0.0, gap = 0.0, c0x = 0.0;
    VecX atx = VecX::Zero(m);
    for (std::size_t k = 0; k < nb; ++k) {
      rp[k] = apply_block(blocks[k], x) + c0[k] - s[k];
      rp_norm = std::max(rp_norm, rp[k].cwiseAbs().maxCoeff());
      gap += frob_dot(xd[k], s[k]);
      c0x += frob_dot(c0[k], xd[k]);
      add_adjoint(blocks[k], xd[k], atx);
    }
    const VecX re = b - e * x;
    const VecX rd = c - atx - e.transpose() * lam;
    const Real pobj = c.dot(x) + red.offset;
    const Real dobj = (q > 0 ? b.dot(lam) : 0.0) - c0x + red.offset;
    const Real mu = total_side > 0 ? gap / total_side : 0.0;
    const Real re_norm = q > 0 ? re.lpNorm<Eigen::Infinity>() : 0.0;
    const Real pinf = std::max(rp_norm, re_norm) / (1.0 + bnorm);
    const Real dinf = (m > 0 ? rd.lpNorm<Eigen::Infinity>() : 0.0) / (1.0 + cnorm);
    const Real relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (settings.verbose) {
      std::fprintf(stderr, "ipm %3d pobj % .10e dobj % .10e pinf %.2e dinf %.2e gap %.2e\n", iter,
                   static_cast<double>(pobj), static_cast<double>(dobj), static_cast<double>(pinf),
                   static_cast<double>(dinf), static_cast<double>(relgap));
    }

    res.pobj = pobj;
    res.dobj = dobj;
    const Real merit = std::max({pinf, dinf, relgap});
    idle = merit < 0.9 * best.merit ? 0 : idle + 1;
    if (merit < best.merit) best = {x, lam, xd, pobj, dobj, merit};
    if (idle >= 8) return give_up("no progress");

    if (pinf <= tol && dinf <= tol && relgap <= tol) {
      return finish(SolverStatus::optimal, "");
    }
    // Dual ray (X, lambda): B^*(X) + E^T lambda ~ 0 with b^T lambda - <C, X> > 0.
    const Real dray = dobj - red.offset;
    if (dray > 0.0 && dray > settings.divergence_threshold * (1.0 + cnorm) * 1e-2) {
      const Real ray = m > 0 ? (c - rd).lpNorm<Eigen::Infinity>() / dray : 0.0;
      if (ray <= tol) {
        return finish(SolverStatus::infeasible, "dual objective diverges: primal LMI is infeasible");
      }
    }
    // Primal ray v: B(v) >= 0, E v ~ 0 with c^T v < 0.
    const Real pray = pobj - red.offset;
    if (pray < 0.0 && -pray > settings.divergence_threshold * (1.0 + bnorm) * 1e-2) {
      Real ray = q > 0 ? (b - re).lpNorm<Eigen::Infinity>() : 0.0;
      for (std::size_t k = 0; k < nb; ++k) {
        const MatX ax = apply_block(blocks[k], x);
        Eigen::SelfAdjointEigenSolver<MatX> es(ax, Eigen::EigenvaluesOnly);
        if (ax.size()) ray = std::max(ray, std::max<Real>(0.0, -es.eigenvalues().minCoeff()));
      }
      if (ray / -pray <= tol) {
        return finish(SolverStatus::unbounded, "primal objective diverges: problem is unbounded below");
      }
    }
    if (iter == settings.max_iterations) break;

    std::vector<MatX> sinv(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::LLT<MatX> llt(s[k]);
      if (llt.info() != Eigen::Success) {
        return give_up("slack matrix lost definiteness");
      }
      sinv[k] = llt.solve(MatX::Identity(blocks[k].side, blocks[k].side));
      sinv[k] = sym(sinv[k]);
    }
    if (!kkt.factor(blocks, xd, sinv)) {
      return give_up("KKT factorisation failed");
    }

    // Solves for a direction given the complementarity target rc (per block).
    struct Direction {
      VecX dx, dlam;
      std::vector<MatX> ds, dxd;
    };
    auto direction = [&](const std::vector<MatX>& rc) {
      VecX r1 = -rd;
      for (std::size_t k = 0; k < nb; ++k) {
        MatX t = rc[k] - xd[k] * rp[k] * sinv[k];
        add_adjoint(blocks[k], t, r1);
      }
      Direction d;
      auto apply_h = [&](const VecX& v) {
        VecX out = VecX::Zero(m);
        for (std::size_t k = 0; k < nb; ++k) {
          add_adjoint(blocks[k], xd[k] * apply_block(blocks[k], v) * sinv[k], out);
        }
        return out;
      };
      std::tie(d.dx, d.dlam) = kkt.solve(r1, re, apply_h);
      d.ds.resize(nb);
      d.dxd.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        d.ds[k] = apply_block(blocks[k], d.dx) + rp[k];
        d.dxd[k] = sym(rc[k] - xd[k] * d.ds[k] * sinv[k]);
      }
      if (gram_ok && m > 0) {
        VecX resid = rd - e.transpose() * d.dlam;
        for (std::size_t k = 0; k < nb; ++k) {
          VecX at = VecX::Zero(m);
          add_adjoint(blocks[k], d.dxd[k], at);
          resid -= at;
        }
        const VecX w = gram.solve(resid);
        for (std::size_t k = 0; k < nb; ++k) d.dxd[k] += apply_block(blocks[k], w);
      }
      return d;
    };
    auto steps = [&](const Direction& d) {
      Real ap = std::numeric_limits<Real>::infinity(), ad = ap;
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(s[k], d.ds[k]));
        ad = std::min(ad, max_step(xd[k], d.dxd[k]));
      }
      return std::pair{ap, ad};
    };

    std::vector<MatX> rc(nb);
    for (std::size_t k = 0; k < nb; ++k) rc[k] = -xd[k];
    const Direction pred = direction(rc);
    auto [ap_aff, ad_aff] = steps(pred);
    ap_aff = std::min<Real>(1.0, ap_aff);
    ad_aff = std::min<Real>(1.0, ad_aff);
    Real gap_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      gap_aff += frob_dot(xd[k] + ad_aff * pred.dxd[k], s[k] + ap_aff * pred.ds[k]);
    }
    const Real mu_aff = total_side > 0 ? gap_aff / total_side : 0.0;
    Real sigma = mu > 0 ? std::pow(std::max<Real>(0.0, mu_aff / mu), 3) : 0.0;
    sigma = std::clamp<Real>(sigma, 0.0, 1.0);

    for (std::size_t k = 0; k < nb; ++k) {
      rc[k] = sigma * mu * sinv[k] - xd[k] - pred.dxd[k] * pred.ds[k] * sinv[k];
    }
    const Direction corr = direction(rc);
    auto [ap, ad] = steps(corr);
    ap = std::min<Real>(1.0, settings.step_fraction * ap);
    ad = std::min<Real>(1.0, settings.step_fraction * ad);

    if (settings.verbose) {
      std::fprintf(stderr, "    step %.3e %.3e sigma %.3e\n", static_cast<double>(ap), static_cast<double>(ad),
                   static_cast<double>(sigma));
    }
    stalls = (ap < 1e-10 && ad < 1e-10) ? stalls + 1 : 0;
    if (stalls >= 3) {
      return give_up("step length collapsed");
    }

    x += ap * corr.dx;
    lam += ad * corr.dlam;
    for (std::size_t k = 0; k < nb; ++k) {
      s[k] = sym(s[k] + ap * corr.ds[k]);
      xd[k] = sym(xd[k] + ad * corr.dxd[k]);
    }
  }
  return give_up("iteration limit reached");
}

// Maps a reduced iterate back to the variables of prog.
void expand(const ConicProgram& prog, const Reduced& red, const Core& core, SolverResult& res) {
  const VecX& x = core.x;
  const VecX& lam = core.lam;
  const std::vector<MatX>& xd = core.xd;
  const auto mf = static_cast<Eigen::Index>(prog.num_vars);
  VecX full = red.fixed_value;
  for (std::size_t v = 0; v < prog.num_vars; ++v) {
    if (red.map[v] >= 0) full[static_cast<Eigen::Index>(v)] = x[red.map[v]];
  }
  const std::size_t nq = prog.equalities.size();
  for (std::size_t l = 0; l < nq; ++l) {
    if (red.row_map[l] != free_row) continue;
    const auto& eq = prog.equalities[l];
    const std::size_t v = red.row_var[l];
    Real rest = 0.0;
    for (const auto& [pos, coef] : eq.form) {
      if (pos != v) rest += coef * full[static_cast<Eigen::Index>(pos)];
    }
    full[static_cast<Eigen::Index>(v)] = (eq.rhs - rest) / row_coef(eq, v);
  }
  // multipliers of removed rows make the dual equation exact there
  VecX slack = VecX::Zero(mf);
  for (const auto& [pos, coef] : prog.objective) slack[static_cast<Eigen::Index>(pos)] += coef;
  const std::vector<Block> fb = index_blocks(prog);
  for (std::size_t k = 0; k < fb.size(); ++k) add_adjoint(fb[k], -xd[k], slack);
  VecX lfull = VecX::Zero(static_cast<Eigen::Index>(nq));
  auto settle = [&](std::size_t l, Real lv) {
    lfull[static_cast<Eigen::Index>(l)] = lv;
    for (const auto& [pos, coef] : prog.equalities[l].form) slack[static_cast<Eigen::Index>(pos)] -= coef * lv;
  };
  for (std::size_t l = 0; l < nq; ++l) {
    if (red.row_map[l] >= 0) settle(l, lam[red.row_map[l]]);
  }
  for (long kind : {free_row, fixed_row}) {
    for (std::size_t l = 0; l < nq; ++l) {
      if (red.row_map[l] != kind) continue;
      const std::size_t v = red.row_var[l];
      settle(l, slack[static_cast<Eigen::Index>(v)] / row_coef(prog.equalities[l], v));
    }
  }
  res.primal = full.cast<double>();
  res.block_duals.clear();
  for (const auto& m : xd) res.block_duals.push_back(m.cast<double>());
  res.equality_duals = lfull.cast<double>();
}

SolverResult solve_lmi(const ConicProgram& prog, const std::vector<MatrixXd>* constants,
                       const InteriorPointSettings& settings) {
  SolverResult res;
  res.tolerance = settings.tolerance;
  const Reduced red = presolve(prog, constants);
  if (red.inconsistent) {
    res.status = SolverStatus::infeasible;
    res.message = "equality constraints are inconsistent";
    return res;
  }
  const Core core = run_core(red, settings);
  expand(prog, red, core, res);
  res.status = core.status;
  res.primal_objective = static_cast<double>(core.pobj);
  res.dual_objective = static_cast<double>(core.dobj);
  res.iterations = core.iterations;
  res.tolerance = static_cast<double>(core.tolerance);
  res.message = core.message;
  return res;
}

// Gram position of a variable in a standard-form program.
struct GramSlot {
  int block = -1;
  int row = 0;
  int col = 0;
};

// A program is in standard form when every block entry is a distinct
// variable with coefficient one, i.e. the blocks are the cone variables
// themselves (an SOS program in Gram form).
bool gram_slots(const ConicProgram& prog, std::vector<GramSlot>& slots) {
  if (prog.psd_blocks.empty()) return false;
  slots.assign(prog.num_vars, {});
  for (std::size_t k = 0; k < prog.psd_blocks.size(); ++k) {
    const auto& sm = prog.psd_blocks[k];
    for (std::size_t r = 0; r < sm.side(); ++r) {
      for (std::size_t c = r; c < sm.side(); ++c) {
        const auto& form = sm.entry(r, c);
        if (form.size() != 1 || form.front().second != 1.0) return false;
        GramSlot& slot = slots[form.front().first];
        if (slot.block >= 0) return false;
        slot = {static_cast<int>(k), static_cast<int>(r), static_cast<int>(c)};
      }
    }
  }
  return true;
}

// Solves a standard-form program through its LMI dual
//   max b^T lambda  s.t.  C_k - sum_l lambda_l E_{l,k} >= 0,  E_free^T lambda = c_free,
// whose Newton system is indexed by the equality rows.
SolverResult solve_standard_form(const ConicProgram& prog, const std::vector<GramSlot>& slots,
                                 const InteriorPointSettings& settings) {
  const std::size_t q = prog.equalities.size();
  ConicProgram lmi;
  lmi.num_vars = q;
  for (std::size_t l = 0; l < q; ++l) {
    if (prog.equalities[l].rhs != 0.0) lmi.objective.emplace_back(l, -prog.equalities[l].rhs);
  }
  std::vector<MatrixXd> constants;
  for (const auto& sm : prog.psd_blocks) {
    lmi.psd_blocks.emplace_back(sm.side());
    constants.push_back(MatrixXd::Zero(static_cast<Eigen::Index>(sm.side()), static_cast<Eigen::Index>(sm.side())));
  }
  auto weight = [](const GramSlot& s) { return s.row == s.col ? 1.0 : 2.0; };
  std::vector<LinearForm> cells_of(prog.num_vars);
  std::vector<long> free_row(prog.num_vars, -1);
  std::vector<LinearEquality> free_rows;
  for (std::size_t v = 0; v < prog.num_vars; ++v) {
    if (slots[v].block < 0) {
      free_row[v] = static_cast<long>(free_rows.size());
      free_rows.push_back({{}, 0.0});
    }
  }
  for (const auto& [pos, coef] : prog.objective) {
    const GramSlot& s = slots[pos];
    if (s.block < 0) {
      free_rows[static_cast<std::size_t>(free_row[pos])].rhs += coef;
    } else {
      const double v = coef / weight(s);
      constants[static_cast<std::size_t>(s.block)](s.row, s.col) += v;
      if (s.row != s.col) constants[static_cast<std::size_t>(s.block)](s.col, s.row) += v;
    }
  }
  for (std::size_t l = 0; l < q; ++l) {
    for (const auto& [pos, coef] : prog.equalities[l].form) {
      if (coef == 0.0) continue;
      const GramSlot& s = slots[pos];
      if (s.block < 0) {
        free_rows[static_cast<std::size_t>(free_row[pos])].form.emplace_back(l, coef);
      } else {
        cells_of[pos].emplace_back(l, -coef / weight(s));
      }
    }
  }
  for (std::size_t v = 0; v < prog.num_vars; ++v) {
    const GramSlot& s = slots[v];
    if (s.block < 0 || cells_of[v].empty()) continue;
    lmi.psd_blocks[static_cast<std::size_t>(s.block)].set(static_cast<std::size_t>(s.row),
                                                          static_cast<std::size_t>(s.col), cells_of[v]);
  }
  lmi.equalities = std::move(free_rows);

  const SolverResult inner = solve_lmi(lmi, &constants, settings);
  SolverResult res;
  res.iterations = inner.iterations;
  res.tolerance = inner.tolerance;
  res.message = inner.message;
  switch (inner.status) {
    case SolverStatus::optimal:
      res.status = SolverStatus::optimal;
      break;
    case SolverStatus::infeasible:
      res.status = SolverStatus::unbounded;
      break;
    case SolverStatus::unbounded:
      res.status = SolverStatus::infeasible;
      break;
    case SolverStatus::numerical_failure:
      res.status = SolverStatus::numerical_failure;
      break;
  }
  res.primal_objective = -inner.dual_objective;
  res.dual_objective = -inner.primal_objective;
  if (inner.primal.size() != static_cast<Eigen::Index>(q)) return res;
  res.equality_duals = inner.primal;
  res.primal = VectorXd::Zero(static_cast<Eigen::Index>(prog.num_vars));
  for (std::size_t v = 0; v < prog.num_vars; ++v) {
    const GramSlot& s = slots[v];
    const auto iv = static_cast<Eigen::Index>(v);
    if (s.block < 0) {
      res.primal[iv] = -inner.equality_duals[free_row[v]];
    } else {
      res.primal[iv] = inner.block_duals[static_cast<std::size_t>(s.block)](s.row, s.col);
    }
  }
  for (std::size_t k = 0; k < prog.psd_blocks.size(); ++k) {
    MatrixXd slack = constants[k];
    const auto& sm = lmi.psd_blocks[k];
    for (std::size_t r = 0; r < sm.side(); ++r) {
      for (std::size_t c = 0; c < sm.side(); ++c) {
        for (const auto& [pos, coef] : sm.entry(r, c)) {
          slack(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += coef * inner.primal[static_cast<Eigen::Index>(pos)];
        }
      }
    }
    res.block_duals.push_back(slack);
  }
  return res;
}

}  // namespace

SolverResult InteriorPointSolver::solve(const ConicProgram& prog) const {
  if (auto problems = prog.check(); !problems.empty()) {
    SolverResult res;
    res.tolerance = settings_.tolerance;
    res.message = "malformed program: " + problems.front();
    return res;
  }
  std::vector<GramSlot> slots;
  if (gram_slots(prog, slots)) return solve_standard_form(prog, slots, settings_);
  return solve_lmi(prog, nullptr, settings_);
}

}  // namespace jmpoly
