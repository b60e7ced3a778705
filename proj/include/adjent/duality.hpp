#pragma once

// Pontryagin duality on finite abelian groups, made concrete through the
// standard pairing <x,y> = sum x_i y_i / d_i mod 1, plus the sequence-space
// count comparison between a cotrajectory chain and the trajectory of its
// functionals under the dual action.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adjent/engine.hpp"
#include "adjent/intlat.hpp"
#include "adjent/operators.hpp"

namespace adjent {

// <x,y> as an exact rational in [0,1) with denominator dividing the exponent
struct PairingContext {
  FgGroup g;
  Int L;  // exponent = lcm of the invariant factors

  explicit PairingContext(FgGroup gg) : g(std::move(gg)) {
    if (!g.is_finite())
      throw std::invalid_argument("the standard pairing needs a finite group");
    L = g.dim() == 0 ? Int(1) : g.exponent();
  }

  // integer form: sum x_i y_i (L/d_i) mod L; zero iff the pairing vanishes
  Int pair_scaled(const std::vector<Int>& x, const std::vector<Int>& y) const {
    if (x.size() != g.dim() || y.size() != g.dim())
      throw std::invalid_argument("pairing arity mismatch");
    Int s = 0;
    for (size_t i = 0; i < g.dim(); ++i) s += x[i] * y[i] * (L / g.torsion[i]);
    s %= L;
    if (s < 0) s += L;
    return s;
  }

  Rat pair(const std::vector<Int>& x, const std::vector<Int>& y) const {
    return Rat(pair_scaled(x, y), L);
  }
};

// H-perp = {y : <x,y> = 0 for all x in H}, solved as the integer system
// P y + L k = 0 over the lifted coordinates
inline LatticeSub annihilator(const FgGroup& g, const LatticeSub& h) {
  PairingContext ctx(g);
  if (!(h.ambient() == g)) throw std::invalid_argument("subgroup lives in a different group");
  const IntMat& basis = h.basis();
  size_t s = g.dim(), m = basis.cols();
  if (s == 0) return LatticeSub::whole(g);
  IntMat sys(m, s + m);
  for (size_t c = 0; c < m; ++c) {
    for (size_t i = 0; i < s; ++i)
      sys.at(c, i) = basis.at(i, c) * (ctx.L / g.torsion[i]);
    sys.at(c, s + c) = ctx.L;
  }
  IntMat ker = int_kernel(sys);
  IntMat ys(s, ker.cols());
  for (size_t i = 0; i < s; ++i)
    for (size_t c = 0; c < ker.cols(); ++c) ys.at(i, c) = ker.at(i, c);
  return LatticeSub::from_columns(g, ys);
}

// unique adjoint matrix with <f x, y> = <x, adjoint(f) y>; entries
// a_{ij} = m_{ji} d_i / d_j mod d_i, integral exactly when f is compatible
inline FgEndo adjoint(const FgEndo& f) {
  const FgGroup& g = f.group;
  if (!g.is_finite()) throw std::invalid_argument("adjoint needs a finite group");
  f.ensure_valid();
  size_t s = g.dim();
  IntMat a(s, s);
  for (size_t i = 0; i < s; ++i) {
    const Int& di = g.torsion[i];
    for (size_t j = 0; j < s; ++j) {
      const Int& dj = g.torsion[j];
      Int num = f.m.at(j, i) * di;
      if (num % dj != 0)
        throw std::invalid_argument("matrix is not compatible with the moduli");
      Int e = (num / dj) % di;
      if (e < 0) e += di;
      a.at(i, j) = e;
    }
  }
  FgEndo out(g, std::move(a));
  out.ensure_valid();
  return out;
}

// (f^{-n} H)-perp = adjoint(f)^n (H-perp), plus the invariance equivalence:
// H is f-invariant exactly when H-perp is adjoint-invariant
inline bool check_perp_identity(const FgEndo& f, const LatticeSub& h, size_t n) {
  FgEndo adj = adjoint(f);
  LatticeSub pre = h;
  for (size_t i = 0; i < n; ++i) pre = preimage(f, pre);
  LatticeSub lhs = annihilator(f.group, pre);
  LatticeSub rhs = annihilator(f.group, h);
  for (size_t i = 0; i < n; ++i) rhs = image(adj, rhs);
  if (!(lhs == rhs)) return false;
  LatticeSub hp = annihilator(f.group, h);
  bool h_inv = h.contains(image(f, h));
  bool hp_inv = hp.contains(image(adj, hp));
  return h_inv == hp_inv;
}

namespace detail {

// rank of a span of finitely supported vectors by one dense reduction from
// scratch; deliberately not the engine's incremental elimination
inline size_t dense_span_rank(uint32_t p, const std::vector<FpVec>& vecs) {
  std::vector<int64_t> support;
  for (const auto& v : vecs)
    for (const auto& [i, c] : v.terms()) support.push_back(i);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  if (support.empty()) return 0;
  FpMat m(p, vecs.size(), support.size());
  for (size_t r = 0; r < vecs.size(); ++r)
    for (const auto& [i, c] : vecs[r].terms()) {
      size_t col = (size_t)(std::lower_bound(support.begin(), support.end(), i) -
                            support.begin());
      m.set(r, col, c);
    }
  return rref_rank(m).rank;
}

}  // namespace detail

// count comparison behind ent* = ent-of-the-dual on sequence spaces: the
// cotrajectory chain of ker(rows) against the trajectory of the rows under
// the dual action a -> a.op, counted by an independent dense rank pass.
// Shift kinds route the dual action through the named dual shift.
inline bool check_duality_theorem(const OperatorDesc& op,
                                  const std::vector<Functional>& rows, size_t n_max,
                                  std::string* detail_out = nullptr) {
  ensure_valid(op);
  if (!is_fp_kind(op))
    throw std::invalid_argument("the count comparison runs on sequence operators");
  if (rows.empty()) throw std::invalid_argument("need at least one functional");

  GrowthTrace cot = cotrajectory_trace(op, FpKernelSub{rows}, n_max);

  std::optional<OperatorDesc> named_dual;
  if (op.kind == OpKind::RightShift || op.kind == OpKind::LeftShift ||
      op.kind == OpKind::TwoSidedShift)
    named_dual = dual_of_shift(op);

  std::vector<FpVec> span = rows;
  std::vector<FpVec> frontier = rows;
  for (size_t n = 1; n <= n_max; ++n) {
    size_t rank = detail::dense_span_rank(op.p, span);
    if ((int64_t)rank != cot.log_p[n - 1]) {
      if (detail_out)
        *detail_out = "step " + std::to_string(n) + ": cotrajectory exponent " +
                      std::to_string(cot.log_p[n - 1]) + " vs dual trajectory rank " +
                      std::to_string(rank);
      return false;
    }
    if (n == n_max) break;
    for (auto& v : frontier)
      v = named_dual ? apply(*named_dual, v) : pullback(op, v);
    for (const auto& v : frontier) span.push_back(v);
  }
  return true;
}

}  // namespace adjent
