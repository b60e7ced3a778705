#pragma once

// Zero-or-infinity decision for the adjoint entropy of every supported
// operator class. Each verdict carries a certificate that a separate verifier
// re-checks through structural facts (polynomial divisibility, shift probes,
// block-degree growth) rather than by rerunning the classifier's search.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adjent/engine.hpp"
#include "adjent/fp.hpp"
#include "adjent/intlat.hpp"
#include "adjent/operators.hpp"

namespace adjent {

struct Certificate {
  enum class Kind { Algebraic, NonAlgebraic, Narrow, Divisible, QuasiPeriodic };
  Kind kind = Kind::Divisible;
  uint32_t p = 0;
  FpPoly f;             // Algebraic: monic polynomial killing the whole space
  std::string witness;  // NonAlgebraic: structural obstruction tag
  std::string reason;   // Narrow: why every chain must stop
  uint64_t s = 0, t = 0;  // QuasiPeriodic: op^s = op^t with s < t
};

inline const char* certificate_kind_name(Certificate::Kind k) {
  switch (k) {
    case Certificate::Kind::Algebraic: return "algebraic";
    case Certificate::Kind::NonAlgebraic: return "non_algebraic";
    case Certificate::Kind::Narrow: return "narrow";
    case Certificate::Kind::Divisible: return "divisible";
    case Certificate::Kind::QuasiPeriodic: return "quasi_periodic";
  }
  return "?";
}

// least (s, t) with s < t and m^s = m^t; Brent cycle detection on the power
// sequence, which lives in a finite semigroup and must come back around
inline std::pair<uint64_t, uint64_t> quasi_periodic(const FpMat& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("quasi-periodicity needs a square matrix");
  FpMat id = FpMat::identity(m.p(), m.rows());
  uint64_t power = 1, lam = 1;
  FpMat tortoise = id;
  FpMat hare = id * m;
  while (!(tortoise == hare)) {
    if (power == lam) {
      tortoise = hare;
      power *= 2;
      lam = 0;
    }
    hare = hare * m;
    ++lam;
  }
  FpMat a = id, b = id;
  for (uint64_t i = 0; i < lam; ++i) b = b * m;
  uint64_t mu = 0;
  while (!(a == b)) {
    a = a * m;
    b = b * m;
    ++mu;
  }
  return {mu, mu + lam};
}

// monic f with f(op) = 0 on the whole space, when one exists
inline std::optional<FpPoly> annihilator_poly(const OperatorDesc& op) {
  switch (op.kind) {
    case OpKind::RightShift:
    case OpKind::LeftShift:
    case OpKind::TwoSidedShift:
      return std::nullopt;
    case OpKind::FiniteDim:
      return min_poly(op.matrix);
    case OpKind::BlockDiag: {
      if (op.repeat == RepeatRule::GrowLinear) return std::nullopt;
      FpPoly f = FpPoly::one(op.p);
      for (const auto& b : op.blocks) f = FpPoly::lcm(f, b);
      return f;
    }
    case OpKind::DirectSum: {
      FpPoly f = FpPoly::one(op.p);
      for (const auto& part : op.parts) {
        auto g = annihilator_poly(part);
        if (!g) return std::nullopt;
        f = FpPoly::lcm(f, *g);
      }
      return f;
    }
    case OpKind::PolyOf: {
      const FpPoly& h = op.poly;
      if (h.degree() <= 0) {
        uint32_t c = h.coeff(0);
        return FpPoly(op.p, {(op.p - c) % op.p, 1});  // scalar: killed by X - c
      }
      auto fin = annihilator_poly(op.inner[0]);
      if (!fin) return std::nullopt;
      if (fin->degree() < 1) return FpPoly::monomial(op.p, 1);
      return min_poly(poly_matrix(h, companion(*fin)));
    }
    case OpKind::Power: {
      auto fin = annihilator_poly(op.inner[0]);
      if (!fin) return std::nullopt;
      if (fin->degree() < 1) return FpPoly::monomial(op.p, 1);
      return min_poly(companion(*fin).pow(op.power_k));
    }
    default:
      throw std::invalid_argument("annihilating polynomials live on sequence operators");
  }
}

namespace detail {

inline std::string nonalgebraic_witness(const OperatorDesc& op) {
  switch (op.kind) {
    case OpKind::RightShift: return "shift_probe:right";
    case OpKind::LeftShift: return "shift_probe:left";
    case OpKind::TwoSidedShift: return "shift_probe:two_sided";
    case OpKind::BlockDiag: return "unbounded_block_degrees";
    case OpKind::DirectSum:
      for (size_t k = 0; k < op.parts.size(); ++k)
        if (!annihilator_poly(op.parts[k]))
          return "nonalgebraic_part:" + std::to_string(k);
      break;
    case OpKind::PolyOf: return "poly_of_nonalgebraic_inner";
    case OpKind::Power: return "power_of_nonalgebraic_inner";
    default: break;
  }
  throw std::invalid_argument("operator has no non-algebraicity witness");
}

// evaluate f(op) on a unit vector anchored so nothing falls off an edge, and
// confirm the coefficients land injectively: no polynomial can cancel a shift
inline bool shift_probe_holds(const OperatorDesc& op, const FpPoly& f) {
  int64_t deg = f.degree();
  IndexTag tag = index_tag(op);
  int64_t anchor = op.kind == OpKind::LeftShift ? deg : 0;
  FpVec acc(op.p, tag);
  FpVec cur = FpVec::unit(op.p, tag, anchor);
  size_t nonzero = 0;
  for (int64_t j = 0; j <= deg; ++j) {
    uint32_t c = f.coeff((size_t)j);
    if (c) {
      acc.axpy(c, cur);
      ++nonzero;
      int64_t where = op.kind == OpKind::RightShift  ? j
                      : op.kind == OpKind::LeftShift ? deg - j
                                                     : j * op.shift_step;
      if (acc.coeff(where) != c) return false;
    }
    if (j < deg) cur = apply(op, cur);
  }
  return acc.support_size() == nonzero;
}

}  // namespace detail

// zero iff some f annihilates: divisor checks and compositions only, sharing
// no code with the minimal-polynomial search that produced the certificate
inline bool annihilates(const OperatorDesc& op, const FpPoly& f) {
  if (!is_fp_kind(op) || f.p() != op.p) return false;
  if (f.degree() < 0) return true;   // the zero polynomial kills everything
  if (f.degree() == 0) return false; // a nonzero scalar kills nothing
  switch (op.kind) {
    case OpKind::FiniteDim:
      return poly_matrix(f, op.matrix).is_zero();
    case OpKind::BlockDiag: {
      if (op.repeat == RepeatRule::GrowLinear) return false;
      for (const auto& b : op.blocks)
        if ((f % b).degree() >= 0) return false;
      return true;
    }
    case OpKind::DirectSum:
      for (const auto& part : op.parts)
        if (!annihilates(part, f)) return false;
      return true;
    case OpKind::PolyOf:
      return annihilates(op.inner[0], f.compose(op.poly));
    case OpKind::Power:
      return annihilates(op.inner[0],
                         f.compose(FpPoly::monomial(op.p, (size_t)op.power_k)));
    default:
      return false;
  }
}

inline std::pair<EntropyValue, Certificate> classify_ent_star(const OperatorDesc& op) {
  ensure_valid(op);
  GroupDesc g = ambient_group(op);
  Certificate c;
  if (g.kind == GroupDesc::DivisibleMarker) {
    c.kind = Certificate::Kind::Divisible;
    return {EntropyValue::zero(), c};
  }
  if (g.kind == GroupDesc::FinitelyGenerated) {
    c.kind = Certificate::Kind::Narrow;
    c.reason = narrow_test(g).reason;
    return {EntropyValue::zero(), c};
  }
  c.p = op.p;
  if (auto f = annihilator_poly(op)) {
    c.kind = Certificate::Kind::Algebraic;
    c.f = *f;
    return {EntropyValue::zero(), c};
  }
  c.kind = Certificate::Kind::NonAlgebraic;
  c.witness = detail::nonalgebraic_witness(op);
  return {EntropyValue::infinite(), c};
}

namespace detail {

inline bool recheck_witness(const OperatorDesc& op, const std::string& w) {
  std::string expect;
  try {
    expect = nonalgebraic_witness(op);
  } catch (const std::invalid_argument&) {
    return false;
  }
  if (expect != w) return false;
  switch (op.kind) {
    case OpKind::RightShift:
    case OpKind::LeftShift:
    case OpKind::TwoSidedShift:
      return shift_probe_holds(op, FpPoly(op.p, {1, 0, 1})) &&
             shift_probe_holds(op, FpPoly(op.p, {1, 1, 0, 1}));
    case OpKind::BlockDiag: {
      if (op.repeat != RepeatRule::GrowLinear) return false;
      int64_t start = 0;
      for (const auto& b : op.blocks) start += b.degree();
      BlockLoc a = block_at(op, start);
      BlockLoc b = block_at(op, start + a.poly.degree());
      return b.poly.degree() > a.poly.degree() &&
             a.poly.degree() > op.blocks.back().degree();
    }
    case OpKind::DirectSum: {
      size_t k = (size_t)std::stoul(w.substr(w.find(':') + 1));
      if (k >= op.parts.size()) return false;
      return recheck_witness(op.parts[k], nonalgebraic_witness(op.parts[k]));
    }
    case OpKind::PolyOf:
      return op.poly.degree() >= 1 &&
             recheck_witness(op.inner[0], nonalgebraic_witness(op.inner[0]));
    case OpKind::Power:
      return op.power_k >= 1 &&
             recheck_witness(op.inner[0], nonalgebraic_witness(op.inner[0]));
    default:
      return false;
  }
}

}  // namespace detail

inline bool verify_certificate(const Certificate& c, const OperatorDesc& op) {
  switch (c.kind) {
    case Certificate::Kind::Divisible:
      return op.kind == OpKind::DivisibleTrivial;
    case Certificate::Kind::Narrow: {
      GroupDesc g = ambient_group(op);
      if (g.kind != GroupDesc::FinitelyGenerated &&
          g.kind != GroupDesc::DivisibleMarker)
        return false;
      return narrow_test(g).narrow;
    }
    case Certificate::Kind::Algebraic:
      return is_fp_kind(op) && c.p == op.p && c.f.degree() >= 1 && c.f.is_monic() &&
             annihilates(op, c.f);
    case Certificate::Kind::QuasiPeriodic:
      return op.kind == OpKind::FiniteDim && c.s < c.t &&
             op.matrix.pow(c.s) == op.matrix.pow(c.t);
    case Certificate::Kind::NonAlgebraic:
      return is_fp_kind(op) && c.p == op.p && detail::recheck_witness(op, c.witness);
  }
  return false;
}

// Second, independent zero-certificate route for integer endomorphisms: the
// minimal polynomial of the mod-p reduction must push the whole group into pG.
struct ModPReduction {
  uint32_t p = 0;
  FpPoly f;
  bool annihilates_into_pg = false;
};

inline ModPReduction reduce_to_p(const FgEndo& e, uint32_t p) {
  auto [mm, kept] = reduce_mod_p(e, p);
  ModPReduction out;
  out.p = p;
  out.f = min_poly(mm);
  size_t dim = e.group.dim();
  IntMat r(dim, dim);
  for (long j = out.f.degree(); j >= 0; --j) {
    r = r * e.m;
    Int c = out.f.coeff((size_t)j);
    for (size_t i = 0; i < dim; ++i) r.at(i, i) += c;
  }
  LatticeSub pg = LatticeSub::scaled(e.group, p);
  out.annihilates_into_pg = true;
  for (size_t j = 0; j < dim; ++j)
    if (!pg.contains(r.col(j))) {
      out.annihilates_into_pg = false;
      break;
    }
  return out;
}

// Cross-validate a classifier verdict against live engine runs on a
// deterministic family of cofinite subgroups.
struct ProbeReport {
  EntropyValue classified;
  Certificate cert;
  EntropyValue achieved;  // best engine lower bound the family produced
  size_t runs = 0;
  size_t inconclusive = 0;
  bool contradiction = false;
  std::vector<std::string> notes;
};

inline ProbeReport consistency_probe(const OperatorDesc& op, size_t budget = 8,
                                     const EngineConfig& cfg = {}) {
  ProbeReport r;
  auto cls = classify_ent_star(op);
  r.classified = cls.first;
  r.cert = cls.second;
  r.achieved = EntropyValue::zero();
  Int best = 1;

  auto run_one = [&](const CofiniteSubgroup& n, const std::string& who) {
    try {
      SubgroupEntropy e = hstar(op, n, cfg);
      ++r.runs;
      if (e.alpha > best) best = e.alpha;
      if (r.classified.kind == EntropyValue::Kind::Zero && e.alpha > 1) {
        r.contradiction = true;
        r.notes.push_back(who + ": growth log " + e.alpha.str() +
                          " contradicts the zero classification");
      }
    } catch (const InconclusiveError& ie) {
      ++r.inconclusive;
      r.notes.push_back(who + ": " + ie.what());
    }
  };

  GroupDesc g = ambient_group(op);
  if (g.kind == GroupDesc::DivisibleMarker) {
    run_one(FpKernelSub{}, "whole group");
  } else if (g.kind == GroupDesc::FinitelyGenerated) {
    auto endo = as_int_endo(op);
    if (endo && endo->group.dim() > 0)
      for (size_t m = 2; m < 2 + budget; ++m)
        run_one(LatticeSub::scaled(endo->group, (int64_t)m),
                "index-" + Int(m).str() + " family member");
  } else {
    IndexTag tag = index_tag(op);
    for (size_t j = 1; j <= budget; ++j) {
      FpKernelSub n;
      for (int64_t i = 0; n.rows.size() < j && i < (int64_t)(8 * budget + 64); ++i)
        if (in_window(op, i)) n.rows.push_back(FpVec::unit(op.p, tag, i));
      if (n.rows.size() < j) break;
      run_one(n, "kernel of the first " + std::to_string(j) + " coordinates");
    }
  }
  if (best > 1) r.achieved = EntropyValue::lower_bound(best);
  if (r.classified.kind == EntropyValue::Kind::Infinite && best == 1)
    r.notes.push_back(
        "finite-support functionals cannot witness the supremum for this class");
  return r;
}

}  // namespace adjent
