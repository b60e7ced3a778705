#pragma once

// The operator zoo: descriptors for endomorphisms of sequence spaces over F_p,
// finite-dimensional maps, finitely generated groups, and divisible groups,
// with the forward action on vectors and the pullback action on functionals.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adjent/fp.hpp"
#include "adjent/intlat.hpp"

namespace adjent {

enum class OpKind {
  FiniteDim,
  RightShift,
  LeftShift,
  TwoSidedShift,
  BlockDiag,
  DirectSum,
  PolyOf,
  Power,
  IntEndo,
  DivisibleTrivial,
};

enum class RepeatRule { None, RepeatLast, GrowLinear };

inline const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::FiniteDim: return "finite_dim";
    case OpKind::RightShift: return "right_shift";
    case OpKind::LeftShift: return "left_shift";
    case OpKind::TwoSidedShift: return "two_sided_shift";
    case OpKind::BlockDiag: return "block_diag";
    case OpKind::DirectSum: return "direct_sum";
    case OpKind::PolyOf: return "poly_of";
    case OpKind::Power: return "power";
    case OpKind::IntEndo: return "int_endo";
    case OpKind::DivisibleTrivial: return "divisible_trivial";
  }
  return "?";
}

// A functional is a finitely supported row on the same index set.
using Functional = FpVec;

struct OperatorDesc {
  OpKind kind = OpKind::RightShift;
  uint32_t p = 2;                    // prime, for everything except IntEndo/DivisibleTrivial
  int shift_step = 1;                // TwoSidedShift: +1 forward, -1 backward
  FpMat matrix;                      // FiniteDim
  std::vector<FpPoly> blocks;        // BlockDiag
  RepeatRule repeat = RepeatRule::None;
  std::vector<OperatorDesc> parts;   // DirectSum
  FpPoly poly;                       // PolyOf
  uint64_t power_k = 1;              // Power
  std::vector<OperatorDesc> inner;   // PolyOf / Power wrap exactly one operator
  std::optional<FgEndo> endo;        // IntEndo

  static OperatorDesc right_shift(uint32_t p) {
    OperatorDesc d;
    d.kind = OpKind::RightShift;
    d.p = p;
    return d;
  }
  static OperatorDesc left_shift(uint32_t p) {
    OperatorDesc d;
    d.kind = OpKind::LeftShift;
    d.p = p;
    return d;
  }
  static OperatorDesc two_sided_shift(uint32_t p, int step = 1) {
    OperatorDesc d;
    d.kind = OpKind::TwoSidedShift;
    d.p = p;
    d.shift_step = step;
    return d;
  }
  static OperatorDesc finite_dim(FpMat m) {
    OperatorDesc d;
    d.kind = OpKind::FiniteDim;
    d.p = m.p();
    d.matrix = std::move(m);
    return d;
  }
  static OperatorDesc block_diag(uint32_t p, std::vector<FpPoly> blocks,
                                 RepeatRule rule = RepeatRule::None) {
    OperatorDesc d;
    d.kind = OpKind::BlockDiag;
    d.p = p;
    d.blocks = std::move(blocks);
    d.repeat = rule;
    return d;
  }
  static OperatorDesc direct_sum(std::vector<OperatorDesc> parts) {
    OperatorDesc d;
    d.kind = OpKind::DirectSum;
    d.parts = std::move(parts);
    if (!d.parts.empty()) d.p = d.parts[0].p;
    return d;
  }
  static OperatorDesc poly_of(FpPoly f, OperatorDesc in) {
    OperatorDesc d;
    d.kind = OpKind::PolyOf;
    d.p = f.p();
    d.poly = std::move(f);
    d.inner.push_back(std::move(in));
    return d;
  }
  static OperatorDesc power(uint64_t k, OperatorDesc in) {
    OperatorDesc d;
    d.kind = OpKind::Power;
    d.p = in.p;
    d.power_k = k;
    d.inner.push_back(std::move(in));
    return d;
  }
  static OperatorDesc int_endo(FgEndo e) {
    OperatorDesc d;
    d.kind = OpKind::IntEndo;
    d.endo = std::move(e);
    return d;
  }
  static OperatorDesc divisible_trivial() {
    OperatorDesc d;
    d.kind = OpKind::DivisibleTrivial;
    return d;
  }
};

inline FpMat companion(const FpPoly& f) {
  if (!f.is_monic() || f.degree() < 1)
    throw std::invalid_argument("companion matrix needs a monic polynomial of degree >= 1");
  size_t d = (size_t)f.degree();
  FpMat c(f.p(), d, d);
  Barrett br(f.p());
  for (size_t j = 0; j + 1 < d; ++j) c.set(j + 1, j, 1);
  for (size_t i = 0; i < d; ++i) c.set(i, d - 1, (uint32_t)br.neg(f.coeff(i)));
  return c;
}

// true when the operator acts on an F_p sequence (or finite window) space
inline bool is_fp_kind(const OperatorDesc& op) {
  switch (op.kind) {
    case OpKind::IntEndo:
    case OpKind::DivisibleTrivial:
      return false;
    case OpKind::Power:
    case OpKind::PolyOf:
      return op.inner.empty() ? false : is_fp_kind(op.inner[0]);
    default:
      return true;
  }
}

inline IndexTag index_tag(const OperatorDesc& op) {
  switch (op.kind) {
    case OpKind::TwoSidedShift:
      return IndexTag::Int;
    case OpKind::DirectSum:
      return op.parts.empty() ? IndexTag::Nat : index_tag(op.parts[0]);
    case OpKind::PolyOf:
    case OpKind::Power:
      return op.inner.empty() ? IndexTag::Nat : index_tag(op.inner[0]);
    default:
      return IndexTag::Nat;
  }
}

// whether basis index i names a coordinate of the operator's sequence space
inline bool in_window(const OperatorDesc& op, int64_t i) {
  switch (op.kind) {
    case OpKind::RightShift:
    case OpKind::LeftShift:
      return i >= 0;
    case OpKind::TwoSidedShift:
      return true;
    case OpKind::FiniteDim:
      return i >= 0 && (size_t)i < op.matrix.rows();
    case OpKind::BlockDiag: {
      if (i < 0) return false;
      if (op.repeat != RepeatRule::None) return true;
      int64_t total = 0;
      for (const auto& b : op.blocks) total += b.degree();
      return i < total;
    }
    case OpKind::DirectSum: {
      if (op.parts.empty()) return false;
      int64_t np = (int64_t)op.parts.size();
      int64_t part = ((i % np) + np) % np;
      return in_window(op.parts[(size_t)part], (i - part) / np);
    }
    case OpKind::PolyOf:
    case OpKind::Power:
      return !op.inner.empty() && in_window(op.inner[0], i);
    default:
      return false;
  }
}

// block index, offset of the block start, and block polynomial containing
// global coordinate g of a block-diagonal operator
struct BlockLoc {
  size_t block = 0;
  int64_t start = 0;
  FpPoly poly;
};

inline BlockLoc block_at(const OperatorDesc& op, int64_t g) {
  if (op.kind != OpKind::BlockDiag) throw std::invalid_argument("not a block-diagonal operator");
  if (g < 0) throw std::out_of_range("negative coordinate in block-diagonal space");
  int64_t start = 0;
  size_t idx = 0;
  long last_deg = op.blocks.empty() ? 1 : op.blocks.back().degree();
  while (true) {
    FpPoly f;
    long deg;
    if (idx < op.blocks.size()) {
      f = op.blocks[idx];
      deg = f.degree();
    } else if (op.repeat == RepeatRule::RepeatLast) {
      f = op.blocks.back();
      deg = f.degree();
    } else if (op.repeat == RepeatRule::GrowLinear) {
      // past the listed blocks the degree grows by one per block: X^d - 1
      deg = last_deg + (long)(idx - op.blocks.size()) + 1;
      std::vector<uint32_t> c((size_t)deg + 1, 0);
      c[0] = op.p - 1;
      c[(size_t)deg] = 1;
      f = FpPoly(op.p, std::move(c));
    } else {
      throw std::out_of_range("coordinate beyond the listed blocks");
    }
    if (g < start + deg) return {idx, start, std::move(f)};
    start += deg;
    ++idx;
  }
}

inline std::vector<std::string> validate(const OperatorDesc& op);

inline void ensure_valid(const OperatorDesc& op) {
  auto issues = validate(op);
  if (!issues.empty())
    throw std::invalid_argument(std::string("invalid operator: ") + issues[0]);
}

inline std::vector<std::string> validate(const OperatorDesc& op) {
  std::vector<std::string> out;
  auto note = [&](const std::string& s) { out.push_back(s); };
  switch (op.kind) {
    case OpKind::RightShift:
    case OpKind::LeftShift:
    case OpKind::TwoSidedShift:
      if (!is_prime_u32(op.p)) note("shift modulus must be prime");
      if (op.kind == OpKind::TwoSidedShift && op.shift_step != 1 && op.shift_step != -1)
        note("two-sided shift step must be +1 or -1");
      break;
    case OpKind::FiniteDim:
      if (op.matrix.rows() != op.matrix.cols())
        note("finite-dimensional operator matrix must be square");
      if (op.matrix.p() != op.p) note("matrix modulus differs from declared prime");
      break;
    case OpKind::BlockDiag:
      if (!is_prime_u32(op.p)) note("block-diagonal modulus must be prime");
      if (op.blocks.empty()) note("block-diagonal operator needs at least one block");
      for (size_t i = 0; i < op.blocks.size(); ++i) {
        if (op.blocks[i].p() != op.p) note("block " + std::to_string(i) + " has wrong modulus");
        if (!op.blocks[i].is_monic() || op.blocks[i].degree() < 1)
          note("block " + std::to_string(i) + " must be monic of degree >= 1");
      }
      break;
    case OpKind::DirectSum: {
      if (op.parts.empty()) note("direct sum needs at least one part");
      for (size_t i = 0; i < op.parts.size(); ++i) {
        if (!is_fp_kind(op.parts[i]))
          note("direct sum part " + std::to_string(i) + " is not a sequence-space operator");
        else {
          if (op.parts[i].p != op.p)
            note("direct sum parts must share one prime; part " + std::to_string(i) +
                 " differs");
          if (index_tag(op.parts[i]) != index_tag(op.parts[0]))
            note("direct sum parts must share one index tag; part " + std::to_string(i) +
                 " differs");
        }
        for (auto& issue : validate(op.parts[i]))
          note("part " + std::to_string(i) + ": " + issue);
      }
      break;
    }
    case OpKind::PolyOf:
      if (op.inner.size() != 1) note("poly_of wraps exactly one operator");
      else {
        if (!is_fp_kind(op.inner[0]))
          note("poly_of requires a sequence-space or finite-dimensional inner operator");
        else if (op.poly.p() != op.inner[0].p)
          note("poly_of polynomial modulus differs from the inner operator");
        for (auto& issue : validate(op.inner[0])) note("inner: " + issue);
      }
      break;
    case OpKind::Power:
      if (op.inner.size() != 1) note("power wraps exactly one operator");
      else {
        if (op.power_k < 1) note("power exponent must be >= 1");
        for (auto& issue : validate(op.inner[0])) note("inner: " + issue);
      }
      break;
    case OpKind::IntEndo:
      if (!op.endo.has_value()) note("int_endo carries no endomorphism data");
      else
        for (auto& issue : op.endo->validate()) note(issue);
      break;
    case OpKind::DivisibleTrivial:
      break;
  }
  return out;
}

inline GroupDesc ambient_group(const OperatorDesc& op) {
  GroupDesc g;
  if ((op.kind == OpKind::Power || op.kind == OpKind::PolyOf) && !op.inner.empty())
    return ambient_group(op.inner[0]);
  if (op.kind == OpKind::IntEndo) {
    g.kind = GroupDesc::FinitelyGenerated;
    g.fg = op.endo ? op.endo->group : FgGroup();
  } else if (op.kind == OpKind::DivisibleTrivial) {
    g.kind = GroupDesc::DivisibleMarker;
  } else {
    g.kind = GroupDesc::FpSequence;
    g.p = op.p;
  }
  return g;
}

// forward action on a finitely supported vector
inline FpVec apply(const OperatorDesc& op, const FpVec& v) {
  if (!is_fp_kind(op))
    throw std::invalid_argument("operator has no action on sequence vectors");
  if (v.p() != op.p) throw std::invalid_argument("vector modulus differs from operator");
  if (v.tag() != index_tag(op))
    throw std::invalid_argument("vector index tag differs from operator");
  switch (op.kind) {
    case OpKind::RightShift:
      return v.shifted(1, false);
    case OpKind::LeftShift:
      return v.shifted(-1, true);
    case OpKind::TwoSidedShift:
      return v.shifted(op.shift_step, false);
    case OpKind::FiniteDim: {
      size_t d = op.matrix.rows();
      std::vector<uint32_t> x(d, 0);
      for (auto& [i, c] : v.terms()) {
        if (i < 0 || (size_t)i >= d)
          throw std::out_of_range("vector support outside the finite-dimensional window");
        x[(size_t)i] = c;
      }
      auto y = op.matrix.mul_vec(x);
      std::vector<FpVec::Term> terms;
      for (size_t i = 0; i < d; ++i)
        if (y[i]) terms.emplace_back((int64_t)i, y[i]);
      return FpVec(op.p, IndexTag::Nat, std::move(terms));
    }
    case OpKind::BlockDiag: {
      FpVec out(op.p, IndexTag::Nat);
      Barrett br(op.p);
      for (auto& [g, c] : v.terms()) {
        BlockLoc loc = block_at(op, g);
        long d = loc.poly.degree();
        long j = (long)(g - loc.start);
        if (j < d - 1) {
          out.axpy(c, FpVec::unit(op.p, IndexTag::Nat, loc.start + j + 1));
        } else {
          // top basis vector wraps: X * X^(d-1) = -(a_0 + a_1 X + ...)
          for (long k = 0; k < d; ++k) {
            uint32_t a = loc.poly.coeff((size_t)k);
            if (a) out.axpy((uint32_t)br.mul(c, br.neg(a)),
                            FpVec::unit(op.p, IndexTag::Nat, loc.start + k));
          }
        }
      }
      return out;
    }
    case OpKind::DirectSum: {
      int64_t np = (int64_t)op.parts.size();
      FpVec out(op.p, v.tag());
      // split round-robin, act per part, merge back
      for (size_t part = 0; part < op.parts.size(); ++part) {
        FpVec local(op.p, index_tag(op.parts[part]));
        for (auto& [g, c] : v.terms()) {
          int64_t r = ((g % np) + np) % np;
          if (r != (int64_t)part) continue;
          local.axpy(c, FpVec::unit(op.p, local.tag(), (g - r) / np));
        }
        if (local.is_zero()) continue;
        FpVec img = apply(op.parts[part], local);
        for (auto& [l, c] : img.terms())
          out.axpy(c, FpVec::unit(op.p, out.tag(), l * np + (int64_t)part));
      }
      return out;
    }
    case OpKind::PolyOf: {
      FpVec acc = v.scaled(op.poly.coeff(0));
      FpVec w = v;
      for (long k = 1; k <= op.poly.degree(); ++k) {
        w = apply(op.inner[0], w);
        uint32_t c = op.poly.coeff((size_t)k);
        if (c) acc.axpy(c, w);
      }
      return acc;
    }
    case OpKind::Power: {
      FpVec w = v;
      for (uint64_t i = 0; i < op.power_k; ++i) w = apply(op.inner[0], w);
      return w;
    }
    default:
      throw std::invalid_argument("operator has no action on sequence vectors");
  }
}

// pullback a |-> a o op on finitely supported functionals
inline Functional pullback(const OperatorDesc& op, const Functional& a) {
  if (!is_fp_kind(op))
    throw std::invalid_argument("operator has no pullback on sequence functionals");
  if (a.p() != op.p) throw std::invalid_argument("functional modulus differs from operator");
  if (a.tag() != index_tag(op))
    throw std::invalid_argument("functional index tag differs from operator");
  switch (op.kind) {
    case OpKind::RightShift:
      // (a o op)(x) = sum_i a_i x_{i-1}, so coefficients move down and a_0 dies
      return a.shifted(-1, true);
    case OpKind::LeftShift:
      return a.shifted(1, false);
    case OpKind::TwoSidedShift:
      return a.shifted(-op.shift_step, false);
    case OpKind::FiniteDim: {
      size_t d = op.matrix.rows();
      std::vector<uint32_t> row(d, 0);
      for (auto& [i, c] : a.terms()) {
        if (i < 0 || (size_t)i >= d)
          throw std::out_of_range("functional support outside the finite-dimensional window");
        row[(size_t)i] = c;
      }
      Barrett br(op.p);
      std::vector<FpVec::Term> terms;
      for (size_t j = 0; j < d; ++j) {
        uint64_t s = 0;
        for (size_t i = 0; i < d; ++i) s = br.add(s, br.mul(row[i], op.matrix.get(i, j)));
        if (s) terms.emplace_back((int64_t)j, (uint32_t)s);
      }
      return Functional(op.p, IndexTag::Nat, std::move(terms));
    }
    case OpKind::BlockDiag: {
      Functional out(op.p, IndexTag::Nat);
      Barrett br(op.p);
      for (auto& [g, c] : a.terms()) {
        BlockLoc loc = block_at(op, g);
        long d = loc.poly.degree();
        long j = (long)(g - loc.start);
        // row j of the companion matrix: e_j* o op
        if (j > 0) out.axpy(c, FpVec::unit(op.p, IndexTag::Nat, loc.start + j - 1));
        uint32_t alast = loc.poly.coeff((size_t)j);
        if (alast)
          out.axpy((uint32_t)br.mul(c, br.neg(alast)),
                   FpVec::unit(op.p, IndexTag::Nat, loc.start + d - 1));
      }
      return out;
    }
    case OpKind::DirectSum: {
      int64_t np = (int64_t)op.parts.size();
      Functional out(op.p, a.tag());
      for (size_t part = 0; part < op.parts.size(); ++part) {
        Functional local(op.p, index_tag(op.parts[part]));
        for (auto& [g, c] : a.terms()) {
          int64_t r = ((g % np) + np) % np;
          if (r != (int64_t)part) continue;
          local.axpy(c, FpVec::unit(op.p, local.tag(), (g - r) / np));
        }
        if (local.is_zero()) continue;
        Functional img = pullback(op.parts[part], local);
        for (auto& [l, c] : img.terms())
          out.axpy(c, FpVec::unit(op.p, out.tag(), l * np + (int64_t)part));
      }
      return out;
    }
    case OpKind::PolyOf: {
      Functional acc = a.scaled(op.poly.coeff(0));
      Functional w = a;
      for (long k = 1; k <= op.poly.degree(); ++k) {
        w = pullback(op.inner[0], w);
        uint32_t c = op.poly.coeff((size_t)k);
        if (c) acc.axpy(c, w);
      }
      return acc;
    }
    case OpKind::Power: {
      Functional w = a;
      for (uint64_t i = 0; i < op.power_k; ++i) w = pullback(op.inner[0], w);
      return w;
    }
    default:
      throw std::invalid_argument("operator has no pullback on sequence functionals");
  }
}

// Finite window [0, d) of the action: column j is apply(e_j) cropped to the
// window. Basis vectors outside an inner finite-dimensional window pad as zero.
inline FpMat truncate(const OperatorDesc& op, size_t d) {
  if (!is_fp_kind(op))
    throw std::invalid_argument("truncation needs a sequence-space operator");
  FpMat t(op.p, d, d);
  IndexTag tag = index_tag(op);
  for (size_t j = 0; j < d; ++j) {
    FpVec img;
    try {
      img = apply(op, FpVec::unit(op.p, tag, (int64_t)j));
    } catch (const std::out_of_range&) {
      continue;
    }
    for (auto& [i, c] : img.terms())
      if (i >= 0 && (size_t)i < d) t.set((size_t)i, j, c);
  }
  return t;
}

inline OperatorDesc op_inverse(const OperatorDesc& op) {
  switch (op.kind) {
    case OpKind::TwoSidedShift:
      return OperatorDesc::two_sided_shift(op.p, -op.shift_step);
    case OpKind::FiniteDim:
      return OperatorDesc::finite_dim(inverse(op.matrix));  // throws when singular
    default:
      throw std::invalid_argument("operator is not an automorphism with a representable inverse");
  }
}

// the dual automorphism/endomorphism of a shift, acting on the functional side
inline OperatorDesc dual_of_shift(const OperatorDesc& op) {
  switch (op.kind) {
    case OpKind::RightShift:
      return OperatorDesc::left_shift(op.p);
    case OpKind::LeftShift:
      return OperatorDesc::right_shift(op.p);
    case OpKind::TwoSidedShift:
      return OperatorDesc::two_sided_shift(op.p, -op.shift_step);
    default:
      throw std::invalid_argument("dual table covers only the shift kinds");
  }
}

}  // namespace adjent
