#pragma once

// Exact growth engine. Iterates the cotrajectory chain
//   B_1 = N,  B_{n+1} = N  intersect  op^{-1}(B_n)
// and the trajectory chain T_n = F + op F + ... + op^{n-1} F, recording the
// exact counts |G/B_n| resp. |T_n| together with the ratio chain, until the
// chain either reaches a fixpoint (value zero) or the ratios lock into a
// constant tail (value log alpha).

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "adjent/intlat.hpp"
#include "adjent/operators.hpp"

namespace adjent {

struct EngineConfig {
  size_t max_steps = 512;
  size_t window = 0;  // 0: derived from supports (or dimension) automatically
};

// Cofinite subgroup descriptors: joint kernel of finitely many functionals on
// a sequence space, or a finite-index lattice in a finitely generated group.
struct FpKernelSub {
  std::vector<Functional> rows;
};
using CofiniteSubgroup = std::variant<FpKernelSub, LatticeSub>;

// Finite subgroup descriptors for the trajectory side.
struct FpSpanSub {
  std::vector<FpVec> generators;
};
struct FiniteGensSub {
  std::vector<std::vector<Int>> generators;  // torsion elements, endo coordinates
};
using FiniteSubgroup = std::variant<FpSpanSub, FiniteGensSub>;

class GrowthLawViolation : public std::logic_error {
 public:
  explicit GrowthLawViolation(const std::string& what) : std::logic_error(what) {}
};

struct GrowthTrace {
  uint32_t p = 0;               // prime for sequence runs, 0 for lattice runs
  std::vector<Int> counts;      // counts[i] = |C_{i+1}| resp. |T_{i+1}|
  std::vector<int64_t> log_p;   // exponents when p > 0
  bool stabilized = false;      // fixpoint: the chain became constant
  size_t n_stab = 0;            // counts[n] = a0 * alpha_final^(n - n_stab) for n >= n_stab
  Int alpha_final = 1;
  Int a0 = 1;
  bool exact = false;           // value certified, not a window heuristic

  // divisor-chain laws checked on every push
  void push(const Int& c) {
    if (c < 1) throw GrowthLawViolation("count must be positive");
    if (!counts.empty()) {
      const Int& prev = counts.back();
      if (c % prev != 0)
        throw GrowthLawViolation("count " + c.str() + " at step " +
                                 std::to_string(counts.size() + 1) +
                                 " is not a multiple of the previous count " + prev.str());
      if (counts.size() >= 2) {
        Int prev_alpha = prev / counts[counts.size() - 2];
        Int alpha = c / prev;
        if (prev_alpha % alpha != 0)
          throw GrowthLawViolation("ratio " + alpha.str() + " at step " +
                                   std::to_string(counts.size() + 1) +
                                   " does not divide the previous ratio " + prev_alpha.str());
      }
    }
    counts.push_back(c);
  }
  std::vector<Int> alphas() const {
    std::vector<Int> a;
    for (size_t i = 1; i < counts.size(); ++i) a.push_back(counts[i] / counts[i - 1]);
    return a;
  }
  // c_{n+m} <= c_n * c_m over everything recorded
  void check_subadditive() const {
    for (size_t n = 1; n < counts.size(); ++n)
      for (size_t m = n; n + m <= counts.size(); ++m)
        if (counts[n + m - 1] > counts[n - 1] * counts[m - 1])
          throw GrowthLawViolation("subadditivity fails at n=" + std::to_string(n) +
                                   ", m=" + std::to_string(m));
  }
};

class InconclusiveError : public std::runtime_error {
 public:
  InconclusiveError(std::string what, GrowthTrace t)
      : std::runtime_error(std::move(what)), trace(std::move(t)) {}
  GrowthTrace trace;
};

struct EntropyValue {
  enum class Kind { Zero, Log, Infinite, LowerBound };
  Kind kind = Kind::Zero;
  Int alpha = 1;

  static EntropyValue zero() { return {Kind::Zero, 1}; }
  static EntropyValue log_of(Int a) {
    return a == 1 ? zero() : EntropyValue{Kind::Log, std::move(a)};
  }
  static EntropyValue infinite() { return {Kind::Infinite, 0}; }
  static EntropyValue lower_bound(Int a) { return {Kind::LowerBound, std::move(a)}; }

  double nats() const {
    switch (kind) {
      case Kind::Zero: return 0.0;
      case Kind::Infinite: return std::numeric_limits<double>::infinity();
      default: return std::log(alpha.convert_to<double>());
    }
  }
  std::string to_string() const {
    switch (kind) {
      case Kind::Zero: return "0";
      case Kind::Log: return "log " + alpha.str();
      case Kind::Infinite: return "infinity";
      case Kind::LowerBound: return alpha == 1 ? ">= 0" : ">= log " + alpha.str();
    }
    return "?";
  }
  friend bool operator==(const EntropyValue& a, const EntropyValue& b) {
    return a.kind == b.kind && a.alpha == b.alpha;
  }
};

// value of one subgroup's growth run: log(alpha), zero iff the chain stabilized
struct SubgroupEntropy {
  Int alpha = 1;
  GrowthTrace trace;
  EntropyValue value() const { return EntropyValue::log_of(alpha); }
};

// Incrementally maintained reduced row echelon basis of a growing span of
// finitely supported rows. Pivot = least support index, fully back-reduced,
// so the row set is canonical for the span.
class SparseRref {
 public:
  SparseRref(uint32_t p, IndexTag tag) : p_(p), tag_(tag), br_(p) {}

  bool insert(FpVec v) {
    if (v.p() != p_ || (!v.is_zero() && v.tag() != tag_))
      throw std::invalid_argument("row space mismatch");
    while (!v.is_zero()) {
      int64_t lead = v.min_index();
      auto it = rows_.find(lead);
      if (it == rows_.end()) {
        v = v.scaled((uint32_t)br_.inv(v.coeff(lead)));
        for (auto& [piv, row] : rows_) {
          uint32_t c = row.coeff(lead);
          if (c) row.axpy((uint32_t)br_.neg(c), v);
        }
        rows_.emplace(lead, std::move(v));
        return true;
      }
      v.axpy((uint32_t)br_.neg(v.coeff(lead)), it->second);
    }
    return false;
  }
  size_t rank() const { return rows_.size(); }
  const std::map<int64_t, FpVec>& rows() const { return rows_; }
  bool reduces_to_zero(FpVec v) const {
    while (!v.is_zero()) {
      auto it = rows_.find(v.min_index());
      if (it == rows_.end()) return false;
      v.axpy((uint32_t)br_.neg(v.coeff(v.min_index())), it->second);
    }
    return true;
  }

 private:
  uint32_t p_;
  IndexTag tag_;
  Barrett br_;
  std::map<int64_t, FpVec> rows_;
};

// Power over an integer endomorphism resolves to a matrix power.
inline std::optional<FgEndo> as_int_endo(const OperatorDesc& op) {
  if (op.kind == OpKind::IntEndo) return op.endo;
  if (op.kind == OpKind::Power && op.inner.size() == 1) {
    auto in = as_int_endo(op.inner[0]);
    if (in) return in->power(op.power_k);
  }
  return std::nullopt;
}

namespace detail {

// The certified-stabilization class: pure shifts, their powers, and homogeneous
// direct sums (all summands the same shift). Mixing shift kinds in a sum lets
// one summand's chain keep adjusting after another's has settled, so those only
// get the window heuristic.
inline bool shift_like(const OperatorDesc& op) {
  switch (op.kind) {
    case OpKind::RightShift:
    case OpKind::LeftShift:
    case OpKind::TwoSidedShift:
      return true;
    case OpKind::Power:
      return op.inner.size() == 1 && shift_like(op.inner[0]);
    case OpKind::DirectSum: {
      if (op.parts.empty()) return false;
      const OperatorDesc& first = op.parts[0];
      for (const auto& part : op.parts) {
        if (!shift_like(part)) return false;
        if (part.kind != first.kind || part.kind == OpKind::Power ||
            part.shift_step != first.shift_step)
          return false;
      }
      return true;
    }
    default:
      return false;
  }
}

struct SupportStats {
  int64_t lo = 0, hi = -1;
  size_t rows = 0;
  int64_t extent() const { return rows == 0 ? 0 : hi - lo + 1; }
};

inline SupportStats support_stats(const std::vector<Functional>& rows) {
  SupportStats s;
  for (const auto& r : rows) {
    if (r.is_zero()) continue;
    if (s.rows == 0) {
      s.lo = r.min_index();
      s.hi = r.max_index();
    } else {
      s.lo = std::min(s.lo, r.min_index());
      s.hi = std::max(s.hi, r.max_index());
    }
    ++s.rows;
  }
  return s;
}

// For Nat-indexed spaces the edge at 0 matters: a row supported near index m
// interacts with the boundary only after ~m steps, so bounds use the absolute
// position. Two-sided spaces are translation invariant and only the extent counts.
inline size_t shift_stable_bound(const SupportStats& st, IndexTag tag) {
  if (st.rows == 0) return 1;
  int64_t base = tag == IndexTag::Nat ? st.hi + 1 : st.extent();
  return (size_t)(base + (int64_t)st.rows + 1);
}

inline size_t default_window_for(const SupportStats& st, IndexTag tag) {
  return std::max<size_t>(8, 2 * shift_stable_bound(st, tag));
}

}  // namespace detail

// One cotrajectory chain in motion. step() pushes |C_{n+1}| onto the trace.
class CotrajectoryRun {
 public:
  CotrajectoryRun(const OperatorDesc& op, const CofiniteSubgroup& n) : op_(op) {
    ensure_valid(op);
    if (auto endo = as_int_endo(op)) {
      const auto* lat = std::get_if<LatticeSub>(&n);
      if (!lat)
        throw std::invalid_argument(
            "integer endomorphisms take finite-index lattice subgroups");
      if (lat->ambient() != endo->group)
        throw std::invalid_argument("subgroup lives in a different group");
      if (!lat->index().has_value())
        throw std::invalid_argument("cotrajectory needs a finite-index subgroup");
      endo_ = *endo;
      base_lat_ = *lat;
      cur_lat_ = *lat;
      trace_.p = 0;
      return;
    }
    if (op.kind == OpKind::DivisibleTrivial) {
      const auto* ker = std::get_if<FpKernelSub>(&n);
      if (!ker || !ker->rows.empty())
        throw std::invalid_argument(
            "a divisible group has no proper cofinite subgroups; use the whole group");
      trivial_ = true;
      trace_.p = 0;
      return;
    }
    const auto* ker = std::get_if<FpKernelSub>(&n);
    if (!ker)
      throw std::invalid_argument("sequence operators take functional-kernel subgroups");
    for (const auto& r : ker->rows) {
      if (r.p() != op.p) throw std::invalid_argument("functional modulus mismatch");
      if (!r.is_zero() && r.tag() != index_tag(op))
        throw std::invalid_argument("functional index tag mismatch");
      for (const auto& [i, v] : r.terms())
        if (!in_window(op, i))
          throw std::invalid_argument("functional supported outside the operator window");
    }
    rows_ = ker->rows;
    rref_.emplace(op.p, index_tag(op));
    trace_.p = op.p;
  }

  // advance to B_{n+1}; returns the new count
  const Int& step() {
    if (fixpoint_) {
      trace_.push(trace_.counts.back());
      if (!trace_.log_p.empty()) trace_.log_p.push_back(trace_.log_p.back());
      return trace_.counts.back();
    }
    if (trivial_) {
      trace_.push(1);
      fixpoint_ = trace_.counts.size() >= 2;
      return trace_.counts.back();
    }
    if (rref_) {
      size_t before = rref_->rank();
      if (trace_.counts.empty()) {
        for (const auto& r : rows_) {
          frontier_.push_back(r);
          rref_->insert(r);
        }
      } else {
        for (auto& f : frontier_) f = pullback(op_, f);
        for (const auto& f : frontier_) rref_->insert(f);
      }
      if (!trace_.counts.empty() && rref_->rank() == before) fixpoint_ = true;
      Int c = boost::multiprecision::pow(Int(op_.p), (unsigned)rref_->rank());
      trace_.push(c);
      trace_.log_p.push_back((int64_t)rref_->rank());
      return trace_.counts.back();
    }
    // lattice chain
    if (trace_.counts.empty()) {
      trace_.push(cur_lat_.index().value());
      return trace_.counts.back();
    }
    LatticeSub next = intersect(base_lat_, preimage(endo_, cur_lat_));
    if (next == cur_lat_) fixpoint_ = true;
    cur_lat_ = std::move(next);
    auto idx = cur_lat_.index();
    if (!idx)
      throw std::logic_error("cotrajectory subgroup lost finite index");
    trace_.push(*idx);
    return trace_.counts.back();
  }

  bool fixpoint() const { return fixpoint_; }
  const GrowthTrace& trace() const { return trace_; }
  GrowthTrace& trace() { return trace_; }
  size_t steps_done() const { return trace_.counts.size(); }

  // current chain subgroup as a cofinite-subgroup value
  CofiniteSubgroup current_subgroup() const {
    if (rref_) {
      FpKernelSub s;
      for (const auto& [piv, row] : rref_->rows()) s.rows.push_back(row);
      return s;
    }
    if (trivial_) return FpKernelSub{};
    return cur_lat_;
  }

  size_t default_window() const {
    if (rref_)
      return detail::default_window_for(detail::support_stats(rows_), index_tag(op_));
    if (trivial_) return 8;
    return std::max<size_t>(8, 2 * endo_.group.dim());
  }
  std::optional<size_t> exact_bound() const {
    if (rref_ && detail::shift_like(op_))
      return detail::shift_stable_bound(detail::support_stats(rows_), index_tag(op_));
    return std::nullopt;
  }
  // lattice and trivial chains stabilize by theorem; a constant-ratio tail there
  // is never evidence of growth, so the driver must wait for the fixpoint
  bool always_stabilizes() const { return trivial_ || !rref_; }

 private:
  OperatorDesc op_;
  // sequence path
  std::vector<Functional> rows_;
  std::vector<Functional> frontier_;
  std::optional<SparseRref> rref_;
  // lattice path
  FgEndo endo_;
  LatticeSub base_lat_, cur_lat_;
  bool trivial_ = false;
  bool fixpoint_ = false;
  GrowthTrace trace_;
};

// Trajectory chain |T_n| for a finite subgroup on the forward side.
class TrajectoryRun {
 public:
  TrajectoryRun(const OperatorDesc& op, const FiniteSubgroup& f) : op_(op) {
    ensure_valid(op);
    if (auto endo = as_int_endo(op)) {
      const auto* fin = std::get_if<FiniteGensSub>(&f);
      if (!fin)
        throw std::invalid_argument("integer endomorphisms take torsion generator sets");
      endo_ = *endo;
      gens_ = fin->generators;
      frontier_int_ = gens_;
      lattice_mode_ = true;
      trace_.p = 0;
      return;
    }
    if (!is_fp_kind(op))
      throw std::invalid_argument("trajectories need a sequence operator or an integer endomorphism");
    const auto* span = std::get_if<FpSpanSub>(&f);
    if (!span) throw std::invalid_argument("sequence operators take vector-span subgroups");
    for (const auto& g : span->generators) {
      if (g.p() != op.p) throw std::invalid_argument("generator modulus mismatch");
      if (!g.is_zero() && g.tag() != index_tag(op))
        throw std::invalid_argument("generator index tag mismatch");
      for (const auto& [i, v] : g.terms())
        if (!in_window(op, i))
          throw std::invalid_argument("generator supported outside the operator window");
    }
    vec_gens_ = span->generators;
    rref_.emplace(op.p, index_tag(op));
    trace_.p = op.p;
  }

  const Int& step() {
    if (fixpoint_) {
      trace_.push(trace_.counts.back());
      if (!trace_.log_p.empty()) trace_.log_p.push_back(trace_.log_p.back());
      return trace_.counts.back();
    }
    if (rref_) {
      size_t before = rref_->rank();
      if (trace_.counts.empty()) {
        for (const auto& g : vec_gens_) {
          frontier_.push_back(g);
          rref_->insert(g);
        }
      } else {
        for (auto& f : frontier_) f = apply(op_, f);
        for (const auto& f : frontier_) rref_->insert(f);
      }
      if (!trace_.counts.empty() && rref_->rank() == before) fixpoint_ = true;
      trace_.push(boost::multiprecision::pow(Int(op_.p), (unsigned)rref_->rank()));
      trace_.log_p.push_back((int64_t)rref_->rank());
      return trace_.counts.back();
    }
    if (trace_.counts.empty()) {
      all_gens_ = gens_;
      trace_.push(finite_subgroup_order(endo_.group, all_gens_));
      return trace_.counts.back();
    }
    for (auto& g : frontier_int_) g = endo_.apply(g);
    for (const auto& g : frontier_int_) all_gens_.push_back(g);
    Int c = finite_subgroup_order(endo_.group, all_gens_);
    if (c == trace_.counts.back()) fixpoint_ = true;
    trace_.push(c);
    return trace_.counts.back();
  }

  bool fixpoint() const { return fixpoint_; }
  const GrowthTrace& trace() const { return trace_; }
  size_t default_window() const {
    if (rref_)
      return detail::default_window_for(detail::support_stats(vec_gens_), index_tag(op_));
    return std::max<size_t>(8, lattice_mode_ ? 2 * endo_.group.dim() : 8);
  }
  std::optional<size_t> exact_bound() const {
    if (rref_ && detail::shift_like(op_))
      return detail::shift_stable_bound(detail::support_stats(vec_gens_), index_tag(op_));
    return std::nullopt;
  }
  // trajectories of torsion generators run inside the finite torsion part
  bool always_stabilizes() const { return lattice_mode_; }

 private:
  OperatorDesc op_;
  std::vector<FpVec> vec_gens_;
  std::vector<FpVec> frontier_;
  std::optional<SparseRref> rref_;
  FgEndo endo_;
  std::vector<std::vector<Int>> gens_, frontier_int_, all_gens_;
  bool lattice_mode_ = false;
  bool fixpoint_ = false;
  GrowthTrace trace_;
};

namespace detail {

// shared stabilization protocol: fixpoint => zero; else constant-ratio tail of
// window length => log(alpha); else inconclusive
template <typename Run>
SubgroupEntropy drive(Run& run, const EngineConfig& cfg) {
  size_t window = cfg.window ? cfg.window : run.default_window();
  std::optional<size_t> bound = run.exact_bound();
  bool must_stabilize = run.always_stabilizes();
  size_t streak = 0;
  GrowthTrace out;
  for (size_t n = 1; n <= cfg.max_steps; ++n) {
    run.step();
    const GrowthTrace& t = run.trace();
    if (run.fixpoint()) {
      out = t;
      out.stabilized = true;
      // the chain is constant from the step before the repeat
      out.n_stab = t.counts.size() - 1;
      out.alpha_final = 1;
      out.a0 = t.counts.back();
      out.exact = true;
      out.check_subadditive();
      return {Int(1), std::move(out)};
    }
    if (!must_stabilize && t.counts.size() >= 2) {
      const auto& c = t.counts;
      Int alpha = c[c.size() - 1] / c[c.size() - 2];
      Int prev_alpha =
          c.size() >= 3 ? c[c.size() - 2] / c[c.size() - 3] : Int(0);
      streak = (c.size() >= 3 && alpha == prev_alpha) ? streak + 1 : 1;
      bool long_enough = streak >= window;
      bool past_bound = bound && c.size() >= *bound + 1;
      if (alpha > 1 && (long_enough || (past_bound && streak >= 2))) {
        out = t;
        out.stabilized = false;
        out.n_stab = c.size() - streak;  // ratios constant from this step on
        out.alpha_final = alpha;
        out.a0 = c[out.n_stab - 1];
        out.exact = past_bound;
        out.check_subadditive();
        return {alpha, std::move(out)};
      }
    }
  }
  GrowthTrace t = run.trace();
  throw InconclusiveError(
      "growth did not stabilize within " + std::to_string(cfg.max_steps) + " steps",
      std::move(t));
}

}  // namespace detail

// H*(op, N): the adjoint-entropy contribution of one cofinite subgroup
inline SubgroupEntropy hstar(const OperatorDesc& op, const CofiniteSubgroup& n,
                             const EngineConfig& cfg = {}) {
  CotrajectoryRun run(op, n);
  return detail::drive(run, cfg);
}

// H(op, F): the entropy contribution of one finite subgroup on the forward side
inline SubgroupEntropy h(const OperatorDesc& op, const FiniteSubgroup& f,
                         const EngineConfig& cfg = {}) {
  TrajectoryRun run(op, f);
  return detail::drive(run, cfg);
}

// raw fixed-length run of the cotrajectory counts
inline GrowthTrace cotrajectory_trace(const OperatorDesc& op, const CofiniteSubgroup& n,
                                      size_t steps) {
  CotrajectoryRun run(op, n);
  for (size_t i = 0; i < steps; ++i) run.step();
  return run.trace();
}

inline GrowthTrace trajectory_trace(const OperatorDesc& op, const FiniteSubgroup& f,
                                    size_t steps) {
  TrajectoryRun run(op, f);
  for (size_t i = 0; i < steps; ++i) run.step();
  return run.trace();
}

struct FamilyScan {
  EntropyValue best;  // lower bound: sup over the family members only
  std::vector<SubgroupEntropy> members;
};

// best value over a finite family of cofinite subgroups; a lower bound for the
// supremum over all of C(G)
inline FamilyScan sup_over_family(const OperatorDesc& op,
                                  const std::vector<CofiniteSubgroup>& family,
                                  const EngineConfig& cfg = {}) {
  FamilyScan scan;
  Int best = 1;
  for (size_t i = 0; i < family.size(); ++i) {
    try {
      SubgroupEntropy e = hstar(op, family[i], cfg);
      if (e.alpha > best) best = e.alpha;
      scan.members.push_back(std::move(e));
    } catch (const InconclusiveError& err) {
      throw InconclusiveError("family member " + std::to_string(i) + ": " + err.what(),
                              err.trace);
    }
  }
  scan.best = EntropyValue::lower_bound(best);
  return scan;
}

// |C_{nk}(op, N)| = |C_n(op^k, B_k(op, N))| for all recorded n
inline bool check_power_identity(const OperatorDesc& op, const CofiniteSubgroup& n,
                                 uint64_t k, size_t steps) {
  if (k < 1) throw std::invalid_argument("power identity needs k >= 1");
  CotrajectoryRun full(op, n);
  for (size_t i = 0; i < steps * k; ++i) full.step();

  CotrajectoryRun upto_k(op, n);
  for (size_t i = 0; i < k; ++i) upto_k.step();
  CofiniteSubgroup bk = upto_k.current_subgroup();

  OperatorDesc opk = OperatorDesc::power(k, op);
  CotrajectoryRun powered(opk, bk);
  for (size_t i = 0; i < steps; ++i) powered.step();

  const auto& cf = full.trace().counts;
  const auto& cp = powered.trace().counts;
  for (size_t j = 1; j <= steps; ++j)
    if (cf[j * k - 1] != cp[j - 1]) return false;
  return true;
}

// for an automorphism with a representable inverse: counts agree step by step
inline bool check_inverse_identity(const OperatorDesc& op, const CofiniteSubgroup& n,
                                   size_t steps) {
  OperatorDesc inv = op_inverse(op);
  GrowthTrace a = cotrajectory_trace(op, n, steps);
  GrowthTrace b = cotrajectory_trace(inv, n, steps);
  return a.counts == b.counts;
}

}  // namespace adjent
