#include <gtest/gtest.h>

#include <stdexcept>
#include <variant>
#include <vector>

#include "adjent/engine.hpp"
#include "adjent/randgen.hpp"

using namespace adjent;

namespace {

FpKernelSub kernel_of(std::vector<FpVec> rows) { return FpKernelSub{std::move(rows)}; }

FpKernelSub unit_kernel(uint32_t p, IndexTag tag, std::vector<int64_t> idx) {
  FpKernelSub s;
  for (int64_t i : idx) s.rows.push_back(FpVec::unit(p, tag, i));
  return s;
}

Int ipow(Int b, size_t e) {
  Int r = 1;
  while (e--) r *= b;
  return r;
}

// random functional whose support stays inside the operator's coordinate window
FpVec windowed_functional(RandGen& rng, const OperatorDesc& op, int64_t lo, int64_t hi,
                          size_t max_terms) {
  IndexTag tag = index_tag(op);
  std::vector<int64_t> ok;
  for (int64_t i = lo; i <= hi; ++i)
    if (in_window(op, i)) ok.push_back(i);
  FpVec v(op.p, tag);
  if (ok.empty()) return v;
  size_t k = 1 + rng.below(max_terms);
  for (size_t t = 0; t < k; ++t) {
    int64_t i = ok[rng.below(ok.size())];
    uint32_t c = 1 + (uint32_t)rng.below(op.p - 1);
    v.axpy(1, FpVec::unit(op.p, tag, i, c));
  }
  if (v.is_zero()) v = FpVec::unit(op.p, tag, ok[0]);
  return v;
}

}  // namespace

TEST(Hstar, LeftShiftKernelHead) {
  for (uint32_t p : {2u, 3u, 5u}) {
    auto e = hstar(OperatorDesc::left_shift(p), unit_kernel(p, IndexTag::Nat, {0}));
    EXPECT_EQ(e.alpha, Int(p));
    EXPECT_TRUE(e.trace.exact);
    EXPECT_FALSE(e.trace.stabilized);
    EXPECT_EQ(e.value(), EntropyValue::log_of(Int(p)));
    for (size_t n = 0; n < e.trace.counts.size(); ++n)
      EXPECT_EQ(e.trace.counts[n], ipow(Int(p), n + 1));
  }
}

TEST(Hstar, RightShiftIsZero) {
  for (uint32_t p : {2u, 3u}) {
    auto e = hstar(OperatorDesc::right_shift(p), unit_kernel(p, IndexTag::Nat, {0}));
    EXPECT_EQ(e.alpha, Int(1));
    EXPECT_TRUE(e.trace.stabilized);
    EXPECT_TRUE(e.trace.exact);
    ASSERT_EQ(e.trace.counts.size(), 2u);
    EXPECT_EQ(e.trace.counts[0], Int(p));
    EXPECT_EQ(e.trace.counts[1], Int(p));
  }
}

// A functional supported far from the boundary dies only after that many
// pullbacks; the run must wait for the fixpoint instead of extrapolating the
// long constant-ratio prefix.
TEST(Hstar, RightShiftDeepRowRegression) {
  auto e = hstar(OperatorDesc::right_shift(2), unit_kernel(2, IndexTag::Nat, {5}));
  EXPECT_EQ(e.alpha, Int(1));
  EXPECT_TRUE(e.trace.stabilized);
  ASSERT_EQ(e.trace.counts.size(), 7u);
  EXPECT_EQ(e.trace.counts[5], Int(64));
  EXPECT_EQ(e.trace.counts[6], Int(64));
}

TEST(Hstar, TwoSidedShiftBothDirections) {
  for (int step : {1, -1}) {
    auto e = hstar(OperatorDesc::two_sided_shift(3, step),
                   unit_kernel(3, IndexTag::Int, {0}));
    EXPECT_EQ(e.alpha, Int(3));
    EXPECT_TRUE(e.trace.exact);
  }
}

TEST(Hstar, FiniteDimAlwaysZero) {
  RandGen rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    uint32_t p = rng.small_prime();
    size_t d = 1 + rng.below(5);
    OperatorDesc op = OperatorDesc::finite_dim(rng.matrix(p, d, d));
    FpKernelSub n;
    size_t k = 1 + rng.below(d);
    for (size_t i = 0; i < k; ++i)
      n.rows.push_back(rng.functional(p, IndexTag::Nat, 0, (int64_t)d - 1, d));
    auto e = hstar(op, n);
    EXPECT_EQ(e.alpha, Int(1));
    EXPECT_TRUE(e.trace.stabilized);
    EXPECT_TRUE(e.trace.exact);
    EXPECT_LE(e.trace.counts.size(), d + 2);
  }
}

TEST(Hstar, BlockDiagZero) {
  FpPoly b1(2, {1, 1, 1});
  FpPoly b2(2, {1, 1});
  auto op = OperatorDesc::block_diag(2, {b1, b2}, RepeatRule::RepeatLast);
  auto e = hstar(op, unit_kernel(2, IndexTag::Nat, {0, 3}));
  EXPECT_EQ(e.alpha, Int(1));
  EXPECT_TRUE(e.trace.stabilized);

  auto grow = OperatorDesc::block_diag(3, {FpPoly(3, {2, 1})}, RepeatRule::GrowLinear);
  auto e2 = hstar(grow, unit_kernel(3, IndexTag::Nat, {0, 2, 4}));
  EXPECT_EQ(e2.alpha, Int(1));
  EXPECT_TRUE(e2.trace.stabilized);
}

TEST(Hstar, WholeGroupAndDivisible) {
  auto e = hstar(OperatorDesc::left_shift(2), FpKernelSub{});
  EXPECT_EQ(e.alpha, Int(1));
  EXPECT_TRUE(e.trace.stabilized);
  EXPECT_EQ(e.trace.counts.back(), Int(1));

  auto d = hstar(OperatorDesc::divisible_trivial(), FpKernelSub{});
  EXPECT_EQ(d.alpha, Int(1));
  EXPECT_TRUE(d.trace.stabilized);
  EXPECT_THROW(hstar(OperatorDesc::divisible_trivial(),
                     unit_kernel(2, IndexTag::Nat, {0})),
               std::invalid_argument);
}

TEST(Hstar, LatticeKnownValues) {
  FgGroup z{1, {}};
  FgEndo dbl(z, IntMat::from_rows({{2}}));

  auto e2 = hstar(OperatorDesc::int_endo(dbl), LatticeSub::scaled(z, 2));
  EXPECT_EQ(e2.alpha, Int(1));
  EXPECT_TRUE(e2.trace.stabilized);
  EXPECT_EQ(e2.trace.counts[0], Int(2));

  auto e3 = hstar(OperatorDesc::int_endo(dbl), LatticeSub::scaled(z, 3));
  EXPECT_EQ(e3.alpha, Int(1));
  ASSERT_EQ(e3.trace.counts.size(), 2u);
  EXPECT_EQ(e3.trace.counts[0], Int(3));

  // invariant subgroup of x -> 2x on Z^2: the chain never moves
  FgGroup z2{2, {}};
  FgEndo dbl2(z2, IntMat::from_rows({{2, 0}, {0, 2}}));
  auto inv = hstar(OperatorDesc::int_endo(dbl2), LatticeSub::scaled(z2, 3));
  EXPECT_TRUE(inv.trace.stabilized);
  ASSERT_EQ(inv.trace.counts.size(), 2u);
  EXPECT_EQ(inv.trace.counts[0], Int(9));
  EXPECT_EQ(inv.trace.counts[1], Int(9));

  FgGroup z8{0, {8}};
  FgEndo tri(z8, IntMat::from_rows({{3}}));
  auto ef = hstar(OperatorDesc::int_endo(tri),
                  LatticeSub::from_columns(z8, IntMat::from_rows({{2}})));
  EXPECT_EQ(ef.alpha, Int(1));
  EXPECT_EQ(ef.trace.counts[0], Int(2));
}

// finitely generated groups are narrow, so every lattice run must reach its
// fixpoint and report zero
TEST(Hstar, LatticeRunsAllStabilize) {
  RandGen rng(7);
  EngineConfig cfg;
  cfg.max_steps = 64;
  for (int trial = 0; trial < 60; ++trial) {
    FgGroup g = rng.group(2, 2);
    if (g.dim() == 0) continue;
    FgEndo f = rng.endo(g);
    IntMat cols = IntMat::identity(g.dim());
    Int m = Int(1 + (int64_t)rng.below(4));
    for (size_t i = 0; i < g.dim(); ++i) {
      cols.at(i, i) = m;
      for (size_t j = i + 1; j < g.dim(); ++j)
        cols.at(i, j) = Int((int64_t)rng.below(5) - 2);
    }
    LatticeSub n = LatticeSub::from_columns(g, cols);
    ASSERT_TRUE(n.index().has_value());
    auto e = hstar(OperatorDesc::int_endo(f), n, cfg);
    EXPECT_EQ(e.alpha, Int(1));
    EXPECT_TRUE(e.trace.stabilized);
    EXPECT_TRUE(e.trace.exact);
  }
}

TEST(H, TrajectoryShifts) {
  for (uint32_t p : {2u, 5u}) {
    auto grow = h(OperatorDesc::right_shift(p),
                  FpSpanSub{{FpVec::unit(p, IndexTag::Nat, 0)}});
    EXPECT_EQ(grow.alpha, Int(p));
    EXPECT_TRUE(grow.trace.exact);

    auto dies = h(OperatorDesc::left_shift(p),
                  FpSpanSub{{FpVec::unit(p, IndexTag::Nat, 0)}});
    EXPECT_EQ(dies.alpha, Int(1));
    EXPECT_TRUE(dies.trace.stabilized);
    ASSERT_EQ(dies.trace.counts.size(), 2u);
    EXPECT_EQ(dies.trace.counts[0], Int(p));
  }
}

TEST(H, TorsionTrajectoriesStabilize) {
  FgGroup z8{0, {8}};
  FgEndo tri(z8, IntMat::from_rows({{3}}));
  auto e = h(OperatorDesc::int_endo(tri), FiniteGensSub{{{Int(2)}}});
  EXPECT_EQ(e.alpha, Int(1));
  EXPECT_EQ(e.trace.counts[0], Int(4));

  RandGen rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    FgGroup g = rng.group(1, 2);
    if (g.torsion.empty()) continue;
    FgEndo f = rng.endo(g);
    std::vector<Int> gen(g.dim(), Int(0));
    size_t t = g.free_rank + rng.below(g.torsion.size());
    gen[t] = Int(1 + (int64_t)rng.below(4));
    auto r = h(OperatorDesc::int_endo(f), FiniteGensSub{{gen}});
    EXPECT_EQ(r.alpha, Int(1));
    EXPECT_TRUE(r.trace.stabilized);
  }

  // a generator with a free coordinate spans an infinite subgroup
  FgGroup zx{1, {4}};
  FgEndo idf(zx, IntMat::identity(2));
  EXPECT_THROW(h(OperatorDesc::int_endo(idf), FiniteGensSub{{{Int(1), Int(0)}}}),
               std::invalid_argument);
}

TEST(GrowthTrace, LawEnforcement) {
  GrowthTrace t;
  t.push(2);
  EXPECT_THROW(t.push(3), GrowthLawViolation);  // not a multiple
  t.push(4);
  EXPECT_THROW(t.push(16), GrowthLawViolation);  // ratio rises from 2 to 4
  t.push(8);
  t.push(8);  // ratio may drop to 1

  GrowthTrace v;
  v.push(2);
  v.push(8);
  v.push(16);
  EXPECT_THROW(v.check_subadditive(), GrowthLawViolation);

  GrowthTrace w;
  for (Int c : {Int(2), Int(4), Int(8), Int(16), Int(16)}) w.push(c);
  w.check_subadditive();
  EXPECT_EQ(w.alphas(), (std::vector<Int>{2, 2, 2, 1}));
}

TEST(GrowthTrace, RatioRiseRejected) {
  GrowthTrace t;
  t.push(2);
  t.push(4);
  t.push(8);
  EXPECT_THROW(t.push(64), GrowthLawViolation);
}

TEST(Inconclusive, CarriesPartialTrace) {
  EngineConfig cfg;
  cfg.max_steps = 2;
  try {
    hstar(OperatorDesc::left_shift(2), unit_kernel(2, IndexTag::Nat, {0}), cfg);
    FAIL() << "expected InconclusiveError";
  } catch (const InconclusiveError& e) {
    EXPECT_EQ(e.trace.counts.size(), 2u);
    EXPECT_EQ(e.trace.counts[1], Int(4));
  }
}

TEST(Hstar, AntiMonotoneInRows) {
  RandGen rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    uint32_t p = rng.small_prime();
    OperatorDesc op = rng.sequence_op(p, 1, IndexTag::Nat);
    if (index_tag(op) != IndexTag::Nat) continue;
    std::vector<FpVec> rows;
    size_t k = 1 + rng.below(3);
    for (size_t i = 0; i < k; ++i) rows.push_back(windowed_functional(rng, op, 0, 5, 3));
    std::vector<FpVec> fewer(rows.begin(), rows.begin() + rng.below(rows.size()) + 1);
    // ker(rows) <= ker(fewer): the smaller subgroup dominates count for count
    GrowthTrace small = cotrajectory_trace(op, kernel_of(rows), 10);
    GrowthTrace large = cotrajectory_trace(op, kernel_of(fewer), 10);
    for (size_t n = 0; n < 10; ++n) {
      EXPECT_EQ(small.counts[n] % large.counts[n], Int(0));
      EXPECT_GE(small.counts[n], large.counts[n]);
    }
  }
}

TEST(Hstar, AntiMonotoneLattices) {
  RandGen rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    FgGroup g = rng.group(2, 1);
    if (g.dim() == 0) continue;
    FgEndo f = rng.endo(g);
    Int m = Int(1 + (int64_t)rng.below(3));
    LatticeSub big = LatticeSub::scaled(g, m);
    LatticeSub small = LatticeSub::scaled(g, m * 2);
    GrowthTrace ts = cotrajectory_trace(OperatorDesc::int_endo(f), small, 8);
    GrowthTrace tb = cotrajectory_trace(OperatorDesc::int_endo(f), big, 8);
    for (size_t n = 0; n < 8; ++n) EXPECT_GE(ts.counts[n], tb.counts[n]);
  }
}

TEST(Hstar, InvariantSubgroupChainIsConstant) {
  // right shift maps ker{e0*, e1*} into itself, so B_n = N for all n
  auto e = hstar(OperatorDesc::right_shift(3), unit_kernel(3, IndexTag::Nat, {0, 1}));
  EXPECT_TRUE(e.trace.stabilized);
  ASSERT_EQ(e.trace.counts.size(), 2u);
  EXPECT_EQ(e.trace.counts[0], Int(9));
  EXPECT_EQ(e.trace.counts[1], Int(9));

  FgGroup z2{2, {}};
  FgEndo dbl(z2, IntMat::from_rows({{2, 0}, {0, 2}}));
  GrowthTrace t =
      cotrajectory_trace(OperatorDesc::int_endo(dbl), LatticeSub::scaled(z2, 3), 6);
  for (const Int& c : t.counts) EXPECT_EQ(c, Int(9));
}

TEST(Identities, PowerLawOnShifts) {
  for (uint64_t k = 1; k <= 4; ++k)
    EXPECT_TRUE(check_power_identity(OperatorDesc::left_shift(2),
                                     unit_kernel(2, IndexTag::Nat, {0}), k, 6));
}

TEST(Identities, PowerLawRandomized) {
  RandGen rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    uint32_t p = rng.small_prime();
    IndexTag tag = rng.below(2) ? IndexTag::Int : IndexTag::Nat;
    OperatorDesc op = rng.sequence_op(p, 1 + rng.below(2), tag);
    tag = index_tag(op);
    FpKernelSub n;
    size_t k = 1 + rng.below(2);
    for (size_t i = 0; i < k; ++i)
      n.rows.push_back(windowed_functional(rng, op, tag == IndexTag::Int ? -3 : 0, 4, 3));
    uint64_t pw = 2 + rng.below(3);
    EXPECT_TRUE(check_power_identity(op, n, pw, 4))
        << "power " << pw << " failed on " << op_kind_name(op.kind);
  }
  for (int trial = 0; trial < 20; ++trial) {
    FgGroup g = rng.group(2, 1);
    if (g.dim() == 0) continue;
    FgEndo f = rng.endo(g);
    LatticeSub n = LatticeSub::scaled(g, Int(1 + (int64_t)rng.below(3)));
    EXPECT_TRUE(check_power_identity(OperatorDesc::int_endo(f), n, 2 + rng.below(2), 4));
  }
}

TEST(Identities, InverseLawOnAutomorphisms) {
  RandGen rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    uint32_t p = rng.small_prime();
    int step = rng.below(2) ? 1 : -1;
    OperatorDesc op = OperatorDesc::two_sided_shift(p, step);
    FpKernelSub n;
    for (size_t i = 0, k = 1 + rng.below(2); i < k; ++i)
      n.rows.push_back(rng.functional(p, IndexTag::Int, -4, 4, 3));
    EXPECT_TRUE(check_inverse_identity(op, n, 8));
  }
  // invertible matrix on a finite-dimensional window
  FpMat m(5, 2, 2);
  m.set(0, 0, 1);
  m.set(0, 1, 2);
  m.set(1, 0, 3);
  m.set(1, 1, 2);
  OperatorDesc op = OperatorDesc::finite_dim(m);
  EXPECT_TRUE(check_inverse_identity(op, unit_kernel(5, IndexTag::Nat, {0}), 8));
}

TEST(Family, SupScanIsLowerBound) {
  std::vector<CofiniteSubgroup> family{
      FpKernelSub{},
      unit_kernel(2, IndexTag::Nat, {0}),
      unit_kernel(2, IndexTag::Nat, {0, 1}),
  };
  FamilyScan scan = sup_over_family(OperatorDesc::left_shift(2), family);
  EXPECT_EQ(scan.members.size(), 3u);
  EXPECT_EQ(scan.best, EntropyValue::lower_bound(Int(2)));
  EXPECT_EQ(scan.members[0].alpha, Int(1));
  EXPECT_EQ(scan.members[1].alpha, Int(2));
  // ker{e0*, e1*} starts one rank higher but still grows by one rank per step
  EXPECT_EQ(scan.members[2].alpha, Int(2));
  EXPECT_EQ(scan.members[2].trace.counts[0], Int(4));

  // two interleaved copies do give a bigger ratio
  auto two = OperatorDesc::direct_sum(
      {OperatorDesc::left_shift(2), OperatorDesc::left_shift(2)});
  FamilyScan scan2 = sup_over_family(
      two, {unit_kernel(2, IndexTag::Nat, {0}), unit_kernel(2, IndexTag::Nat, {0, 1})});
  EXPECT_EQ(scan2.best, EntropyValue::lower_bound(Int(4)));
}

TEST(Hstar, DirectSumHomogeneousIsExact) {
  auto op = OperatorDesc::direct_sum(
      {OperatorDesc::left_shift(2), OperatorDesc::left_shift(2)});
  auto e = hstar(op, unit_kernel(2, IndexTag::Nat, {0}));
  EXPECT_EQ(e.alpha, Int(2));
  EXPECT_TRUE(e.trace.exact);
}

TEST(Hstar, MixedDirectSumFallsBackToWindow) {
  auto op = OperatorDesc::direct_sum(
      {OperatorDesc::right_shift(2), OperatorDesc::left_shift(2)});
  FpVec row = FpVec::unit(2, IndexTag::Nat, 0);
  row.axpy(1, FpVec::unit(2, IndexTag::Nat, 1));
  auto e = hstar(op, kernel_of({row}));
  EXPECT_EQ(e.alpha, Int(2));
  EXPECT_FALSE(e.trace.exact);
  EXPECT_FALSE(e.trace.stabilized);
}

TEST(Hstar, HeuristicPathForPolynomialImages) {
  // the square of the left shift doubles the rank step, outside the certified class
  auto op = OperatorDesc::poly_of(FpPoly::monomial(3, 2), OperatorDesc::left_shift(3));
  auto e = hstar(op, unit_kernel(3, IndexTag::Nat, {0, 1}));
  EXPECT_EQ(e.alpha, Int(9));
  EXPECT_FALSE(e.trace.exact);
  for (size_t n = 0; n < e.trace.counts.size(); ++n)
    EXPECT_EQ(e.trace.counts[n], ipow(Int(9), n + 1));
}

TEST(Engine, RejectsMismatchedSubgroups) {
  FgGroup z{1, {}};
  FgEndo dbl(z, IntMat::from_rows({{2}}));
  EXPECT_THROW(hstar(OperatorDesc::left_shift(2), LatticeSub::scaled(z, 2)),
               std::invalid_argument);
  EXPECT_THROW(hstar(OperatorDesc::int_endo(dbl), unit_kernel(2, IndexTag::Nat, {0})),
               std::invalid_argument);
  EXPECT_THROW(hstar(OperatorDesc::left_shift(2), unit_kernel(3, IndexTag::Nat, {0})),
               std::invalid_argument);
  EXPECT_THROW(hstar(OperatorDesc::left_shift(2), unit_kernel(2, IndexTag::Int, {0})),
               std::invalid_argument);
  // infinite-index lattice
  FgGroup z2{2, {}};
  FgEndo id2(z2, IntMat::identity(2));
  IntMat one_col(2, 1);
  one_col.at(0, 0) = 1;
  EXPECT_THROW(hstar(OperatorDesc::int_endo(id2), LatticeSub::from_columns(z2, one_col)),
               std::invalid_argument);
}

TEST(Engine, TraceRunsMatchDrivenRuns) {
  RandGen rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    uint32_t p = rng.small_prime();
    OperatorDesc op = rng.sequence_op(p, 1, IndexTag::Nat);
    IndexTag tag = index_tag(op);
    FpKernelSub n;
    n.rows.push_back(windowed_functional(rng, op, tag == IndexTag::Int ? -3 : 0, 4, 3));
    GrowthTrace raw = cotrajectory_trace(op, n, 12);
    try {
      auto e = hstar(op, n);
      for (size_t i = 0; i < std::min(raw.counts.size(), e.trace.counts.size()); ++i)
        EXPECT_EQ(raw.counts[i], e.trace.counts[i]);
      if (e.trace.stabilized)
        for (size_t i = e.trace.n_stab; i < raw.counts.size(); ++i)
          EXPECT_EQ(raw.counts[i], e.trace.a0);
    } catch (const InconclusiveError&) {
      // raw trace is still law-checked by push(); nothing further to compare
    }
  }
}
