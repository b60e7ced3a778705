#include "adjent/fp.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace adjent;

namespace {

// brute-force span size of the rows: p^rank
size_t span_size(const FpMat& m) {
  std::set<std::vector<uint32_t>> seen;
  std::vector<uint32_t> combo(m.rows(), 0);
  Barrett br(m.p());
  while (true) {
    std::vector<uint32_t> v(m.cols(), 0);
    for (size_t i = 0; i < m.rows(); ++i)
      for (size_t j = 0; j < m.cols(); ++j)
        v[j] = (uint32_t)br.add(v[j], br.mul(combo[i], m.get(i, j)));
    seen.insert(v);
    size_t k = 0;
    while (k < combo.size() && ++combo[k] == m.p()) combo[k++] = 0;
    if (k == combo.size()) break;
  }
  return seen.size();
}

FpMat random_mat(std::mt19937_64& rng, uint32_t p, size_t r, size_t c) {
  FpMat m(p, r, c);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) m.set(i, j, (uint32_t)(rng() % p));
  return m;
}

FpMat companion(const FpPoly& f) {
  if (!f.is_monic() || f.degree() < 1)
    throw std::invalid_argument("companion of non-monic polynomial");
  size_t d = (size_t)f.degree();
  FpMat c(f.p(), d, d);
  Barrett br(f.p());
  for (size_t j = 0; j + 1 < d; ++j) c.set(j + 1, j, 1);
  for (size_t i = 0; i < d; ++i) c.set(i, d - 1, (uint32_t)br.neg(f.coeff(i)));
  return c;
}

}  // namespace

TEST(Barrett, MatchesBuiltinModulo) {
  std::mt19937_64 rng(1);
  for (uint32_t p : {2u, 3u, 5u, 7u, 65521u, 2147483647u}) {
    Barrett br(p);
    for (int i = 0; i < 2000; ++i) {
      uint64_t x = rng();
      EXPECT_EQ(br.reduce(x), x % p);
    }
    EXPECT_EQ(br.mul(p - 1, p - 1), (uint64_t)((unsigned __int128)(p - 1) * (p - 1) % p));
    if (p > 2) EXPECT_EQ(br.mul(br.inv(p - 1), p - 1), 1u);
  }
}

TEST(FpPoly, Arithmetic) {
  FpPoly a(2, {1, 1});  // X + 1 over F_2
  EXPECT_EQ(a * a, FpPoly(2, {1, 0, 1}));
  FpPoly f(5, {4, 0, 1});     // X^2 - 1
  FpPoly g(5, {1, 3, 1});     // X^2 + 3X + 1 = (X-1)^2
  EXPECT_EQ(FpPoly::gcd(f, g), FpPoly(5, {4, 1}));  // X - 1
  EXPECT_EQ(FpPoly::lcm(a, FpPoly(2, {1, 1})), a);

  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    uint32_t p = (t % 2) ? 3 : 7;
    std::vector<uint32_t> fc(1 + rng() % 6), dc(1 + rng() % 4);
    for (auto& c : fc) c = (uint32_t)(rng() % p);
    for (auto& c : dc) c = (uint32_t)(rng() % p);
    FpPoly ff(p, fc), dd(p, dc);
    if (dd.is_zero()) continue;
    auto [q, r] = ff.divmod(dd);
    EXPECT_EQ(q * dd + r, ff);
    EXPECT_LT(r.degree(), dd.degree());
  }
}

TEST(FpPoly, Compose) {
  FpPoly f(3, {1, 0, 1});  // X^2 + 1
  FpPoly g(3, {1, 1});     // X + 1
  EXPECT_EQ(f.compose(g), FpPoly(3, {2, 2, 1}));
  EXPECT_EQ(f.compose(FpPoly::zero(3)), FpPoly::one(3));
}

TEST(FpVec, Basics) {
  FpVec v = FpVec::unit(5, IndexTag::Nat, 3, 2);
  EXPECT_EQ(v.coeff(3), 2u);
  EXPECT_EQ(v.coeff(0), 0u);
  v.axpy(1, FpVec::unit(5, IndexTag::Nat, 3, 3));
  EXPECT_TRUE(v.is_zero());

  FpVec a(3, IndexTag::Int, {{-2, 1}, {5, 2}});
  FpVec b = a.shifted(2, false);
  EXPECT_EQ(b.coeff(0), 1u);
  EXPECT_EQ(b.coeff(7), 2u);
  EXPECT_EQ(b.min_index(), 0);
  EXPECT_EQ(b.max_index(), 7);

  FpVec x(3, IndexTag::Int, {{-2, 2}, {5, 1}});
  EXPECT_EQ(a.dot(x), (1 * 2 + 2 * 1) % 3u);

  EXPECT_THROW(FpVec(2, IndexTag::Nat, {{-1, 1}}), std::out_of_range);
}

TEST(Rref, RankMatchesSpanOracle) {
  std::mt19937_64 rng(13);
  for (uint32_t p : {2u, 3u, 5u}) {
    for (int t = 0; t < 40; ++t) {
      FpMat m = random_mat(rng, p, 1 + rng() % 4, 1 + rng() % 4);
      RrefResult rr = rref_rank(m);
      size_t expect = 1;
      for (size_t i = 0; i < rr.rank; ++i) expect *= p;
      EXPECT_EQ(span_size(m), expect);
      // canonical: re-reducing the basis is a fixed point
      RrefResult again = rref_rank(rr.basis);
      EXPECT_EQ(again.rank, rr.rank);
      EXPECT_EQ(again.basis, rr.basis);
      // canonical under row shuffles
      FpMat shuffled = m;
      for (size_t i = 0; i + 1 < m.rows(); ++i) shuffled.swap_rows(i, (size_t)(rng() % m.rows()));
      EXPECT_EQ(rref_rank(shuffled).basis, rr.basis);
    }
  }
}

TEST(Kernel, MatchesEnumerationOracle) {
  // kernel of [[1,0,1]] over F_2: x_0 = x_2, dimension 2
  FpMat m = FpMat::from_rows(2, {{1, 0, 1}});
  FpMat k = kernel_basis(m);
  EXPECT_EQ(k.cols(), 2u);
  size_t members = 0;
  for (uint32_t bits = 0; bits < 8; ++bits) {
    std::vector<uint32_t> x = {bits & 1, (bits >> 1) & 1, (bits >> 2) & 1};
    if ((x[0] + x[2]) % 2 == 0) ++members;
  }
  EXPECT_EQ(members, 4u);  // = 2^kernel_dim

  std::mt19937_64 rng(17);
  for (uint32_t p : {2u, 3u, 5u}) {
    for (int t = 0; t < 30; ++t) {
      FpMat a = random_mat(rng, p, 1 + rng() % 3, 1 + rng() % 4);
      FpMat kb = kernel_basis(a);
      EXPECT_EQ(kb.cols(), a.cols() - rref_rank(a).rank);
      FpMat prod = a * kb;
      EXPECT_TRUE(prod.is_zero());
      EXPECT_EQ(rref_rank(kb.transpose()).rank, kb.cols());  // independent columns
    }
  }
}

TEST(Solve, ConsistentAndInconsistent) {
  FpMat m = FpMat::from_rows(3, {{1}, {1}});
  EXPECT_FALSE(solve(m, {1, 2}).has_value());
  EXPECT_TRUE(solve(m, {2, 2}).has_value());

  std::mt19937_64 rng(19);
  for (int t = 0; t < 50; ++t) {
    uint32_t p = (t % 2) ? 3 : 5;
    FpMat a = random_mat(rng, p, 2 + rng() % 3, 2 + rng() % 3);
    std::vector<uint32_t> x(a.cols());
    for (auto& v : x) v = (uint32_t)(rng() % p);
    auto sol = solve(a, a.mul_vec(x));
    ASSERT_TRUE(sol.has_value());
    EXPECT_EQ(a.mul_vec(*sol), a.mul_vec(x));
  }
}

TEST(Inverse, RoundTrip) {
  std::mt19937_64 rng(23);
  for (uint32_t p : {2u, 5u}) {
    for (int t = 0; t < 30; ++t) {
      size_t n = 1 + rng() % 4;
      FpMat m = random_mat(rng, p, n, n);
      if (rref_rank(m).rank < n) {
        EXPECT_THROW(inverse(m), std::domain_error);
        continue;
      }
      EXPECT_EQ(m * inverse(m), FpMat::identity(p, n));
    }
  }
}

TEST(MinPoly, KnownValues) {
  FpPoly f(2, {1, 1, 1});  // X^2 + X + 1
  EXPECT_EQ(min_poly(companion(f)), f);

  EXPECT_EQ(min_poly(FpMat::identity(3, 3)), FpPoly(3, {2, 1}));  // X - 1

  FpMat j2 = FpMat::from_rows(3, {{0, 1}, {0, 0}});
  EXPECT_EQ(min_poly(j2), FpPoly(3, {0, 0, 1}));  // X^2

  FpMat d = FpMat::from_rows(3, {{1, 0}, {0, 2}});
  EXPECT_EQ(min_poly(d), FpPoly(3, {2, 0, 1}));  // (X-1)(X-2) = X^2 + 2

  EXPECT_EQ(min_poly(FpMat(2, 0, 0)), FpPoly::one(2));
}

TEST(MinPoly, MinimalityByExhaustion) {
  std::mt19937_64 rng(29);
  for (uint32_t p : {2u, 3u}) {
    for (int t = 0; t < 25; ++t) {
      size_t n = 2 + rng() % 2;
      FpMat m = random_mat(rng, p, n, n);
      FpPoly f = min_poly(m);
      EXPECT_TRUE(f.is_monic());
      EXPECT_TRUE(poly_matrix(f, m).is_zero());
      // no monic polynomial of lower degree annihilates
      long d = f.degree();
      size_t total = 1;
      for (long k = 0; k < d; ++k) total *= p;
      for (size_t lower_deg = 0; lower_deg < (size_t)d; ++lower_deg) {
        size_t combos = 1;
        for (size_t k = 0; k < lower_deg; ++k) combos *= p;
        for (size_t code = 0; code < combos; ++code) {
          std::vector<uint32_t> cs(lower_deg + 1, 0);
          size_t c = code;
          for (size_t k = 0; k < lower_deg; ++k) {
            cs[k] = (uint32_t)(c % p);
            c /= p;
          }
          cs[lower_deg] = 1;
          EXPECT_FALSE(poly_matrix(FpPoly(p, cs), m).is_zero())
              << "non-minimal annihilator found";
        }
      }
      (void)total;
    }
  }
}

TEST(MinPoly, PowersAndPolyApplyAgree) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 40; ++t) {
    uint32_t p = (t % 2) ? 2 : 5;
    size_t n = 1 + rng() % 4;
    FpMat m = random_mat(rng, p, n, n);
    std::vector<uint32_t> fc(1 + rng() % 4);
    for (auto& c : fc) c = (uint32_t)(rng() % p);
    FpPoly f(p, fc);
    FpMat fm = poly_matrix(f, m);
    for (size_t i = 0; i < n; ++i) {
      FpVec ei = FpVec::unit(p, IndexTag::Nat, (int64_t)i);
      FpVec via_vec = poly_apply(f, m, ei);
      for (size_t r = 0; r < n; ++r) EXPECT_EQ(via_vec.coeff((int64_t)r), fm.get(r, i));
    }
  }
}

TEST(StableKernelImage, FittingDecomposition) {
  FpMat j3 = FpMat::from_rows(2, {{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});
  auto [ker_n, im_n] = stable_kernel_image(j3);
  EXPECT_EQ(ker_n.cols(), 3u);
  EXPECT_EQ(im_n.rows(), 0u);

  FpMat inv2 = FpMat::from_rows(3, {{1, 1}, {0, 2}});
  auto [ker_i, im_i] = stable_kernel_image(inv2);
  EXPECT_EQ(ker_i.cols(), 0u);
  EXPECT_EQ(im_i.rows(), 2u);

  // block diag: nilpotent 2x2 plus invertible 1x1
  FpMat b = FpMat::from_rows(3, {{0, 1, 0}, {0, 0, 0}, {0, 0, 2}});
  auto [ker_b, im_b] = stable_kernel_image(b);
  EXPECT_EQ(ker_b.cols(), 2u);
  EXPECT_EQ(im_b.rows(), 1u);
  // complementary: ker + im dims = total, intersection trivial
  std::mt19937_64 rng(37);
  for (int t = 0; t < 30; ++t) {
    uint32_t p = (t % 2) ? 2 : 3;
    size_t n = 1 + rng() % 4;
    FpMat m = random_mat(rng, p, n, n);
    auto [ker, im] = stable_kernel_image(m);
    EXPECT_EQ(ker.cols() + im.rows(), n);
  }
}
