#pragma once

// Seeded random instance generation: operators from the zoo, functionals,
// groups, endomorphisms. Everything is driven by one mt19937_64 so a single
// seed reproduces a whole run.

#include <cstdint>
#include <random>

#include "adjent/operators.hpp"

namespace adjent {

class RandGen {
 public:
  explicit RandGen(uint64_t seed) : rng_(seed) {}

  uint64_t raw() { return rng_(); }
  uint64_t below(uint64_t n) { return n ? rng_() % n : 0; }
  uint32_t small_prime() {
    static const uint32_t ps[] = {2, 2, 2, 3, 3, 5};
    return ps[below(6)];
  }

  FpPoly monic_poly(uint32_t p, size_t deg) {
    std::vector<uint32_t> c(deg + 1, 0);
    for (size_t i = 0; i < deg; ++i) c[i] = (uint32_t)below(p);
    c[deg] = 1;
    return FpPoly(p, std::move(c));
  }
  FpPoly poly(uint32_t p, size_t max_deg) {
    std::vector<uint32_t> c(1 + below(max_deg + 1), 0);
    for (auto& v : c) v = (uint32_t)below(p);
    return FpPoly(p, std::move(c));
  }
  FpMat matrix(uint32_t p, size_t r, size_t c) {
    FpMat m(p, r, c);
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < c; ++j) m.set(i, j, (uint32_t)below(p));
    return m;
  }
  FpVec functional(uint32_t p, IndexTag tag, int64_t lo, int64_t hi, size_t max_terms) {
    std::vector<FpVec::Term> terms;
    size_t n = 1 + below(max_terms);
    for (size_t k = 0; k < n; ++k) {
      int64_t i = lo + (int64_t)below((uint64_t)(hi - lo + 1));
      uint32_t v = 1 + (uint32_t)below(p - 1);
      terms.emplace_back(i, v);
    }
    return FpVec(p, tag, std::move(terms));
  }
  FpVec nonzero_functional(uint32_t p, IndexTag tag, int64_t lo, int64_t hi,
                           size_t max_terms) {
    for (int tries = 0; tries < 64; ++tries) {
      FpVec f = functional(p, tag, lo, hi, max_terms);
      if (!f.is_zero()) return f;
    }
    return FpVec::unit(p, tag, lo);
  }

  // a random operator from the zoo acting on an F_p sequence space
  OperatorDesc sequence_op(uint32_t p, size_t depth, IndexTag tag) {
    if (depth > 0 && below(2) == 0) {
      switch (below(3)) {
        case 0:
          return OperatorDesc::poly_of(poly(p, 3), sequence_op(p, depth - 1, tag));
        case 1:
          return OperatorDesc::power(1 + below(3), sequence_op(p, depth - 1, tag));
        default: {
          std::vector<OperatorDesc> parts;
          size_t n = 2 + below(2);
          for (size_t i = 0; i < n; ++i) parts.push_back(sequence_op(p, depth - 1, tag));
          return OperatorDesc::direct_sum(std::move(parts));
        }
      }
    }
    if (tag == IndexTag::Int) return OperatorDesc::two_sided_shift(p, below(2) ? 1 : -1);
    switch (below(4)) {
      case 0:
        return OperatorDesc::right_shift(p);
      case 1:
        return OperatorDesc::left_shift(p);
      case 2: {
        std::vector<FpPoly> blocks;
        size_t n = 1 + below(3);
        for (size_t i = 0; i < n; ++i) blocks.push_back(monic_poly(p, 1 + below(3)));
        RepeatRule rule = below(2) ? RepeatRule::RepeatLast : RepeatRule::GrowLinear;
        return OperatorDesc::block_diag(p, std::move(blocks), rule);
      }
      default: {
        size_t d = 1 + below(4);
        return OperatorDesc::finite_dim(matrix(p, d, d));
      }
    }
  }

  FgGroup group(size_t max_free, size_t max_torsion) {
    size_t fr = below(max_free + 1);
    std::vector<Int> tors;
    static const int64_t mods[] = {2, 3, 4, 5, 6, 8, 9, 12};
    size_t nt = below(max_torsion + 1);
    if (fr == 0 && nt == 0) nt = 1;
    for (size_t i = 0; i < nt; ++i) tors.push_back(mods[below(8)]);
    return FgGroup(fr, std::move(tors));
  }

  // random endomorphism satisfying the torsion compatibility constraints
  FgEndo endo(const FgGroup& g, int64_t entry_range = 5) {
    IntMat m(g.dim(), g.dim());
    for (size_t i = 0; i < g.dim(); ++i)
      for (size_t j = 0; j < g.dim(); ++j) {
        Int di = g.modulus(i), dj = g.modulus(j);
        Int base;
        if (di == 0)
          base = (dj == 0) ? 1 : 0;  // torsion cannot map into a free coordinate
        else
          base = di / gcd(di, dj == 0 ? di : dj);
        Int r = (int64_t)below((uint64_t)(2 * entry_range + 1)) - entry_range;
        m.at(i, j) = base * r;
        if (di != 0) {
          m.at(i, j) %= di;
          if (m.at(i, j) < 0) m.at(i, j) += di;
        }
      }
    FgEndo f(g, std::move(m));
    f.ensure_valid();
    return f;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace adjent
