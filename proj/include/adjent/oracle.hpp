#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adjent/intlat.hpp"
#include "adjent/operators.hpp"

namespace adjent {

inline const Int kOracleOrderBound = 512;
inline constexpr size_t kOracleWindowBound = 64;

// Fully enumerated finite abelian group. Everything in this header works on
// explicit element lists, so the order bound is load-bearing.
struct ExplicitGroup {
  FgGroup group;
  std::vector<std::vector<Int>> elements;  // canonical coordinates, odometer order

  explicit ExplicitGroup(FgGroup g) : group(std::move(g)) {
    if (group.free_rank != 0)
      throw std::invalid_argument("explicit enumeration needs a finite group");
    if (group.order() > kOracleOrderBound)
      throw std::invalid_argument("group order exceeds the oracle bound");
    size_t d = group.dim();
    std::vector<Int> cur(d, 0);
    while (true) {
      elements.push_back(cur);
      size_t i = 0;
      while (i < d && ++cur[i] == group.torsion[i]) cur[i++] = 0;
      if (i == d) break;
    }
  }
};

namespace detail {

inline std::set<std::vector<Int>> element_closure(const FgGroup& g,
                                                  std::vector<std::vector<Int>> gens) {
  std::vector<Int> zero(g.dim(), 0);
  for (auto& x : gens) g.reduce(x);
  std::set<std::vector<Int>> seen{zero};
  std::vector<std::vector<Int>> frontier{zero};
  while (!frontier.empty()) {
    std::vector<std::vector<Int>> next;
    for (const auto& x : frontier)
      for (const auto& gen : gens) {
        auto y = g.add(x, gen);
        if (seen.insert(y).second) next.push_back(y);
      }
    frontier = std::move(next);
  }
  return seen;
}

}  // namespace detail

struct ExplicitSubgroup {
  std::vector<std::vector<Int>> generators;
  std::vector<std::vector<Int>> elements;  // sorted
};

// Every subgroup, found by closing each known subgroup with each group element
// until nothing new appears.
inline std::vector<ExplicitSubgroup> enumerate_subgroups(const FgGroup& g) {
  ExplicitGroup eg(g);
  std::map<std::set<std::vector<Int>>, std::vector<std::vector<Int>>> found;
  std::vector<Int> zero(g.dim(), 0);
  found.emplace(std::set<std::vector<Int>>{zero}, std::vector<std::vector<Int>>{});
  std::vector<std::pair<std::set<std::vector<Int>>, std::vector<std::vector<Int>>>> work(
      found.begin(), found.end());
  while (!work.empty()) {
    auto [els, gens] = std::move(work.back());
    work.pop_back();
    for (const auto& x : eg.elements) {
      if (els.count(x)) continue;
      auto wider = gens;
      wider.push_back(x);
      auto closed = detail::element_closure(g, wider);
      if (found.emplace(closed, wider).second) work.emplace_back(closed, std::move(wider));
    }
  }
  std::vector<ExplicitSubgroup> out;
  for (auto& [els, gens] : found)
    out.push_back({gens, std::vector<std::vector<Int>>(els.begin(), els.end())});
  return out;
}

// |C_n| for n = 1..n_max by literal element sets: B_1 = N, B_{k+1} = N ∩ φ⁻¹B_k,
// C_n = G/B_n.
inline std::vector<Int> brute_cotrajectory(const FgGroup& g, const IntMat& phi,
                                           const std::vector<std::vector<Int>>& n_gens,
                                           size_t n_max) {
  ExplicitGroup eg(g);
  FgEndo f(g, phi);
  f.ensure_valid();
  auto n_set = detail::element_closure(g, n_gens);
  Int order = g.order();
  std::set<std::vector<Int>> b = n_set;
  std::vector<Int> counts;
  for (size_t step = 0; step < n_max; ++step) {
    counts.push_back(order / Int(b.size()));
    std::set<std::vector<Int>> next;
    for (const auto& x : n_set)
      if (b.count(f.apply(x))) next.insert(x);
    b = std::move(next);
  }
  return counts;
}

namespace detail {

// plain Gaussian elimination over F_p on dense rows; returns the rank
inline size_t dense_rank(uint32_t p, std::vector<std::vector<uint32_t>> rows) {
  size_t rank = 0;
  size_t cols = rows.empty() ? 0 : rows[0].size();
  for (size_t c = 0; c < cols && rank < rows.size(); ++c) {
    size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][c] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    uint64_t inv = 1, base = rows[rank][c];
    for (uint64_t e = p - 2; e; e >>= 1, base = base * base % p)
      if (e & 1) inv = inv * base % p;
    for (size_t j = c; j < cols; ++j)
      rows[rank][j] = (uint32_t)((uint64_t)rows[rank][j] * inv % p);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][c] == 0) continue;
      uint64_t m = p - rows[r][c];
      for (size_t j = c; j < cols; ++j)
        rows[r][j] = (uint32_t)((rows[r][j] + m * rows[rank][j]) % p);
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

// |C_n| inside the length-d truncation of the sequence space. Functional rows
// are transported one pullback at a time and every index is checked against
// the window, so a truncated answer can never silently diverge from the true
// one: out-of-window support raises instead.
inline std::vector<Int> truncated_shift_probe(const OperatorDesc& op,
                                              const std::vector<FpVec>& rows, size_t d,
                                              size_t n_max) {
  ensure_valid(op);
  if (!is_fp_kind(op))
    throw std::invalid_argument("the truncation oracle needs a sequence operator");
  if (d == 0 || d > kOracleWindowBound)
    throw std::invalid_argument("window size exceeds the oracle bound");
  IndexTag tag = index_tag(op);
  int64_t lo = tag == IndexTag::Int ? -(int64_t)(d / 2) : 0;
  int64_t hi = lo + (int64_t)d - 1;
  auto to_slots = [&](const FpVec& v) {
    std::vector<uint32_t> dense(d, 0);
    for (const auto& [i, c] : v.terms()) {
      if (i < lo || i > hi) throw std::domain_error("support left the probe window");
      if (!in_window(op, i)) throw std::domain_error("support left the operator window");
      dense[(size_t)(i - lo)] = c;
    }
    return dense;
  };
  if (rows.empty()) throw std::invalid_argument("the probe needs at least one row");
  std::vector<std::vector<uint32_t>> accum;
  std::vector<FpVec> frontier;
  for (const auto& r : rows) {
    if (r.p() != op.p || r.tag() != tag)
      throw std::invalid_argument("row does not live on the operator's sequence space");
    accum.push_back(to_slots(r));
    frontier.push_back(r);
  }
  std::vector<Int> counts;
  for (size_t n = 0; n < n_max; ++n) {
    size_t rank = detail::dense_rank(op.p, accum);
    Int c = 1;
    for (size_t i = 0; i < rank; ++i) c *= op.p;
    counts.push_back(c);
    for (auto& v : frontier) {
      v = pullback(op, v);
      accum.push_back(to_slots(v));
    }
  }
  return counts;
}

}  // namespace adjent
