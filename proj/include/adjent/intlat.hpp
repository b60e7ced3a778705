#pragma once

// Exact integer lattice arithmetic for finitely generated abelian groups:
// Hermite/Smith normal forms, subgroup lattices, preimages, intersections,
// quotient and restricted endomorphisms. Entries are arbitrary precision.

#include <boost/multiprecision/cpp_int.hpp>

#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adjent/fp.hpp"

namespace adjent {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int floor_div(const Int& a, const Int& b) {
  Int q = a / b;
  if (q * b != a && ((a < 0) != (b < 0))) --q;
  return q;
}

// g = gcd(a,b) >= 0 with s*a + t*b = g
inline Int xgcd(const Int& a, const Int& b, Int& s, Int& t) {
  Int r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    Int q = r0 / r1;
    r0 -= q * r1; std::swap(r0, r1);
    s0 -= q * s1; std::swap(s0, s1);
    t0 -= q * t1; std::swap(t0, t1);
  }
  if (r0 < 0) { r0 = -r0; s0 = -s0; t0 = -t0; }
  s = s0; t = t0;
  return r0;
}

class IntMat {
 public:
  IntMat() = default;
  IntMat(size_t rows, size_t cols) : rows_(rows), cols_(cols), e_(rows * cols, 0) {}
  static IntMat identity(size_t n) {
    IntMat m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }
  static IntMat from_rows(const std::vector<std::vector<Int>>& rows) {
    size_t c = rows.empty() ? 0 : rows[0].size();
    IntMat m(rows.size(), c);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != c) throw std::invalid_argument("ragged matrix rows");
      for (size_t j = 0; j < c; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  Int& at(size_t i, size_t j) { return e_[check(i, j)]; }
  const Int& at(size_t i, size_t j) const { return e_[check(i, j)]; }

  IntMat operator*(const IntMat& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matrix product shape mismatch");
    IntMat r(rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t k = 0; k < cols_; ++k) {
        const Int& a = at(i, k);
        if (a == 0) continue;
        for (size_t j = 0; j < o.cols_; ++j) r.at(i, j) += a * o.at(k, j);
      }
    return r;
  }
  IntMat operator+(const IntMat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix sum shape mismatch");
    IntMat r = *this;
    for (size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
    return r;
  }
  IntMat transpose() const {
    IntMat r(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }
  std::vector<Int> mul_vec(const std::vector<Int>& x) const {
    if (x.size() != cols_) throw std::invalid_argument("matrix-vector shape mismatch");
    std::vector<Int> y(rows_, 0);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) y[i] += at(i, j) * x[j];
    return y;
  }
  IntMat pow(uint64_t e) const {
    if (rows_ != cols_) throw std::invalid_argument("power of non-square matrix");
    IntMat r = identity(rows_), b = *this;
    while (e) {
      if (e & 1) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }
  std::vector<Int> col(size_t j) const {
    std::vector<Int> v(rows_);
    for (size_t i = 0; i < rows_; ++i) v[i] = at(i, j);
    return v;
  }
  static IntMat hcat(const IntMat& a, const IntMat& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("hcat row mismatch");
    IntMat r(a.rows(), a.cols() + b.cols());
    for (size_t i = 0; i < a.rows(); ++i) {
      for (size_t j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j);
      for (size_t j = 0; j < b.cols(); ++j) r.at(i, a.cols() + j) = b.at(i, j);
    }
    return r;
  }
  IntMat negated() const {
    IntMat r = *this;
    for (auto& v : r.e_) v = -v;
    return r;
  }
  bool is_zero() const {
    for (const auto& v : e_)
      if (v != 0) return false;
    return true;
  }

  friend bool operator==(const IntMat& a, const IntMat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
  }
  friend bool operator!=(const IntMat& a, const IntMat& b) { return !(a == b); }

 private:
  size_t check(size_t i, size_t j) const {
    if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index out of range");
    return i * cols_ + j;
  }
  size_t rows_ = 0, cols_ = 0;
  std::vector<Int> e_;
};

struct RowHnf {
  IntMat h;            // row echelon, pivots positive, entries above pivots reduced
  IntMat u;            // unimodular with u * input = h
  size_t rank = 0;
  std::vector<size_t> pivot_cols;  // one per nonzero row
};

inline RowHnf row_hnf(const IntMat& a_in) {
  IntMat a = a_in;
  IntMat u = IntMat::identity(a.rows());
  size_t row = 0;
  std::vector<size_t> pivots;
  auto row_combine = [&](IntMat& m, size_t r1, size_t r2, const Int& x11, const Int& x12,
                         const Int& x21, const Int& x22) {
    for (size_t j = 0; j < m.cols(); ++j) {
      Int v1 = x11 * m.at(r1, j) + x12 * m.at(r2, j);
      Int v2 = x21 * m.at(r1, j) + x22 * m.at(r2, j);
      m.at(r1, j) = std::move(v1);
      m.at(r2, j) = std::move(v2);
    }
  };
  for (size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
    size_t sel = row;
    while (sel < a.rows() && a.at(sel, col) == 0) ++sel;
    if (sel == a.rows()) continue;
    // smallest pivot first keeps intermediate entries modest
    for (size_t i = sel + 1; i < a.rows(); ++i)
      if (a.at(i, col) != 0 && abs(a.at(i, col)) < abs(a.at(sel, col))) sel = i;
    if (sel != row) {
      for (size_t j = 0; j < a.cols(); ++j) std::swap(a.at(row, j), a.at(sel, j));
      for (size_t j = 0; j < u.cols(); ++j) std::swap(u.at(row, j), u.at(sel, j));
    }
    for (size_t i = row + 1; i < a.rows(); ++i) {
      if (a.at(i, col) == 0) continue;
      Int s, t;
      Int g = xgcd(a.at(row, col), a.at(i, col), s, t);
      Int x = a.at(row, col) / g, y = a.at(i, col) / g;
      row_combine(a, row, i, s, t, -y, x);
      row_combine(u, row, i, s, t, -y, x);
    }
    if (a.at(row, col) < 0) {
      for (size_t j = 0; j < a.cols(); ++j) a.at(row, j) = -a.at(row, j);
      for (size_t j = 0; j < u.cols(); ++j) u.at(row, j) = -u.at(row, j);
    }
    for (size_t i = 0; i < row; ++i) {
      Int q = floor_div(a.at(i, col), a.at(row, col));
      if (q == 0) continue;
      for (size_t j = 0; j < a.cols(); ++j) a.at(i, j) -= q * a.at(row, j);
      for (size_t j = 0; j < u.cols(); ++j) u.at(i, j) -= q * u.at(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return {std::move(a), std::move(u), row, std::move(pivots)};
}

struct ColHnf {
  IntMat h;                        // dim x rank, canonical column echelon
  std::vector<size_t> pivot_rows;  // strictly increasing, one per column
};

// canonical generating matrix of the column span (zero columns dropped)
inline ColHnf col_hnf(const IntMat& cols) {
  RowHnf rh = row_hnf(cols.transpose());
  IntMat h(cols.rows(), rh.rank);
  for (size_t i = 0; i < rh.rank; ++i)
    for (size_t j = 0; j < cols.rows(); ++j) h.at(j, i) = rh.h.at(i, j);
  return {std::move(h), rh.pivot_cols};
}

// basis of the integer solution lattice {x : a x = 0}, as columns
inline IntMat int_kernel(const IntMat& a) {
  RowHnf rh = row_hnf(a.transpose());
  size_t n = a.cols();
  IntMat k(n, n - rh.rank);
  for (size_t i = rh.rank; i < n; ++i)
    for (size_t j = 0; j < n; ++j) k.at(j, i - rh.rank) = rh.u.at(i, j);
  return k;
}

struct SnfResult {
  std::vector<Int> d;  // invariant factors, ascending divisibility, zeros trailing
  IntMat u, v;         // unimodular, u * input * v = diag(d)
};

inline SnfResult smith_normal_form(const IntMat& a_in) {
  IntMat a = a_in;
  size_t r = a.rows(), c = a.cols();
  IntMat u = IntMat::identity(r), v = IntMat::identity(c);
  size_t t = 0;
  auto swap_rows = [&](size_t i, size_t j) {
    if (i == j) return;
    for (size_t k = 0; k < c; ++k) std::swap(a.at(i, k), a.at(j, k));
    for (size_t k = 0; k < r; ++k) std::swap(u.at(i, k), u.at(j, k));
  };
  auto swap_cols = [&](size_t i, size_t j) {
    if (i == j) return;
    for (size_t k = 0; k < r; ++k) std::swap(a.at(k, i), a.at(k, j));
    for (size_t k = 0; k < c; ++k) std::swap(v.at(k, i), v.at(k, j));
  };
  while (t < std::min(r, c)) {
    size_t pi = t, pj = t;
    bool found = false;
    for (size_t i = t; i < r; ++i)
      for (size_t j = t; j < c; ++j)
        if (a.at(i, j) != 0 &&
            (!found || abs(a.at(i, j)) < abs(a.at(pi, pj)))) {
          pi = i; pj = j; found = true;
        }
    if (!found) break;
    swap_rows(t, pi);
    swap_cols(t, pj);
    for (bool dirty = true; dirty;) {
      dirty = false;
      for (size_t i = t + 1; i < r; ++i) {
        if (a.at(i, t) == 0) continue;
        if (a.at(i, t) % a.at(t, t) == 0) {
          Int q = a.at(i, t) / a.at(t, t);
          for (size_t k = 0; k < c; ++k) a.at(i, k) -= q * a.at(t, k);
          for (size_t k = 0; k < r; ++k) u.at(i, k) -= q * u.at(t, k);
        } else {
          Int s, tt;
          Int g = xgcd(a.at(t, t), a.at(i, t), s, tt);
          Int x = a.at(t, t) / g, y = a.at(i, t) / g;
          for (size_t k = 0; k < c; ++k) {
            Int v1 = s * a.at(t, k) + tt * a.at(i, k);
            Int v2 = -y * a.at(t, k) + x * a.at(i, k);
            a.at(t, k) = std::move(v1);
            a.at(i, k) = std::move(v2);
          }
          for (size_t k = 0; k < r; ++k) {
            Int v1 = s * u.at(t, k) + tt * u.at(i, k);
            Int v2 = -y * u.at(t, k) + x * u.at(i, k);
            u.at(t, k) = std::move(v1);
            u.at(i, k) = std::move(v2);
          }
          dirty = true;
        }
      }
      for (size_t j = t + 1; j < c; ++j) {
        if (a.at(t, j) == 0) continue;
        if (a.at(t, j) % a.at(t, t) == 0) {
          Int q = a.at(t, j) / a.at(t, t);
          for (size_t k = 0; k < r; ++k) a.at(k, j) -= q * a.at(k, t);
          for (size_t k = 0; k < c; ++k) v.at(k, j) -= q * v.at(k, t);
          if (a.at(t, j) != 0) dirty = true;
        } else {
          Int s, tt;
          Int g = xgcd(a.at(t, t), a.at(t, j), s, tt);
          Int x = a.at(t, t) / g, y = a.at(t, j) / g;
          for (size_t k = 0; k < r; ++k) {
            Int v1 = s * a.at(k, t) + tt * a.at(k, j);
            Int v2 = -y * a.at(k, t) + x * a.at(k, j);
            a.at(k, t) = std::move(v1);
            a.at(k, j) = std::move(v2);
          }
          for (size_t k = 0; k < c; ++k) {
            Int v1 = s * v.at(k, t) + tt * v.at(k, j);
            Int v2 = -y * v.at(k, t) + x * v.at(k, j);
            v.at(k, t) = std::move(v1);
            v.at(k, j) = std::move(v2);
          }
          dirty = true;
        }
      }
      if (!dirty) {
        // divisibility: pivot must divide every remaining entry
        for (size_t i = t + 1; i < r && !dirty; ++i)
          for (size_t j = t + 1; j < c && !dirty; ++j)
            if (a.at(i, j) % a.at(t, t) != 0) {
              for (size_t k = 0; k < c; ++k) a.at(t, k) += a.at(i, k);
              for (size_t k = 0; k < r; ++k) u.at(t, k) += u.at(i, k);
              dirty = true;
            }
      }
    }
    if (a.at(t, t) < 0) {
      for (size_t k = 0; k < c; ++k) a.at(t, k) = -a.at(t, k);
      for (size_t k = 0; k < r; ++k) u.at(t, k) = -u.at(t, k);
    }
    ++t;
  }
  std::vector<Int> d(std::min(r, c), 0);
  for (size_t i = 0; i < t; ++i) d[i] = a.at(i, i);
  return {std::move(d), std::move(u), std::move(v)};
}

// inverse of an invertible-over-Q matrix as num / den with integral num
struct ScaledInverse {
  IntMat num;
  Int den = 1;
};

inline ScaledInverse rational_inverse(const IntMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("inverse of non-square matrix");
  size_t n = m.rows();
  std::vector<std::vector<Rat>> a(n, std::vector<Rat>(2 * n, 0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) a[i][j] = Rat(m.at(i, j));
    a[i][n + i] = 1;
  }
  size_t row = 0;
  for (size_t col = 0; col < n; ++col) {
    size_t sel = row;
    while (sel < n && a[sel][col] == 0) ++sel;
    if (sel == n) throw std::domain_error("matrix not invertible");
    std::swap(a[sel], a[row]);
    Rat piv = a[row][col];
    for (auto& x : a[row]) x /= piv;
    for (size_t i = 0; i < n; ++i) {
      if (i == row || a[i][col] == 0) continue;
      Rat f = a[i][col];
      for (size_t j = 0; j < 2 * n; ++j) a[i][j] -= f * a[row][j];
    }
    ++row;
  }
  ScaledInverse out;
  out.den = 1;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) out.den = lcm(out.den, denominator(a[i][n + j]));
  out.num = IntMat(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      out.num.at(i, j) = numerator(a[i][n + j]) * (out.den / denominator(a[i][n + j]));
  return out;
}

// exact inverse of a unimodular (or any invertible-over-Z) matrix
inline IntMat int_inverse(const IntMat& m) {
  ScaledInverse si = rational_inverse(m);
  if (si.den != 1) throw std::domain_error("matrix inverse is not integral");
  return si.num;
}

// Finitely generated abelian group Z^free_rank + sum Z/torsion[i], user coordinate
// order preserved; free coordinates come first.
struct FgGroup {
  size_t free_rank = 0;
  std::vector<Int> torsion;

  FgGroup() = default;
  FgGroup(size_t fr, std::vector<Int> tors) : free_rank(fr), torsion(std::move(tors)) {
    for (const auto& d : torsion)
      if (d < 2) throw std::invalid_argument("torsion modulus must be >= 2");
  }
  size_t dim() const { return free_rank + torsion.size(); }
  Int modulus(size_t i) const {
    return i < free_rank ? Int(0) : torsion[i - free_rank];
  }
  bool is_finite() const { return free_rank == 0; }
  Int order() const {
    if (!is_finite()) throw std::domain_error("order of infinite group");
    Int n = 1;
    for (const auto& d : torsion) n *= d;
    return n;
  }
  Int exponent() const {
    if (!is_finite()) throw std::domain_error("exponent of infinite group");
    Int e = 1;
    for (const auto& d : torsion) e = lcm(e, d);
    return e;
  }
  IntMat relation_cols() const {
    IntMat r(dim(), torsion.size());
    for (size_t i = 0; i < torsion.size(); ++i) r.at(free_rank + i, i) = torsion[i];
    return r;
  }
  void reduce(std::vector<Int>& x) const {
    if (x.size() != dim()) throw std::invalid_argument("element dimension mismatch");
    for (size_t i = free_rank; i < x.size(); ++i) {
      const Int& d = torsion[i - free_rank];
      x[i] %= d;
      if (x[i] < 0) x[i] += d;
    }
  }
  std::vector<Int> add(std::vector<Int> a, const std::vector<Int>& b) const {
    if (a.size() != b.size()) throw std::invalid_argument("element dimension mismatch");
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    reduce(a);
    return a;
  }
  friend bool operator==(const FgGroup& a, const FgGroup& b) {
    return a.free_rank == b.free_rank && a.torsion == b.torsion;
  }
  friend bool operator!=(const FgGroup& a, const FgGroup& b) { return !(a == b); }
};

// Endomorphism of an FgGroup in coordinates: x -> m x. The matrix must respect
// the torsion moduli: m[i][j] * modulus(j) = 0 mod modulus(i) (= 0 when modulus(i) = 0).
struct FgEndo {
  FgGroup group;
  IntMat m;

  FgEndo() = default;
  FgEndo(FgGroup g, IntMat mm) : group(std::move(g)), m(std::move(mm)) {}

  std::vector<std::string> validate() const {
    std::vector<std::string> issues;
    if (m.rows() != group.dim() || m.cols() != group.dim()) {
      issues.push_back("matrix shape " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + " does not match group dimension " +
                       std::to_string(group.dim()));
      return issues;
    }
    for (size_t i = 0; i < group.dim(); ++i)
      for (size_t j = 0; j < group.dim(); ++j) {
        Int lhs = m.at(i, j) * group.modulus(j);
        Int di = group.modulus(i);
        bool ok = (di == 0) ? (lhs == 0) : (lhs % di == 0);
        if (!ok)
          issues.push_back("entry (" + std::to_string(i) + "," + std::to_string(j) +
                           ") maps an order-" + group.modulus(j).str() +
                           " generator outside the target coordinate's torsion");
      }
    return issues;
  }
  void ensure_valid() const {
    auto issues = validate();
    if (!issues.empty()) throw std::invalid_argument("invalid endomorphism: " + issues[0]);
  }
  std::vector<Int> apply(std::vector<Int> x) const {
    auto y = m.mul_vec(x);
    group.reduce(y);
    return y;
  }
  FgEndo compose(const FgEndo& o) const {
    if (group != o.group) throw std::invalid_argument("composition over different groups");
    return FgEndo(group, m * o.m);
  }
  FgEndo power(uint64_t k) const { return FgEndo(group, m.pow(k)); }
};

// Subgroup of an FgGroup as the full-preimage lattice in Z^dim, canonical column HNF.
// Always contains the relation lattice.
class LatticeSub {
 public:
  LatticeSub() = default;

  static LatticeSub from_columns(const FgGroup& g, const IntMat& cols) {
    if (cols.rows() != g.dim() && !(cols.rows() == 0 && g.dim() == 0))
      throw std::invalid_argument("column dimension does not match group");
    LatticeSub s;
    s.g_ = g;
    IntMat all = IntMat::hcat(cols, g.relation_cols());
    ColHnf ch = col_hnf(all);
    s.h_ = std::move(ch.h);
    s.pivot_rows_ = std::move(ch.pivot_rows);
    return s;
  }
  static LatticeSub whole(const FgGroup& g) {
    return from_columns(g, IntMat::identity(g.dim()));
  }
  // m Z^dim + relations
  static LatticeSub scaled(const FgGroup& g, const Int& m) {
    IntMat c = IntMat::identity(g.dim());
    for (size_t i = 0; i < g.dim(); ++i) c.at(i, i) = m;
    return from_columns(g, c);
  }

  const FgGroup& ambient() const { return g_; }
  const IntMat& basis() const { return h_; }

  bool contains(std::vector<Int> x) const {
    if (x.size() != g_.dim()) throw std::invalid_argument("element dimension mismatch");
    for (size_t j = 0; j < h_.cols(); ++j) {
      size_t pr = pivot_rows_[j];
      if (x[pr] % h_.at(pr, j) != 0) return false;
      Int c = x[pr] / h_.at(pr, j);
      if (c != 0)
        for (size_t i = 0; i < x.size(); ++i) x[i] -= c * h_.at(i, j);
    }
    for (const auto& v : x)
      if (v != 0) return false;
    return true;
  }
  bool contains(const LatticeSub& other) const {
    if (g_ != other.g_) throw std::invalid_argument("subgroups of different groups");
    for (size_t j = 0; j < other.h_.cols(); ++j)
      if (!contains(other.h_.col(j))) return false;
    return true;
  }

  // [G : N]; nullopt when infinite
  std::optional<Int> index() const {
    if (h_.cols() < g_.dim()) return std::nullopt;
    Int idx = 1;
    for (size_t j = 0; j < h_.cols(); ++j) idx *= h_.at(pivot_rows_[j], j);
    return idx;
  }

  friend bool operator==(const LatticeSub& a, const LatticeSub& b) {
    return a.g_ == b.g_ && a.h_ == b.h_;
  }
  friend bool operator!=(const LatticeSub& a, const LatticeSub& b) { return !(a == b); }

 private:
  FgGroup g_;
  IntMat h_;
  std::vector<size_t> pivot_rows_;
};

// {x : f(x) in n}
inline LatticeSub preimage(const FgEndo& f, const LatticeSub& n) {
  if (f.group != n.ambient()) throw std::invalid_argument("preimage over different groups");
  IntMat stacked = IntMat::hcat(f.m, n.basis().negated());
  IntMat k = int_kernel(stacked);
  IntMat xpart(f.group.dim(), k.cols());
  for (size_t i = 0; i < f.group.dim(); ++i)
    for (size_t j = 0; j < k.cols(); ++j) xpart.at(i, j) = k.at(i, j);
  return LatticeSub::from_columns(f.group, xpart);
}

// f(n) as a subgroup (span of images plus relations)
inline LatticeSub image(const FgEndo& f, const LatticeSub& n) {
  if (f.group != n.ambient()) throw std::invalid_argument("image over different groups");
  return LatticeSub::from_columns(f.group, f.m * n.basis());
}

inline LatticeSub intersect(const LatticeSub& a, const LatticeSub& b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("intersection of subgroups of different groups");
  IntMat stacked = IntMat::hcat(a.basis(), b.basis().negated());
  IntMat k = int_kernel(stacked);
  IntMat upart(a.basis().cols(), k.cols());
  for (size_t i = 0; i < a.basis().cols(); ++i)
    for (size_t j = 0; j < k.cols(); ++j) upart.at(i, j) = k.at(i, j);
  return LatticeSub::from_columns(a.ambient(), a.basis() * upart);
}

inline LatticeSub sum(const LatticeSub& a, const LatticeSub& b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("sum of subgroups of different groups");
  return LatticeSub::from_columns(a.ambient(), IntMat::hcat(a.basis(), b.basis()));
}

// Ambient group descriptor for narrowness decisions.
struct GroupDesc {
  enum Kind { FinitelyGenerated, DivisibleMarker, FpSequence, Unknown } kind = Unknown;
  FgGroup fg;
  uint32_t p = 0;
};

struct NarrowDecision {
  bool narrow = false;
  std::string reason;
};

// narrow: G/pG finite for every prime p
inline NarrowDecision narrow_test(const GroupDesc& g) {
  switch (g.kind) {
    case GroupDesc::FinitelyGenerated:
      return {true, "finitely generated: G/pG is finite for every prime"};
    case GroupDesc::DivisibleMarker:
      return {true, "divisible: pG = G, so G/pG is trivial for every prime"};
    case GroupDesc::FpSequence:
      return {false, "infinite direct sum of F_p lines: G/pG is infinite for p = " +
                         std::to_string(g.p)};
    default:
      throw std::invalid_argument("narrowness undecidable for this group descriptor");
  }
}

// Induced matrix of f on G/pG, with the list of surviving coordinates.
inline std::pair<FpMat, std::vector<size_t>> reduce_mod_p(const FgEndo& f, uint32_t p) {
  require_prime(p);
  std::vector<size_t> kept;
  for (size_t i = 0; i < f.group.dim(); ++i)
    if (f.group.modulus(i) % p == 0) kept.push_back(i);  // modulus 0 counts: Z/pZ survives
  FpMat m(p, kept.size(), kept.size());
  for (size_t a = 0; a < kept.size(); ++a)
    for (size_t b = 0; b < kept.size(); ++b) {
      Int v = f.m.at(kept[a], kept[b]) % p;
      if (v < 0) v += p;
      m.set(a, b, (uint32_t)v.convert_to<uint64_t>());
    }
  return {std::move(m), std::move(kept)};
}

// Presentation of Z^dim / <rel_cols> with unit factors dropped and
// free coordinates first: new coords = (u x) restricted to kept.
struct Presentation {
  FgGroup group;
  IntMat u, uinv;            // full dim x dim transforms
  std::vector<size_t> kept;  // rows of u that survive, free first then torsion
  std::vector<Int> diag;     // SNF diagonal per original coordinate (0 = free)

  std::vector<Int> map_element(const std::vector<Int>& x) const {
    auto y = u.mul_vec(x);
    std::vector<Int> out(kept.size());
    for (size_t i = 0; i < kept.size(); ++i) out[i] = y[kept[i]];
    group.reduce(out);
    return out;
  }
  LatticeSub map_cols(const IntMat& cols_in) const {
    IntMat cols = u * cols_in;
    IntMat proj(kept.size(), cols.cols());
    for (size_t i = 0; i < kept.size(); ++i)
      for (size_t j = 0; j < cols.cols(); ++j) proj.at(i, j) = cols.at(kept[i], j);
    return LatticeSub::from_columns(group, proj);
  }
  LatticeSub map_sub(const LatticeSub& s) const { return map_cols(s.basis()); }
};

inline Presentation present_quotient(size_t dim, const IntMat& rel_cols) {
  SnfResult s = smith_normal_form(rel_cols);
  std::vector<Int> diag(dim, 0);
  for (size_t i = 0; i < s.d.size() && i < dim; ++i) diag[i] = s.d[i];
  Presentation pres;
  pres.u = std::move(s.u);
  pres.uinv = int_inverse(pres.u);
  pres.diag = diag;
  std::vector<Int> tors;
  for (size_t i = 0; i < dim; ++i)
    if (diag[i] == 0) pres.kept.push_back(i);
  size_t nfree = pres.kept.size();
  for (size_t i = 0; i < dim; ++i)
    if (diag[i] >= 2) {
      pres.kept.push_back(i);
      tors.push_back(diag[i]);
    }
  pres.group = FgGroup(nfree, std::move(tors));
  return pres;
}

// G/H together with the induced endomorphism, for f-invariant H.
struct QuotientEndo {
  FgEndo endo;
  Presentation pres;
};

inline QuotientEndo quotient_endo(const FgEndo& f, const LatticeSub& h) {
  if (f.group != h.ambient()) throw std::invalid_argument("quotient over different groups");
  if (!h.contains(image(f, h)))
    throw std::invalid_argument("subgroup is not invariant under the endomorphism");
  size_t dim = f.group.dim();
  Presentation pres = present_quotient(dim, h.basis());
  IntMat full = pres.u * f.m * pres.uinv;
  IntMat mq(pres.kept.size(), pres.kept.size());
  for (size_t a = 0; a < pres.kept.size(); ++a)
    for (size_t b = 0; b < pres.kept.size(); ++b) {
      Int v = full.at(pres.kept[a], pres.kept[b]);
      Int da = pres.group.modulus(a);
      if (da != 0) {
        v %= da;
        if (v < 0) v += da;
      }
      mq.at(a, b) = v;
    }
  FgEndo endo(pres.group, std::move(mq));
  endo.ensure_valid();
  return {std::move(endo), std::move(pres)};
}

// H itself as an abstract group with the restricted endomorphism, for
// f-invariant H of finite index. map_sub sends subgroups of G contained in H
// into the new presentation.
struct RestrictedEndo {
  FgEndo endo;
  IntMat b, binv_num;  // x = b z; binv_num / binv_den = b^{-1}
  Int binv_den = 1;
  Presentation pres;

  LatticeSub map_sub(const LatticeSub& s) const {
    IntMat cols = binv_num * s.basis();
    for (size_t i = 0; i < cols.rows(); ++i)
      for (size_t j = 0; j < cols.cols(); ++j) {
        if (cols.at(i, j) % binv_den != 0)
          throw std::invalid_argument("subgroup is not contained in the restriction domain");
        cols.at(i, j) /= binv_den;
      }
    return pres.map_cols(cols);
  }
};

inline RestrictedEndo restrict_endo(const FgEndo& f, const LatticeSub& h) {
  if (f.group != h.ambient()) throw std::invalid_argument("restriction over different groups");
  if (!h.index().has_value())
    throw std::invalid_argument("restriction requires a finite-index subgroup");
  if (!h.contains(image(f, h)))
    throw std::invalid_argument("subgroup is not invariant under the endomorphism");
  size_t dim = f.group.dim();
  RestrictedEndo r;
  r.b = h.basis();  // square, full rank
  ScaledInverse si = rational_inverse(r.b);
  r.binv_num = std::move(si.num);
  r.binv_den = std::move(si.den);
  // restricted matrix in z coordinates: b^{-1} m b, integral by invariance
  IntMat mb = f.m * r.b;
  IntMat mz = r.binv_num * mb;
  for (size_t i = 0; i < dim; ++i)
    for (size_t j = 0; j < dim; ++j) {
      if (mz.at(i, j) % r.binv_den != 0)
        throw std::logic_error("restriction matrix not integral");
      mz.at(i, j) /= r.binv_den;
    }
  // relations of H in z coordinates: b z in rel-lattice
  IntMat relz = r.binv_num * f.group.relation_cols();
  for (size_t i = 0; i < relz.rows(); ++i)
    for (size_t j = 0; j < relz.cols(); ++j) {
      if (relz.at(i, j) % r.binv_den != 0)
        throw std::logic_error("relation lattice not contained in restriction domain");
      relz.at(i, j) /= r.binv_den;
    }
  r.pres = present_quotient(dim, relz);
  IntMat full = r.pres.u * mz * r.pres.uinv;
  IntMat mh(r.pres.kept.size(), r.pres.kept.size());
  for (size_t a = 0; a < r.pres.kept.size(); ++a)
    for (size_t b2 = 0; b2 < r.pres.kept.size(); ++b2) {
      Int v = full.at(r.pres.kept[a], r.pres.kept[b2]);
      Int da = r.pres.group.modulus(a);
      if (da != 0) {
        v %= da;
        if (v < 0) v += da;
      }
      mh.at(a, b2) = v;
    }
  r.endo = FgEndo(r.pres.group, std::move(mh));
  r.endo.ensure_valid();
  return r;
}

// order of the subgroup generated by torsion elements (all free coordinates zero)
inline Int finite_subgroup_order(const FgGroup& g, const std::vector<std::vector<Int>>& gens) {
  for (const auto& x : gens) {
    if (x.size() != g.dim()) throw std::invalid_argument("generator dimension mismatch");
    for (size_t i = 0; i < g.free_rank; ++i)
      if (x[i] != 0)
        throw std::invalid_argument("generator of infinite order in a finite subgroup");
  }
  size_t s = g.torsion.size();
  IntMat cols(s, gens.size() + s);
  for (size_t j = 0; j < gens.size(); ++j)
    for (size_t i = 0; i < s; ++i) cols.at(i, j) = gens[j][g.free_rank + i];
  for (size_t i = 0; i < s; ++i) cols.at(i, gens.size() + i) = g.torsion[i];
  ColHnf ch = col_hnf(cols);
  Int idx = 1;  // [Z^s : L]
  if (ch.h.cols() < s) throw std::logic_error("torsion lattice lost full rank");
  for (size_t j = 0; j < ch.h.cols(); ++j) idx *= ch.h.at(ch.pivot_rows[j], j);
  Int total = 1;
  for (const auto& d : g.torsion) total *= d;
  return total / idx;
}

}  // namespace adjent
