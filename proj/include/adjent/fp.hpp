#pragma once

// Exact linear algebra over prime fields F_p, p < 2^31.
// GF(2) matrices are bit-packed; other primes use Barrett-reduced 32-bit words.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adjent {

inline bool is_prime_u32(uint32_t n) {
  if (n < 2) return false;
  for (uint32_t d = 2; (uint64_t)d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline void require_prime(uint32_t p) {
  if (!is_prime_u32(p))
    throw std::invalid_argument("p must be prime, got " + std::to_string(p));
}

// Barrett reduction: r = x mod p for any 64-bit x, p < 2^31.
struct Barrett {
  uint64_t p = 0;
  uint64_t magic = 0;  // floor(2^64 / p)

  Barrett() = default;
  explicit Barrett(uint64_t prime)
      : p(prime), magic(prime ? (uint64_t)(((unsigned __int128)1 << 64) / prime) : 0) {}

  uint64_t reduce(uint64_t x) const {
    // q underestimates x/p by at most 2, so the correction loop is short
    uint64_t q = (uint64_t)(((unsigned __int128)x * magic) >> 64);
    uint64_t r = x - q * p;
    while (r >= p) r -= p;
    return r;
  }
  uint64_t mul(uint64_t a, uint64_t b) const { return reduce(a * b); }
  uint64_t add(uint64_t a, uint64_t b) const {
    uint64_t s = a + b;
    return s >= p ? s - p : s;
  }
  uint64_t sub(uint64_t a, uint64_t b) const { return a >= b ? a - b : a + p - b; }
  uint64_t neg(uint64_t a) const { return a ? p - a : 0; }
  uint64_t pow(uint64_t a, uint64_t e) const {
    uint64_t r = 1 % p;
    a = reduce(a);
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  // p prime, a != 0 mod p
  uint64_t inv(uint64_t a) const {
    a = reduce(a);
    if (a == 0) throw std::domain_error("inverse of zero mod p");
    return pow(a, p - 2);
  }
};

// Dense polynomial over F_p, coefficients ascending. Zero polynomial has empty coeffs.
class FpPoly {
 public:
  FpPoly() = default;
  explicit FpPoly(uint32_t p) : p_(p) { require_prime(p); }
  FpPoly(uint32_t p, std::vector<uint32_t> coeffs) : p_(p), c_(std::move(coeffs)) {
    require_prime(p);
    for (auto& v : c_) v %= p_;
    trim();
  }

  static FpPoly zero(uint32_t p) { return FpPoly(p); }
  static FpPoly constant(uint32_t p, uint32_t c) { return FpPoly(p, {c}); }
  static FpPoly one(uint32_t p) { return constant(p, 1); }
  static FpPoly monomial(uint32_t p, size_t k, uint32_t c = 1) {
    std::vector<uint32_t> v(k + 1, 0);
    v[k] = c;
    return FpPoly(p, std::move(v));
  }

  uint32_t p() const { return p_; }
  bool is_zero() const { return c_.empty(); }
  // degree of the zero polynomial is -1
  long degree() const { return (long)c_.size() - 1; }
  uint32_t coeff(size_t k) const { return k < c_.size() ? c_[k] : 0; }
  const std::vector<uint32_t>& coeffs() const { return c_; }
  uint32_t lead() const {
    if (is_zero()) throw std::domain_error("lead of zero polynomial");
    return c_.back();
  }
  bool is_monic() const { return !is_zero() && c_.back() == 1; }

  friend bool operator==(const FpPoly& a, const FpPoly& b) {
    return a.p_ == b.p_ && a.c_ == b.c_;
  }
  friend bool operator!=(const FpPoly& a, const FpPoly& b) { return !(a == b); }

  FpPoly operator+(const FpPoly& o) const {
    check_same(o);
    std::vector<uint32_t> r(std::max(c_.size(), o.c_.size()), 0);
    for (size_t i = 0; i < r.size(); ++i)
      r[i] = (uint32_t)(((uint64_t)coeff(i) + o.coeff(i)) % p_);
    return FpPoly(p_, std::move(r));
  }
  FpPoly operator-(const FpPoly& o) const {
    check_same(o);
    std::vector<uint32_t> r(std::max(c_.size(), o.c_.size()), 0);
    for (size_t i = 0; i < r.size(); ++i)
      r[i] = (uint32_t)(((uint64_t)coeff(i) + p_ - o.coeff(i)) % p_);
    return FpPoly(p_, std::move(r));
  }
  FpPoly operator*(const FpPoly& o) const {
    check_same(o);
    if (is_zero() || o.is_zero()) return zero(p_);
    Barrett br(p_);
    std::vector<uint32_t> r(c_.size() + o.c_.size() - 1, 0);
    for (size_t i = 0; i < c_.size(); ++i) {
      if (!c_[i]) continue;
      for (size_t j = 0; j < o.c_.size(); ++j)
        r[i + j] = (uint32_t)br.reduce(r[i + j] + (uint64_t)c_[i] * o.c_[j]);
    }
    return FpPoly(p_, std::move(r));
  }
  FpPoly scaled(uint32_t s) const {
    Barrett br(p_);
    std::vector<uint32_t> r(c_);
    for (auto& v : r) v = (uint32_t)br.mul(v, s);
    return FpPoly(p_, std::move(r));
  }

  // division with remainder by a nonzero divisor
  std::pair<FpPoly, FpPoly> divmod(const FpPoly& d) const {
    check_same(d);
    if (d.is_zero()) throw std::domain_error("polynomial division by zero");
    Barrett br(p_);
    uint64_t li = br.inv(d.lead());
    std::vector<uint32_t> rem(c_);
    long dd = d.degree();
    if ((long)rem.size() - 1 < dd) return {zero(p_), *this};
    std::vector<uint32_t> q(rem.size() - dd, 0);
    for (long k = (long)rem.size() - 1; k >= dd; --k) {
      if (!rem[k]) continue;
      uint32_t f = (uint32_t)br.mul(rem[k], li);
      q[k - dd] = f;
      for (long j = 0; j <= dd; ++j)
        rem[k - dd + j] =
            (uint32_t)br.sub(rem[k - dd + j], br.mul(f, d.coeff(j)));
    }
    return {FpPoly(p_, std::move(q)), FpPoly(p_, std::move(rem))};
  }
  FpPoly operator%(const FpPoly& d) const { return divmod(d).second; }
  FpPoly operator/(const FpPoly& d) const { return divmod(d).first; }

  FpPoly make_monic() const {
    if (is_zero()) return *this;
    return scaled((uint32_t)Barrett(p_).inv(lead()));
  }

  static FpPoly gcd(FpPoly a, FpPoly b) {
    while (!b.is_zero()) {
      FpPoly r = a % b;
      a = std::move(b);
      b = std::move(r);
    }
    return a.make_monic();
  }
  static FpPoly lcm(const FpPoly& a, const FpPoly& b) {
    if (a.is_zero() || b.is_zero()) return zero(a.p());
    FpPoly g = gcd(a, b);
    return ((a * b) / g).make_monic();
  }

  // f(g) by Horner
  FpPoly compose(const FpPoly& g) const {
    FpPoly acc = zero(p_);
    for (long k = degree(); k >= 0; --k)
      acc = acc * g + constant(p_, coeff((size_t)k));
    return acc;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::string s;
    for (long k = degree(); k >= 0; --k) {
      uint32_t c = coeff((size_t)k);
      if (!c) continue;
      if (!s.empty()) s += " + ";
      if (k == 0 || c != 1) s += std::to_string(c);
      if (k > 0) {
        if (c != 1) s += "*";
        s += "X";
        if (k > 1) s += "^" + std::to_string(k);
      }
    }
    return s;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  void check_same(const FpPoly& o) const {
    if (p_ != o.p_) throw std::invalid_argument("polynomial modulus mismatch");
  }
  uint32_t p_ = 2;
  std::vector<uint32_t> c_;
};

// Index tag for sequence spaces: Nat = direct sums over n >= 0, Int = over all of Z.
enum class IndexTag { Nat, Int };

// Finitely supported vector over F_p with 64-bit indices, kept sorted by index.
// Doubles as a functional (finite support row) on the same space.
class FpVec {
 public:
  using Term = std::pair<int64_t, uint32_t>;

  FpVec() = default;
  FpVec(uint32_t p, IndexTag tag) : p_(p), tag_(tag) { require_prime(p); }
  FpVec(uint32_t p, IndexTag tag, std::vector<Term> terms) : p_(p), tag_(tag) {
    require_prime(p);
    std::map<int64_t, uint64_t> acc;
    for (auto& [i, v] : terms) acc[i] += v % p;
    for (auto& [i, v] : acc) {
      uint32_t r = (uint32_t)(v % p);
      if (r) terms_.emplace_back(i, r);
    }
    check_tag();
  }
  static FpVec unit(uint32_t p, IndexTag tag, int64_t i, uint32_t val = 1) {
    return FpVec(p, tag, {{i, val}});
  }

  uint32_t p() const { return p_; }
  IndexTag tag() const { return tag_; }
  bool is_zero() const { return terms_.empty(); }
  size_t support_size() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }

  uint32_t coeff(int64_t i) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), i,
                               [](const Term& t, int64_t k) { return t.first < k; });
    return (it != terms_.end() && it->first == i) ? it->second : 0;
  }
  int64_t min_index() const {
    if (is_zero()) throw std::domain_error("support of zero vector");
    return terms_.front().first;
  }
  int64_t max_index() const {
    if (is_zero()) throw std::domain_error("support of zero vector");
    return terms_.back().first;
  }

  // this += c * v
  void axpy(uint32_t c, const FpVec& v) {
    if (p_ != v.p_ || tag_ != v.tag_)
      throw std::invalid_argument("vector space mismatch in axpy");
    c %= p_;
    if (c == 0 || v.is_zero()) return;
    Barrett br(p_);
    std::vector<Term> out;
    out.reserve(terms_.size() + v.terms_.size());
    size_t a = 0, b = 0;
    while (a < terms_.size() || b < v.terms_.size()) {
      if (b == v.terms_.size() ||
          (a < terms_.size() && terms_[a].first < v.terms_[b].first)) {
        out.push_back(terms_[a++]);
      } else if (a == terms_.size() || v.terms_[b].first < terms_[a].first) {
        uint32_t nv = (uint32_t)br.mul(c, v.terms_[b].second);
        if (nv) out.emplace_back(v.terms_[b].first, nv);
        ++b;
      } else {
        uint32_t nv = (uint32_t)br.add(terms_[a].second, br.mul(c, v.terms_[b].second));
        if (nv) out.emplace_back(terms_[a].first, nv);
        ++a;
        ++b;
      }
    }
    terms_ = std::move(out);
  }
  FpVec scaled(uint32_t c) const {
    FpVec r(p_, tag_);
    r.axpy(c, *this);
    return r;
  }
  FpVec shifted(int64_t delta, bool drop_negative) const {
    FpVec r(p_, tag_);
    for (auto& [i, v] : terms_) {
      int64_t j = i + delta;
      if (drop_negative && j < 0) continue;
      r.terms_.emplace_back(j, v);
    }
    return r;
  }

  // pairing sum_i a_i x_i, the evaluation of a functional on a vector
  uint32_t dot(const FpVec& x) const {
    if (p_ != x.p_) throw std::invalid_argument("vector space mismatch in dot");
    Barrett br(p_);
    uint64_t s = 0;
    size_t a = 0, b = 0;
    while (a < terms_.size() && b < x.terms_.size()) {
      if (terms_[a].first < x.terms_[b].first)
        ++a;
      else if (x.terms_[b].first < terms_[a].first)
        ++b;
      else
        s = br.add(s, br.mul(terms_[a++].second, x.terms_[b++].second));
    }
    return (uint32_t)s;
  }

  friend bool operator==(const FpVec& a, const FpVec& b) {
    return a.p_ == b.p_ && a.tag_ == b.tag_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const FpVec& a, const FpVec& b) { return !(a == b); }

 private:
  void check_tag() const {
    if (tag_ == IndexTag::Nat)
      for (auto& [i, v] : terms_)
        if (i < 0) throw std::out_of_range("negative index in Nat-indexed vector");
  }
  uint32_t p_ = 2;
  IndexTag tag_ = IndexTag::Nat;
  std::vector<Term> terms_;
};

// Dense matrix over F_p. p = 2 is bit-packed, one row = ceil(cols/64) words.
class FpMat {
 public:
  FpMat() : FpMat(2, 0, 0) {}
  FpMat(uint32_t p, size_t rows, size_t cols)
      : p_(p), rows_(rows), cols_(cols), br_(p) {
    require_prime(p);
    if (p > (1u << 30)) throw std::invalid_argument("prime too large");
    if (p_ == 2) {
      wpr_ = (cols_ + 63) / 64;
      bits_.assign(rows_ * wpr_, 0);
    } else {
      vals_.assign(rows_ * cols_, 0);
    }
  }
  static FpMat identity(uint32_t p, size_t n) {
    FpMat m(p, n, n);
    for (size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }
  static FpMat from_rows(uint32_t p, const std::vector<std::vector<uint32_t>>& rows) {
    size_t c = rows.empty() ? 0 : rows[0].size();
    FpMat m(p, rows.size(), c);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != c) throw std::invalid_argument("ragged matrix rows");
      for (size_t j = 0; j < c; ++j) m.set(i, j, rows[i][j]);
    }
    return m;
  }

  uint32_t p() const { return p_; }
  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  uint32_t get(size_t i, size_t j) const {
    bounds(i, j);
    if (p_ == 2) return (bits_[i * wpr_ + j / 64] >> (j % 64)) & 1u;
    return vals_[i * cols_ + j];
  }
  void set(size_t i, size_t j, uint32_t v) {
    bounds(i, j);
    v %= p_;
    if (p_ == 2) {
      uint64_t& w = bits_[i * wpr_ + j / 64];
      uint64_t m = 1ull << (j % 64);
      w = v ? (w | m) : (w & ~m);
    } else {
      vals_[i * cols_ + j] = v;
    }
  }

  void swap_rows(size_t a, size_t b) {
    if (a == b) return;
    if (p_ == 2)
      for (size_t w = 0; w < wpr_; ++w)
        std::swap(bits_[a * wpr_ + w], bits_[b * wpr_ + w]);
    else
      for (size_t j = 0; j < cols_; ++j)
        std::swap(vals_[a * cols_ + j], vals_[b * cols_ + j]);
  }
  void scale_row(size_t i, uint32_t c) {
    if (p_ == 2) return;  // only c = 1 is a unit scaling that matters
    for (size_t j = 0; j < cols_; ++j)
      vals_[i * cols_ + j] = (uint32_t)br_.mul(vals_[i * cols_ + j], c);
  }
  // row[dst] += c * row[src]
  void row_axpy(size_t dst, size_t src, uint32_t c) {
    if (p_ == 2) {
      if (c & 1)
        for (size_t w = 0; w < wpr_; ++w) bits_[dst * wpr_ + w] ^= bits_[src * wpr_ + w];
      return;
    }
    c %= p_;
    if (!c) return;
    for (size_t j = 0; j < cols_; ++j)
      vals_[dst * cols_ + j] = (uint32_t)br_.reduce(
          vals_[dst * cols_ + j] + (uint64_t)c * vals_[src * cols_ + j]);
  }

  FpMat operator*(const FpMat& o) const {
    if (p_ != o.p_ || cols_ != o.rows_)
      throw std::invalid_argument("matrix product shape mismatch");
    FpMat r(p_, rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t k = 0; k < cols_; ++k) {
        uint32_t a = get(i, k);
        if (a) r.row_axpy_external(i, o, k, a);
      }
    return r;
  }
  FpMat operator+(const FpMat& o) const {
    if (p_ != o.p_ || rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix sum shape mismatch");
    FpMat r(p_, rows_, cols_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j)
        r.set(i, j, (uint32_t)br_.add(get(i, j), o.get(i, j)));
    return r;
  }
  FpMat scaled(uint32_t c) const {
    FpMat r(p_, rows_, cols_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) r.set(i, j, (uint32_t)br_.mul(get(i, j), c));
    return r;
  }
  FpMat transpose() const {
    FpMat r(p_, cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) r.set(j, i, get(i, j));
    return r;
  }
  FpMat pow(uint64_t e) const {
    if (rows_ != cols_) throw std::invalid_argument("power of non-square matrix");
    FpMat r = identity(p_, rows_);
    FpMat b = *this;
    while (e) {
      if (e & 1) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }
  std::vector<uint32_t> mul_vec(const std::vector<uint32_t>& x) const {
    if (x.size() != cols_) throw std::invalid_argument("matrix-vector shape mismatch");
    std::vector<uint32_t> y(rows_, 0);
    for (size_t i = 0; i < rows_; ++i) {
      uint64_t s = 0;
      for (size_t j = 0; j < cols_; ++j) s = br_.add(s, br_.mul(get(i, j), x[j]));
      y[i] = (uint32_t)s;
    }
    return y;
  }
  bool is_zero() const {
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j)
        if (get(i, j)) return false;
    return true;
  }

  friend bool operator==(const FpMat& a, const FpMat& b) {
    if (a.p_ != b.p_ || a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t j = 0; j < a.cols_; ++j)
        if (a.get(i, j) != b.get(i, j)) return false;
    return true;
  }
  friend bool operator!=(const FpMat& a, const FpMat& b) { return !(a == b); }

 private:
  // row[i] of this += a * row[k] of o, writing into product accumulation
  void row_axpy_external(size_t i, const FpMat& o, size_t k, uint32_t a) {
    if (p_ == 2) {
      for (size_t w = 0; w < wpr_; ++w) bits_[i * wpr_ + w] ^= o.bits_[k * o.wpr_ + w];
      return;
    }
    for (size_t j = 0; j < cols_; ++j)
      vals_[i * cols_ + j] = (uint32_t)br_.reduce(
          vals_[i * cols_ + j] + (uint64_t)a * o.vals_[k * o.cols_ + j]);
  }
  void bounds(size_t i, size_t j) const {
    if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index out of range");
  }

  uint32_t p_;
  size_t rows_, cols_;
  size_t wpr_ = 0;
  std::vector<uint64_t> bits_;
  std::vector<uint32_t> vals_;
  Barrett br_;
};

struct RrefResult {
  size_t rank = 0;
  FpMat basis;  // rank x cols, reduced row echelon form, canonical for the row space
};

// Reduced row echelon form; fully back-substituted so the basis is canonical.
inline RrefResult rref_rank(const FpMat& m) {
  FpMat a = m;
  Barrett br(a.p());
  size_t r = 0;
  for (size_t col = 0; col < a.cols() && r < a.rows(); ++col) {
    size_t piv = r;
    while (piv < a.rows() && a.get(piv, col) == 0) ++piv;
    if (piv == a.rows()) continue;
    a.swap_rows(r, piv);
    if (a.p() != 2) a.scale_row(r, (uint32_t)br.inv(a.get(r, col)));
    for (size_t i = 0; i < a.rows(); ++i) {
      if (i == r) continue;
      uint32_t c = a.get(i, col);
      if (c) a.row_axpy(i, r, (uint32_t)br.neg(c));
    }
    ++r;
  }
  FpMat basis(a.p(), r, a.cols());
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < a.cols(); ++j) basis.set(i, j, a.get(i, j));
  return {r, std::move(basis)};
}

// Canonical basis of {x : m x = 0}, one column per free variable of the RREF.
inline FpMat kernel_basis(const FpMat& m) {
  RrefResult rr = rref_rank(m);
  const FpMat& b = rr.basis;
  Barrett br(m.p());
  std::vector<size_t> pivot_col(rr.rank);
  std::vector<bool> is_pivot(m.cols(), false);
  for (size_t i = 0; i < rr.rank; ++i) {
    size_t j = 0;
    while (b.get(i, j) == 0) ++j;
    pivot_col[i] = j;
    is_pivot[j] = true;
  }
  size_t nfree = m.cols() - rr.rank;
  FpMat k(m.p(), m.cols(), nfree);
  size_t fc = 0;
  for (size_t j = 0; j < m.cols(); ++j) {
    if (is_pivot[j]) continue;
    k.set(j, fc, 1);
    for (size_t i = 0; i < rr.rank; ++i) {
      uint32_t v = b.get(i, j);
      if (v) k.set(pivot_col[i], fc, (uint32_t)br.neg(v));
    }
    ++fc;
  }
  return k;
}

// f(m) as a matrix, Horner form
inline FpMat poly_matrix(const FpPoly& f, const FpMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("poly of non-square matrix");
  if (f.p() != m.p()) throw std::invalid_argument("modulus mismatch in poly_matrix");
  FpMat acc(m.p(), m.rows(), m.rows());
  for (long k = f.degree(); k >= 0; --k) {
    acc = acc * m;
    uint32_t c = f.coeff((size_t)k);
    if (c)
      for (size_t i = 0; i < m.rows(); ++i)
        acc.set(i, i, (uint32_t)Barrett(m.p()).add(acc.get(i, i), c));
  }
  return acc;
}

// f(m) applied to a finitely supported vector with indices inside [0, m.cols())
inline FpVec poly_apply(const FpPoly& f, const FpMat& m, const FpVec& v) {
  if (m.rows() != m.cols()) throw std::invalid_argument("poly of non-square matrix");
  if (f.p() != m.p() || v.p() != m.p())
    throw std::invalid_argument("modulus mismatch in poly_apply");
  size_t d = m.rows();
  std::vector<uint32_t> x(d, 0);
  for (auto& [i, c] : v.terms()) {
    if (i < 0 || (size_t)i >= d) throw std::out_of_range("vector support outside matrix window");
    x[(size_t)i] = c;
  }
  Barrett br(m.p());
  std::vector<uint32_t> acc(d, 0), w = x;
  for (size_t i = 0; i < d; ++i) acc[i] = (uint32_t)br.mul(f.coeff(0), x[i]);
  for (long k = 1; k <= f.degree(); ++k) {
    w = m.mul_vec(w);
    uint32_t c = f.coeff((size_t)k);
    if (c)
      for (size_t i = 0; i < d; ++i) acc[i] = (uint32_t)br.add(acc[i], br.mul(c, w[i]));
  }
  std::vector<FpVec::Term> terms;
  for (size_t i = 0; i < d; ++i)
    if (acc[i]) terms.emplace_back((int64_t)i, acc[i]);
  return FpVec(m.p(), v.tag(), std::move(terms));
}

// one solution of a x = b, or nullopt if inconsistent
inline std::optional<std::vector<uint32_t>> solve(const FpMat& a,
                                                  const std::vector<uint32_t>& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve shape mismatch");
  FpMat aug(a.p(), a.rows(), a.cols() + 1);
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < a.cols(); ++j) aug.set(i, j, a.get(i, j));
    aug.set(i, a.cols(), b[i]);
  }
  RrefResult rr = rref_rank(aug);
  std::vector<uint32_t> x(a.cols(), 0);
  for (size_t i = 0; i < rr.rank; ++i) {
    size_t j = 0;
    while (rr.basis.get(i, j) == 0) ++j;
    if (j == a.cols()) return std::nullopt;  // pivot in the augmented column
    x[j] = rr.basis.get(i, a.cols());
  }
  return x;
}

inline FpMat inverse(const FpMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("inverse of non-square matrix");
  size_t n = m.rows();
  FpMat aug(m.p(), n, 2 * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) aug.set(i, j, m.get(i, j));
    aug.set(i, n + i, 1);
  }
  RrefResult rr = rref_rank(aug);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (rr.basis.get(i, j) != (i == j ? 1u : 0u))
        throw std::domain_error("matrix not invertible");
  if (rr.rank != n) throw std::domain_error("matrix not invertible");
  FpMat inv(m.p(), n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inv.set(i, j, rr.basis.get(i, n + j));
  return inv;
}

namespace detail {

// least monic f with f(m) v = 0, via the Krylov chain of v
inline FpPoly vector_annihilator(const FpMat& m, std::vector<uint32_t> v) {
  size_t d = m.rows();
  Barrett br(m.p());
  std::vector<std::vector<uint32_t>> chain;  // v, m v, m^2 v, ...
  std::vector<uint32_t> w = std::move(v);
  for (size_t k = 0; k <= d; ++k) {
    // try to express w in terms of the chain so far
    FpMat sys(m.p(), d, chain.size());
    for (size_t j = 0; j < chain.size(); ++j)
      for (size_t i = 0; i < d; ++i) sys.set(i, j, chain[j][i]);
    auto sol = solve(sys, w);
    bool consistent = sol.has_value();
    if (consistent) {
      // verify: rref solve of an overdetermined system can return a least-squares-like
      // assignment only when consistent, but double-check the residual exactly
      std::vector<uint32_t> r = sys.mul_vec(*sol);
      for (size_t i = 0; i < d; ++i)
        if (r[i] != w[i]) {
          consistent = false;
          break;
        }
    }
    if (consistent) {
      std::vector<uint32_t> coeffs(k + 1, 0);
      for (size_t j = 0; j < k; ++j) coeffs[j] = (uint32_t)br.neg((*sol)[j]);
      coeffs[k] = 1;
      return FpPoly(m.p(), std::move(coeffs));
    }
    chain.push_back(w);
    w = m.mul_vec(w);
  }
  throw std::logic_error("annihilator search exceeded the dimension bound");
}

}  // namespace detail

// Minimal polynomial: annihilator of a random vector refined over the standard basis,
// then verified. Deterministic seed keeps runs reproducible.
inline FpPoly min_poly(const FpMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("min_poly of non-square matrix");
  size_t d = m.rows();
  if (d == 0) return FpPoly::one(m.p());
  std::mt19937_64 rng(0x616e6e69686c74ull);
  std::vector<uint32_t> v(d);
  for (auto& x : v) x = (uint32_t)(rng() % m.p());
  FpPoly f = detail::vector_annihilator(m, v);
  for (size_t i = 0; i < d; ++i) {
    std::vector<uint32_t> e(d, 0);
    e[i] = 1;
    FpVec ev = poly_apply(f, m, FpVec::unit(m.p(), IndexTag::Nat, (int64_t)i));
    if (!ev.is_zero()) f = FpPoly::lcm(f, detail::vector_annihilator(m, e));
  }
  if (!poly_matrix(f, m).is_zero())
    throw std::logic_error("min_poly verification failed");
  return f;
}

// Fitting decomposition data: kernel and image of m^dim, both canonical.
// columns of .first span ker(m^d); rows of .second span im(m^d).
inline std::pair<FpMat, FpMat> stable_kernel_image(const FpMat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("stable decomposition of non-square matrix");
  FpMat mp = m.pow(m.rows() == 0 ? 1 : m.rows());
  FpMat ker = kernel_basis(mp);
  RrefResult im = rref_rank(mp.transpose());
  return {std::move(ker), std::move(im.basis)};
}

}  // namespace adjent
