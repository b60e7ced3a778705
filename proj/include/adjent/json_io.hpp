#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "adjent/classify.hpp"
#include "adjent/engine.hpp"

namespace adjent {

using Json = nlohmann::ordered_json;

class ParseError : public std::invalid_argument {
 public:
  explicit ParseError(const std::string& what) : std::invalid_argument(what) {}
};

namespace jio {

// Integers ride as JSON numbers while they fit a double exactly, as decimal
// strings beyond that.
inline Json from_int(const Int& v) {
  static const Int lo = -(Int(1) << 53), hi = Int(1) << 53;
  if (v >= lo && v <= hi) return (int64_t)v;
  return v.str();
}

inline Int to_int(const Json& j, const char* what) {
  if (j.is_number_integer()) return Int(j.get<int64_t>());
  if (j.is_string()) {
    try {
      return Int(j.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw ParseError(std::string(what) + " must be an integer or a decimal string");
}

inline const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field \"") + key + "\"");
  return *it;
}

inline uint32_t prime_field(const Json& j) {
  const Json& p = field(j, "p");
  if (!p.is_number_unsigned() && !p.is_number_integer())
    throw ParseError("\"p\" must be a number");
  int64_t v = p.get<int64_t>();
  if (v < 2 || v > 0x7fffffff) throw ParseError("\"p\" out of range");
  return (uint32_t)v;
}

inline FpPoly poly_from(const Json& j, uint32_t p, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be a coefficient array");
  std::vector<uint32_t> cs;
  for (const auto& c : j) {
    if (!c.is_number_integer()) throw ParseError(std::string(what) + " has a non-integer entry");
    int64_t v = c.get<int64_t>();
    cs.push_back((uint32_t)(((v % p) + p) % p));
  }
  return FpPoly(p, cs);
}

inline Json poly_to(const FpPoly& f) {
  Json a = Json::array();
  for (int64_t i = 0; i <= f.degree(); ++i) a.push_back(f.coeff((size_t)i));
  if (f.degree() < 0) a.push_back(0);
  return a;
}

inline FpMat matrix_from(const Json& j, uint32_t p) {
  if (!j.is_array() || j.empty()) throw ParseError("\"matrix\" must be a non-empty array of rows");
  size_t rows = j.size(), cols = j[0].size();
  FpMat m(p, rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ParseError("\"matrix\" rows must all have the same length");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number_integer()) throw ParseError("\"matrix\" has a non-integer entry");
      int64_t v = j[i][c].get<int64_t>();
      m.set(i, c, (uint32_t)(((v % p) + p) % p));
    }
  }
  return m;
}

}  // namespace jio

inline Json op_to_json(const OperatorDesc& op) {
  Json j;
  j["kind"] = op_kind_name(op.kind);
  switch (op.kind) {
    case OpKind::RightShift:
    case OpKind::LeftShift:
      j["p"] = op.p;
      break;
    case OpKind::TwoSidedShift:
      j["p"] = op.p;
      j["step"] = op.shift_step;
      break;
    case OpKind::FiniteDim: {
      j["p"] = op.p;
      Json rows = Json::array();
      for (size_t i = 0; i < op.matrix.rows(); ++i) {
        Json r = Json::array();
        for (size_t c = 0; c < op.matrix.cols(); ++c) r.push_back(op.matrix.get(i, c));
        rows.push_back(std::move(r));
      }
      j["matrix"] = std::move(rows);
      break;
    }
    case OpKind::BlockDiag: {
      j["p"] = op.p;
      Json blocks = Json::array();
      for (const auto& b : op.blocks) blocks.push_back(jio::poly_to(b));
      j["blocks"] = std::move(blocks);
      j["repeat"] = op.repeat == RepeatRule::GrowLinear  ? "grow_linear"
                    : op.repeat == RepeatRule::RepeatLast ? "repeat_last"
                                                          : "none";
      break;
    }
    case OpKind::DirectSum: {
      Json parts = Json::array();
      for (const auto& part : op.parts) parts.push_back(op_to_json(part));
      j["parts"] = std::move(parts);
      break;
    }
    case OpKind::PolyOf:
      j["poly"] = jio::poly_to(op.poly);
      j["inner"] = op_to_json(op.inner[0]);
      break;
    case OpKind::Power:
      j["k"] = op.power_k;
      j["inner"] = op_to_json(op.inner[0]);
      break;
    case OpKind::IntEndo: {
      const FgEndo& e = *op.endo;
      j["free_rank"] = e.group.free_rank;
      Json tor = Json::array();
      for (const auto& d : e.group.torsion) tor.push_back(jio::from_int(d));
      j["torsion"] = std::move(tor);
      Json rows = Json::array();
      for (size_t i = 0; i < e.m.rows(); ++i) {
        Json r = Json::array();
        for (size_t c = 0; c < e.m.cols(); ++c) r.push_back(jio::from_int(e.m.at(i, c)));
        rows.push_back(std::move(r));
      }
      j["matrix"] = std::move(rows);
      break;
    }
    case OpKind::DivisibleTrivial:
      break;
  }
  return j;
}

inline OperatorDesc op_from_json(const Json& j);

namespace jio {

// run a parser body, folding the JSON library's type errors into ParseError
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  }
}

inline OperatorDesc op_from_json_impl(const Json& j) {
  if (!j.is_object()) throw ParseError("operator descriptor must be a JSON object");
  std::string kind = jio::field(j, "kind").get<std::string>();
  OperatorDesc op;
  if (kind == "right_shift") {
    op = OperatorDesc::right_shift(jio::prime_field(j));
  } else if (kind == "left_shift") {
    op = OperatorDesc::left_shift(jio::prime_field(j));
  } else if (kind == "two_sided_shift") {
    int step = j.contains("step") ? jio::field(j, "step").get<int>() : 1;
    op = OperatorDesc::two_sided_shift(jio::prime_field(j), step);
  } else if (kind == "finite_dim") {
    uint32_t p = jio::prime_field(j);
    op = OperatorDesc::finite_dim(jio::matrix_from(jio::field(j, "matrix"), p));
  } else if (kind == "block_diag") {
    uint32_t p = jio::prime_field(j);
    std::vector<FpPoly> blocks;
    for (const auto& b : jio::field(j, "blocks"))
      blocks.push_back(jio::poly_from(b, p, "block"));
    RepeatRule rule = RepeatRule::None;
    if (j.contains("repeat")) {
      std::string r = j["repeat"].get<std::string>();
      if (r == "grow_linear") rule = RepeatRule::GrowLinear;
      else if (r == "repeat_last") rule = RepeatRule::RepeatLast;
      else if (r == "none") rule = RepeatRule::None;
      else throw ParseError("unknown repeat rule \"" + r + "\"");
    }
    op = OperatorDesc::block_diag(p, std::move(blocks), rule);
  } else if (kind == "direct_sum") {
    std::vector<OperatorDesc> parts;
    for (const auto& part : jio::field(j, "parts")) parts.push_back(op_from_json(part));
    if (parts.empty()) throw ParseError("\"parts\" must be non-empty");
    op = OperatorDesc::direct_sum(std::move(parts));
  } else if (kind == "poly_of") {
    OperatorDesc inner = op_from_json(jio::field(j, "inner"));
    op = OperatorDesc::poly_of(jio::poly_from(jio::field(j, "poly"), inner.p, "\"poly\""),
                               std::move(inner));
  } else if (kind == "power") {
    const Json& k = jio::field(j, "k");
    if (!k.is_number_integer() || k.get<int64_t>() < 1)
      throw ParseError("\"k\" must be a positive integer");
    op = OperatorDesc::power((uint64_t)k.get<int64_t>(), op_from_json(jio::field(j, "inner")));
  } else if (kind == "int_endo") {
    FgGroup g;
    const Json& fr = jio::field(j, "free_rank");
    if (!fr.is_number_integer() || fr.get<int64_t>() < 0)
      throw ParseError("\"free_rank\" must be a non-negative integer");
    g.free_rank = (size_t)fr.get<int64_t>();
    for (const auto& d : jio::field(j, "torsion")) {
      Int t = jio::to_int(d, "torsion entry");
      if (t < 2) throw ParseError("torsion entries must be >= 2");
      g.torsion.push_back(std::move(t));
    }
    const Json& rows = jio::field(j, "matrix");
    size_t dim = g.dim();
    if (!rows.is_array() || rows.size() != dim)
      throw ParseError("\"matrix\" must have free_rank + |torsion| rows");
    IntMat m(dim, dim);
    for (size_t i = 0; i < dim; ++i) {
      if (!rows[i].is_array() || rows[i].size() != dim)
        throw ParseError("\"matrix\" must be square");
      for (size_t c = 0; c < dim; ++c) m.at(i, c) = jio::to_int(rows[i][c], "matrix entry");
    }
    op = OperatorDesc::int_endo(FgEndo(std::move(g), std::move(m)));
  } else if (kind == "divisible_trivial") {
    op = OperatorDesc::divisible_trivial();
  } else {
    throw ParseError("unknown operator kind \"" + kind + "\"");
  }
  auto issues = validate(op);
  if (!issues.empty()) throw ParseError("invalid operator: " + issues[0]);
  return op;
}

}  // namespace jio

inline OperatorDesc op_from_json(const Json& j) {
  return jio::guarded([&] { return jio::op_from_json_impl(j); });
}

namespace jio {

inline FpVec row_from(const Json& j, uint32_t p, IndexTag tag) {
  if (!j.is_array()) throw ParseError("a functional row must be an array of [index, coeff] pairs");
  FpVec v(p, tag);
  for (const auto& term : j) {
    if (!term.is_array() || term.size() != 2 || !term[0].is_number_integer() ||
        !term[1].is_number_integer())
      throw ParseError("each row term must be an [index, coeff] pair");
    int64_t i = term[0].get<int64_t>();
    int64_t c = term[1].get<int64_t>();
    v.axpy((uint32_t)(((c % p) + p) % p), FpVec::unit(p, tag, i));
  }
  return v;
}

inline Json row_to(const FpVec& v) {
  Json j = Json::array();
  for (const auto& [i, c] : v.terms()) j.push_back(Json::array({i, c}));
  return j;
}

}  // namespace jio

inline CofiniteSubgroup cofinite_from_json(const Json& j, const OperatorDesc& op) {
  return jio::guarded([&]() -> CofiniteSubgroup {
  if (!j.is_object()) throw ParseError("subgroup descriptor must be a JSON object");
  std::string kind = jio::field(j, "kind").get<std::string>();
  if (kind == "kernel") {
    if (!is_fp_kind(op)) throw ParseError("kernel subgroups need a sequence operator");
    FpKernelSub sub;
    for (const auto& row : jio::field(j, "rows"))
      sub.rows.push_back(jio::row_from(row, op.p, index_tag(op)));
    if (sub.rows.empty()) throw ParseError("\"rows\" must be non-empty");
    return sub;
  }
  GroupDesc g = ambient_group(op);
  if (g.kind != GroupDesc::FinitelyGenerated)
    throw ParseError("lattice subgroups need an integer endomorphism operator");
  if (kind == "whole") return LatticeSub::whole(g.fg);
  if (kind == "scaled") return LatticeSub::scaled(g.fg, jio::to_int(jio::field(j, "m"), "\"m\""));
  if (kind == "lattice") {
    const Json& cols = jio::field(j, "columns");
    if (!cols.is_array() || cols.empty()) throw ParseError("\"columns\" must be non-empty");
    IntMat m(g.fg.dim(), cols.size());
    for (size_t c = 0; c < cols.size(); ++c) {
      if (!cols[c].is_array() || cols[c].size() != g.fg.dim())
        throw ParseError("each column must list one coordinate per group generator");
      for (size_t i = 0; i < g.fg.dim(); ++i)
        m.at(i, c) = jio::to_int(cols[c][i], "column entry");
    }
    return LatticeSub::from_columns(g.fg, m);
  }
  throw ParseError("unknown subgroup kind \"" + kind + "\"");
  });
}

inline FiniteSubgroup finite_from_json(const Json& j, const OperatorDesc& op) {
  return jio::guarded([&]() -> FiniteSubgroup {
  if (!j.is_object()) throw ParseError("subgroup descriptor must be a JSON object");
  std::string kind = jio::field(j, "kind").get<std::string>();
  if (kind == "span") {
    if (!is_fp_kind(op)) throw ParseError("span subgroups need a sequence operator");
    FpSpanSub sub;
    for (const auto& row : jio::field(j, "generators"))
      sub.generators.push_back(jio::row_from(row, op.p, index_tag(op)));
    if (sub.generators.empty()) throw ParseError("\"generators\" must be non-empty");
    return sub;
  }
  if (kind == "torsion_gens") {
    GroupDesc g = ambient_group(op);
    if (g.kind != GroupDesc::FinitelyGenerated)
      throw ParseError("torsion generators need an integer endomorphism operator");
    FiniteGensSub sub;
    for (const auto& gen : jio::field(j, "generators")) {
      if (!gen.is_array() || gen.size() != g.fg.dim())
        throw ParseError("each generator must list one coordinate per group generator");
      std::vector<Int> x;
      for (const auto& c : gen) x.push_back(jio::to_int(c, "generator entry"));
      sub.generators.push_back(std::move(x));
    }
    if (sub.generators.empty()) throw ParseError("\"generators\" must be non-empty");
    return sub;
  }
  throw ParseError("unknown finite-subgroup kind \"" + kind + "\"");
  });
}

inline Json trace_to_json(const GrowthTrace& t) {
  Json j;
  if (t.p > 0) {
    Json logs = Json::array();
    for (int64_t e : t.log_p) logs.push_back(e);
    j["c_log_p"] = std::move(logs);
  } else {
    Json counts = Json::array();
    for (const auto& c : t.counts) counts.push_back(jio::from_int(c));
    j["counts"] = std::move(counts);
  }
  Json alphas = Json::array();
  for (const auto& a : t.alphas()) alphas.push_back(jio::from_int(a));
  j["alpha"] = std::move(alphas);
  j["stabilized"] = t.stabilized;
  j["n_stab"] = t.n_stab;
  j["alpha_final"] = jio::from_int(t.alpha_final);
  j["a0"] = jio::from_int(t.a0);
  j["exact"] = t.exact;
  return j;
}

inline std::string value_text(const EntropyValue& v) {
  switch (v.kind) {
    case EntropyValue::Kind::Zero: return "0";
    case EntropyValue::Kind::Log: return "log " + v.alpha.str();
    case EntropyValue::Kind::Infinite: return "infinite";
    case EntropyValue::Kind::LowerBound: return ">= log " + v.alpha.str();
  }
  return "?";
}

inline Json value_to_json(const EntropyValue& v) {
  Json j;
  switch (v.kind) {
    case EntropyValue::Kind::Zero: j["kind"] = "zero"; break;
    case EntropyValue::Kind::Log: j["kind"] = "log"; break;
    case EntropyValue::Kind::Infinite: j["kind"] = "infinite"; break;
    case EntropyValue::Kind::LowerBound: j["kind"] = "lower_bound"; break;
  }
  if (v.kind == EntropyValue::Kind::Log || v.kind == EntropyValue::Kind::LowerBound)
    j["alpha"] = jio::from_int(v.alpha);
  j["text"] = value_text(v);
  return j;
}

inline Json cert_to_json(const Certificate& c) {
  Json j;
  j["kind"] = certificate_kind_name(c.kind);
  switch (c.kind) {
    case Certificate::Kind::Algebraic:
      j["p"] = c.p;
      j["poly"] = jio::poly_to(c.f);
      break;
    case Certificate::Kind::NonAlgebraic:
      j["p"] = c.p;
      j["witness"] = c.witness;
      break;
    case Certificate::Kind::Narrow:
      j["reason"] = c.reason;
      break;
    case Certificate::Kind::Divisible:
      break;
    case Certificate::Kind::QuasiPeriodic:
      j["s"] = c.s;
      j["t"] = c.t;
      break;
  }
  return j;
}

inline Certificate cert_from_json(const Json& j) {
  return jio::guarded([&]() -> Certificate {
  Certificate c;
  std::string kind = jio::field(j, "kind").get<std::string>();
  if (kind == "algebraic") {
    c.kind = Certificate::Kind::Algebraic;
    c.p = jio::prime_field(j);
    c.f = jio::poly_from(jio::field(j, "poly"), c.p, "\"poly\"");
  } else if (kind == "non_algebraic") {
    c.kind = Certificate::Kind::NonAlgebraic;
    c.p = jio::prime_field(j);
    c.witness = jio::field(j, "witness").get<std::string>();
  } else if (kind == "narrow") {
    c.kind = Certificate::Kind::Narrow;
    c.reason = j.contains("reason") ? j["reason"].get<std::string>() : "";
  } else if (kind == "divisible") {
    c.kind = Certificate::Kind::Divisible;
  } else if (kind == "quasi_periodic") {
    c.kind = Certificate::Kind::QuasiPeriodic;
    c.s = jio::field(j, "s").get<uint64_t>();
    c.t = jio::field(j, "t").get<uint64_t>();
  } else {
    throw ParseError("unknown certificate kind \"" + kind + "\"");
  }
  return c;
  });
}

// stable 64-bit FNV-1a over the canonical dump, for report digests
inline std::string json_digest(const Json& j) {
  std::string s = j.dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return std::string(buf);
}

}  // namespace adjent
