#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adjent/duality.hpp"
#include "adjent/json_io.hpp"
#include "adjent/oracle.hpp"
#include "adjent/randgen.hpp"

using namespace adjent;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kSchemaVersion = 1;

enum ExitCode { kOk = 0, kMalformed = 1, kInconclusive = 2, kPropertyFailure = 3 };

Json parse_op_arg(const std::string& s) {
  if (s == "right_shift" || s == "left_shift" || s == "two_sided_shift")
    return Json{{"kind", s}, {"p", 2}};
  try {
    return Json::parse(s);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("--op: ") + e.what());
  }
}

// "e0" or "e0,e3,e-1": unit functionals / unit vectors at the listed indices
std::vector<int64_t> parse_unit_list(const std::string& s) {
  std::vector<int64_t> idx;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string tok = s.substr(pos, comma - pos);
    if (tok.size() < 2 || tok[0] != 'e') throw ParseError("bad unit shorthand \"" + tok + "\"");
    try {
      idx.push_back(std::stoll(tok.substr(1)));
    } catch (const std::exception&) {
      throw ParseError("bad unit shorthand \"" + tok + "\"");
    }
    pos = comma + 1;
  }
  if (idx.empty()) throw ParseError("empty subgroup shorthand");
  return idx;
}

Json parse_subgroup_arg(const std::string& s, bool finite) {
  if (!s.empty() && s[0] == 'e') {
    Json rows = Json::array();
    for (int64_t i : parse_unit_list(s)) rows.push_back(Json::array({Json::array({i, 1})}));
    if (finite) return Json{{"kind", "span"}, {"generators", rows}};
    return Json{{"kind", "kernel"}, {"rows", rows}};
  }
  try {
    return Json::parse(s);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("--subgroup: ") + e.what());
  }
}

struct Emitter {
  std::string format = "json";
  bool timing = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void emit(Json& report, const std::vector<std::string>& text_lines) {
    if (timing) {
      auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
      report["timing_us"] = us;
    }
    if (format == "json") {
      std::cout << report.dump(2) << "\n";
    } else {
      for (const auto& line : text_lines) std::cout << line << "\n";
    }
  }
};

Json report_header(const std::string& command, const Json& echo, uint64_t seed) {
  Json r;
  r["version"] = kVersion;
  r["schema"] = kSchemaVersion;
  r["command"] = command;
  r["input"] = echo;
  r["input_digest"] = json_digest(echo);
  r["seed"] = seed;
  return r;
}

std::string trace_text(const GrowthTrace& t) {
  std::string s = "counts:";
  for (const auto& c : t.counts) s += " " + c.str();
  if (t.stabilized)
    s += " (stabilized at n=" + std::to_string(t.n_stab) + ", ratio " + t.alpha_final.str() + ")";
  return s;
}

int cmd_compute(const std::string& op_arg, const std::vector<std::string>& sub_args,
                const std::string& mode, size_t max_steps, uint64_t seed, Emitter& out) {
  Json op_json = parse_op_arg(op_arg);
  OperatorDesc op = op_from_json(op_json);
  if (sub_args.empty()) throw ParseError("compute needs at least one subgroup");
  bool finite_mode = mode == "h";

  Json echo;
  echo["op"] = op_to_json(op);
  echo["mode"] = mode;
  Json subs_echo = Json::array();
  std::vector<Json> sub_jsons;
  for (const auto& s : sub_args) {
    Json sj = parse_subgroup_arg(s, finite_mode);
    subs_echo.push_back(sj);
    sub_jsons.push_back(std::move(sj));
  }
  echo["subgroups"] = subs_echo;

  EngineConfig cfg;
  if (max_steps) cfg.max_steps = max_steps;

  Json report = report_header("compute", echo, seed);
  Json results = Json::array();
  std::vector<std::string> lines{"command: compute (" + mode + ")"};
  bool any_inconclusive = false;
  for (size_t i = 0; i < sub_jsons.size(); ++i) {
    Json entry;
    entry["subgroup"] = sub_jsons[i];
    try {
      SubgroupEntropy e = finite_mode
                              ? h(op, finite_from_json(sub_jsons[i], op), cfg)
                              : hstar(op, cofinite_from_json(sub_jsons[i], op), cfg);
      entry["value"] = value_to_json(e.value());
      entry["trace"] = trace_to_json(e.trace);
      lines.push_back("[" + std::to_string(i) + "] " + value_text(e.value()) + "  " +
                      trace_text(e.trace));
    } catch (const InconclusiveError& err) {
      any_inconclusive = true;
      entry["inconclusive"] = true;
      entry["message"] = err.what();
      entry["trace"] = trace_to_json(err.trace);
      lines.push_back("[" + std::to_string(i) + "] inconclusive: " + err.what());
    }
    results.push_back(std::move(entry));
  }
  report["results"] = std::move(results);
  out.emit(report, lines);
  return any_inconclusive ? kInconclusive : kOk;
}

int cmd_classify(const std::string& op_arg, size_t probe_budget, uint64_t seed, Emitter& out) {
  Json op_json = parse_op_arg(op_arg);
  OperatorDesc op = op_from_json(op_json);

  Json echo;
  echo["op"] = op_to_json(op);
  echo["probe_budget"] = probe_budget;

  ProbeReport probe = consistency_probe(op, probe_budget);
  bool verified = verify_certificate(probe.cert, op);

  Json report = report_header("classify", echo, seed);
  report["value"] = value_to_json(probe.classified);
  report["certificate"] = cert_to_json(probe.cert);
  report["certificate_verified"] = verified;
  Json pj;
  pj["runs"] = probe.runs;
  pj["inconclusive"] = probe.inconclusive;
  pj["contradiction"] = probe.contradiction;
  pj["achieved"] = value_to_json(probe.achieved);
  Json notes = Json::array();
  for (const auto& n : probe.notes) notes.push_back(n);
  pj["notes"] = std::move(notes);
  report["probe"] = std::move(pj);

  std::vector<std::string> lines{
      "command: classify",
      "value: " + value_text(probe.classified),
      std::string("certificate: ") + certificate_kind_name(probe.cert.kind) +
          (verified ? " (verified)" : " (VERIFY FAILED)"),
      "probe: " + std::to_string(probe.runs) + " runs, achieved " +
          value_text(probe.achieved) +
          (probe.contradiction ? ", CONTRADICTION" : ", consistent"),
  };
  out.emit(report, lines);
  return (!verified || probe.contradiction) ? kPropertyFailure : kOk;
}

struct SuiteResult {
  size_t cases = 0;
  size_t passed = 0;
  Json counterexample;  // null when everything passed
};

std::vector<FpVec> random_windowed_rows(RandGen& rng, const OperatorDesc& op, size_t max_rows) {
  IndexTag tag = index_tag(op);
  int64_t lo = tag == IndexTag::Int ? -4 : 0;
  std::vector<FpVec> rows;
  for (size_t i = 0, k = 1 + rng.below(max_rows); i < k; ++i) {
    FpVec r = rng.functional(op.p, tag, lo, 6, 3);
    bool ok = !r.is_zero();
    for (const auto& [idx, c] : r.terms())
      if (!in_window(op, idx)) ok = false;
    if (ok) rows.push_back(std::move(r));
  }
  return rows;
}

SuiteResult suite_duality(RandGen& rng, size_t budget) {
  SuiteResult res;
  while (res.cases < budget) {
    uint32_t p = rng.small_prime();
    IndexTag tag = rng.below(2) ? IndexTag::Int : IndexTag::Nat;
    OperatorDesc op = rng.sequence_op(p, rng.below(3), tag);
    auto rows = random_windowed_rows(rng, op, 2);
    if (rows.empty()) continue;
    ++res.cases;
    std::string detail;
    if (check_duality_theorem(op, rows, 10, &detail)) {
      ++res.passed;
    } else {
      Json ce;
      ce["op"] = op_to_json(op);
      Json rj = Json::array();
      for (const auto& r : rows) rj.push_back(jio::row_to(r));
      ce["rows"] = std::move(rj);
      ce["detail"] = detail;
      res.counterexample = std::move(ce);
      return res;
    }
  }
  return res;
}

SuiteResult suite_dichotomy(RandGen& rng, size_t budget) {
  SuiteResult res;
  for (; res.cases < budget;) {
    uint32_t p = rng.small_prime();
    IndexTag tag = rng.below(2) ? IndexTag::Int : IndexTag::Nat;
    OperatorDesc op = rng.sequence_op(p, rng.below(3), tag);
    ++res.cases;
    auto [value, cert] = classify_ent_star(op);
    bool two_valued = value.kind == EntropyValue::Kind::Zero ||
                      value.kind == EntropyValue::Kind::Infinite;
    bool ok = two_valued && verify_certificate(cert, op) &&
              !consistency_probe(op, 3).contradiction;
    if (ok) {
      ++res.passed;
    } else {
      Json ce;
      ce["op"] = op_to_json(op);
      ce["value"] = value_to_json(value);
      ce["certificate"] = cert_to_json(cert);
      res.counterexample = std::move(ce);
      return res;
    }
  }
  return res;
}

SuiteResult suite_addition(RandGen& rng, size_t budget) {
  SuiteResult res;
  while (res.cases < budget) {
    uint32_t p = rng.small_prime();
    IndexTag tag = rng.below(2) ? IndexTag::Int : IndexTag::Nat;
    OperatorDesc a = rng.sequence_op(p, rng.below(2), tag);
    OperatorDesc b = rng.sequence_op(p, rng.below(2), tag);
    if (index_tag(a) != index_tag(b)) continue;
    ++res.cases;
    OperatorDesc sum = OperatorDesc::direct_sum({a, b});
    auto va = classify_ent_star(a).first;
    auto vb = classify_ent_star(b).first;
    auto vs = classify_ent_star(sum).first;
    bool part_infinite = va.kind == EntropyValue::Kind::Infinite ||
                         vb.kind == EntropyValue::Kind::Infinite;
    bool want_infinite = vs.kind == EntropyValue::Kind::Infinite;
    if (part_infinite == want_infinite) {
      ++res.passed;
    } else {
      Json ce;
      ce["a"] = op_to_json(a);
      ce["b"] = op_to_json(b);
      ce["sum_value"] = value_to_json(vs);
      res.counterexample = std::move(ce);
      return res;
    }
  }
  return res;
}

SuiteResult suite_growth_laws(RandGen& rng, size_t budget) {
  SuiteResult res;
  while (res.cases < budget) {
    uint32_t p = rng.small_prime();
    IndexTag tag = rng.below(2) ? IndexTag::Int : IndexTag::Nat;
    OperatorDesc op = rng.sequence_op(p, rng.below(3), tag);
    auto rows = random_windowed_rows(rng, op, 2);
    if (rows.empty()) continue;
    ++res.cases;
    FpKernelSub n{rows};
    try {
      GrowthTrace t = cotrajectory_trace(op, n, 8);
      t.check_subadditive();
      uint64_t k = 2 + rng.below(2);
      if (!check_power_identity(op, n, k, 3)) throw GrowthLawViolation("power identity");
      ++res.passed;
    } catch (const GrowthLawViolation& e) {
      Json ce;
      ce["op"] = op_to_json(op);
      Json rj = Json::array();
      for (const auto& r : rows) rj.push_back(jio::row_to(r));
      ce["rows"] = std::move(rj);
      ce["law"] = e.what();
      res.counterexample = std::move(ce);
      return res;
    }
  }
  return res;
}

SuiteResult suite_perp(RandGen& rng, size_t budget) {
  SuiteResult res;
  const std::vector<std::vector<Int>> group_shapes = {
      {Int(8)}, {Int(4), Int(2)}, {Int(2), Int(2), Int(2)}, {Int(9), Int(3)}};
  for (const auto& shape : group_shapes) {
    FgGroup g{0, shape};
    auto subs = enumerate_subgroups(g);
    std::vector<FgEndo> endos{FgEndo(g, IntMat::identity(g.dim()))};
    for (int i = 0; i < 3; ++i) endos.push_back(rng.endo(g));
    size_t per_group = 0;
    for (const auto& f : endos) {
      for (const auto& s : subs) {
        if (per_group >= budget) break;
        ++per_group;
        ++res.cases;
        IntMat cols(g.dim(), s.generators.size());
        for (size_t c = 0; c < s.generators.size(); ++c)
          for (size_t i = 0; i < g.dim(); ++i) cols.at(i, c) = s.generators[c][i];
        LatticeSub h = s.generators.empty() ? LatticeSub::scaled(g, g.exponent())
                                            : LatticeSub::from_columns(g, cols);
        LatticeSub hp = annihilator(g, h);
        bool ok = check_perp_identity(f, h, 2);
        Int prod = (g.order() / h.index().value()) * (g.order() / hp.index().value());
        ok = ok && prod == g.order();
        ok = ok && annihilator(g, hp) == h;
        if (ok) {
          ++res.passed;
        } else {
          Json ce;
          ce["group_torsion"] = Json::array();
          for (const auto& d : shape) ce["group_torsion"].push_back(jio::from_int(d));
          Json gens = Json::array();
          for (const auto& gen : s.generators) {
            Json gj = Json::array();
            for (const auto& x : gen) gj.push_back(jio::from_int(x));
            gens.push_back(std::move(gj));
          }
          ce["subgroup_generators"] = std::move(gens);
          res.counterexample = std::move(ce);
          return res;
        }
      }
    }
  }
  return res;
}

int cmd_verify(const std::string& suite, uint64_t seed, size_t budget, Emitter& out) {
  Json echo;
  echo["suite"] = suite;
  echo["budget"] = budget;
  RandGen rng(seed);

  SuiteResult res;
  if (suite == "duality") res = suite_duality(rng, budget);
  else if (suite == "dichotomy") res = suite_dichotomy(rng, budget);
  else if (suite == "addition") res = suite_addition(rng, budget);
  else if (suite == "growth-laws") res = suite_growth_laws(rng, budget);
  else if (suite == "perp") res = suite_perp(rng, budget);
  else throw ParseError("unknown suite \"" + suite + "\"");

  Json report = report_header("verify", echo, seed);
  report["suite"] = suite;
  report["cases"] = res.cases;
  report["passed"] = res.passed;
  report["failed"] = res.cases - res.passed;
  report["counterexample"] = res.counterexample;

  bool failed = res.passed != res.cases;
  std::vector<std::string> lines{
      "command: verify " + suite,
      std::to_string(res.passed) + "/" + std::to_string(res.cases) + " cases passed" +
          (failed ? " — FAILURE, counterexample in JSON report" : ""),
  };
  out.emit(report, lines);
  return failed ? kPropertyFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact algebraic entropy for abelian group endomorphisms"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("adjent ") + kVersion);

  Emitter out;
  uint64_t seed = 0;
  app.add_option("--format", out.format, "output format")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();
  app.add_option("--seed", seed, "random seed for generated cases")->capture_default_str();
  app.add_flag("--timing", out.timing, "include wall-clock timing in the report");

  std::string op_arg, mode = "hstar", suite;
  std::vector<std::string> sub_args, finite_args;
  size_t max_steps = 0, probe_budget = 8, budget = 60;

  CLI::App* compute = app.add_subcommand("compute", "per-subgroup entropy values");
  compute->add_option("--op", op_arg, "operator descriptor (JSON or shift name)")->required();
  compute->add_option("--subgroup", sub_args, "cofinite subgroup descriptor(s)");
  compute->add_option("--finite-subgroup", finite_args, "finite subgroup descriptor(s)");
  compute->add_option("--mode", mode, "hstar (cotrajectories) or h (trajectories)")
      ->check(CLI::IsMember({"hstar", "h"}));
  compute->add_option("--steps", max_steps, "step budget before giving up");

  CLI::App* classify = app.add_subcommand("classify", "zero-or-infinity verdict with certificate");
  classify->add_option("--op", op_arg, "operator descriptor (JSON or shift name)")->required();
  classify->add_option("--probe-budget", probe_budget, "consistency probe family size");

  CLI::App* verify = app.add_subcommand("verify", "randomized/exhaustive property suites");
  verify->add_option("suite,--suite", suite, "duality|dichotomy|addition|growth-laws|perp")
      ->required();
  verify->add_option("--budget", budget, "cases per suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kMalformed;
  }

  try {
    if (compute->parsed()) {
      const auto& subs = mode == "h" ? finite_args : sub_args;
      if (mode == "h" && !finite_args.empty() && !sub_args.empty())
        throw ParseError("pass either --subgroup or --finite-subgroup, not both");
      if (mode == "hstar" && !finite_args.empty())
        throw ParseError("--finite-subgroup needs --mode h");
      return cmd_compute(op_arg, subs, mode, max_steps, seed, out);
    }
    if (classify->parsed()) return cmd_classify(op_arg, probe_budget, seed, out);
    return cmd_verify(suite, seed, budget, out);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMalformed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMalformed;
  } catch (const InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kInconclusive;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kPropertyFailure;
  }
}
