#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "adjent/json_io.hpp"
#include "adjent/randgen.hpp"

using namespace adjent;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(ADJENT_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  std::string out;
  std::array<char, 4096> buf;
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string q(const std::string& s) { return "'" + s + "'"; }

OperatorDesc reparse(const OperatorDesc& op) {
  return op_from_json(Json::parse(op_to_json(op).dump()));
}

}  // namespace

TEST(JsonRoundTrip, EveryOperatorKind) {
  FpMat m(3, 2, 2);
  m.set(0, 1, 1);
  m.set(1, 0, 2);
  FgGroup g{1, {Int(4), Int(2)}};
  IntMat im = IntMat::identity(3);
  std::vector<OperatorDesc> zoo = {
      OperatorDesc::right_shift(2),
      OperatorDesc::left_shift(3),
      OperatorDesc::two_sided_shift(5, -1),
      OperatorDesc::finite_dim(m),
      OperatorDesc::block_diag(2, {FpPoly(2, {1, 1, 1}), FpPoly(2, {1, 1})},
                               RepeatRule::RepeatLast),
      OperatorDesc::block_diag(2, {FpPoly(2, {1, 1})}, RepeatRule::GrowLinear),
      OperatorDesc::direct_sum({OperatorDesc::left_shift(2), OperatorDesc::right_shift(2)}),
      OperatorDesc::poly_of(FpPoly(3, {0, 0, 1}), OperatorDesc::left_shift(3)),
      OperatorDesc::power(3, OperatorDesc::left_shift(2)),
      OperatorDesc::int_endo(FgEndo(g, im)),
      OperatorDesc::divisible_trivial(),
  };
  for (const auto& op : zoo) {
    OperatorDesc back = reparse(op);
    EXPECT_EQ(op_to_json(op), op_to_json(back)) << op_kind_name(op.kind);
    EXPECT_TRUE(validate(back).empty());
  }
}

TEST(JsonRoundTrip, RandomZoo) {
  RandGen rng(113);
  for (int t = 0; t < 40; ++t) {
    OperatorDesc op = rng.sequence_op(rng.small_prime(), rng.below(3),
                                      rng.below(2) ? IndexTag::Int : IndexTag::Nat);
    EXPECT_EQ(op_to_json(op), op_to_json(reparse(op)));
  }
  for (int t = 0; t < 15; ++t) {
    FgGroup g = rng.group(2, 2);
    OperatorDesc op = OperatorDesc::int_endo(rng.endo(g));
    EXPECT_EQ(op_to_json(op), op_to_json(reparse(op)));
  }
}

TEST(JsonRoundTrip, BigIntegersRideAsStrings) {
  Int huge = (Int(1) << 80) + 7;
  FgGroup g{0, {huge}};
  OperatorDesc op = OperatorDesc::int_endo(FgEndo(g, IntMat::identity(1)));
  Json j = op_to_json(op);
  EXPECT_TRUE(j["torsion"][0].is_string());
  OperatorDesc back = reparse(op);
  EXPECT_EQ(back.endo->group.torsion[0], huge);

  EXPECT_EQ(jio::to_int(jio::from_int(huge), "x"), huge);
  EXPECT_EQ(jio::to_int(jio::from_int(Int(-42)), "x"), Int(-42));
  Json small = jio::from_int(Int(1000));
  EXPECT_TRUE(small.is_number_integer());
}

TEST(JsonRoundTrip, CertificatesAndValues) {
  std::vector<Certificate> certs;
  Certificate a;
  a.kind = Certificate::Kind::Algebraic;
  a.p = 3;
  a.f = FpPoly(3, {1, 0, 1});
  certs.push_back(a);
  Certificate n;
  n.kind = Certificate::Kind::NonAlgebraic;
  n.p = 2;
  n.witness = "shift_probe:left";
  certs.push_back(n);
  Certificate w;
  w.kind = Certificate::Kind::Narrow;
  w.reason = "finitely generated ambient group";
  certs.push_back(w);
  Certificate d;
  d.kind = Certificate::Kind::Divisible;
  certs.push_back(d);
  Certificate qp;
  qp.kind = Certificate::Kind::QuasiPeriodic;
  qp.s = 2;
  qp.t = 5;
  certs.push_back(qp);
  for (const auto& c : certs) {
    Certificate back = cert_from_json(cert_to_json(c));
    EXPECT_EQ(cert_to_json(back), cert_to_json(c));
  }

  EXPECT_EQ(value_text(EntropyValue::zero()), "0");
  EXPECT_EQ(value_text(EntropyValue::log_of(Int(8))), "log 8");
  EXPECT_EQ(value_text(EntropyValue::infinite()), "infinite");
  EXPECT_EQ(value_text(EntropyValue::lower_bound(Int(16))), ">= log 16");
  EXPECT_EQ(value_to_json(EntropyValue::log_of(Int(2)))["alpha"], Json(2));
}

TEST(JsonParse, RejectsMalformedOperators) {
  auto bad = [](const char* text) {
    EXPECT_THROW(op_from_json(Json::parse(text)), ParseError) << text;
  };
  bad("{}");
  bad("{\"kind\":\"mystery\"}");
  bad("{\"kind\":\"left_shift\"}");
  bad("{\"kind\":\"left_shift\",\"p\":4}");
  bad("{\"kind\":\"left_shift\",\"p\":\"two\"}");
  bad("{\"kind\":\"finite_dim\",\"p\":2,\"matrix\":[[0,1],[1]]}");
  bad("{\"kind\":\"finite_dim\",\"p\":2,\"matrix\":[[0,1]]}");
  bad("{\"kind\":\"block_diag\",\"p\":2,\"blocks\":[[1,1]],\"repeat\":\"sometimes\"}");
  bad("{\"kind\":\"block_diag\",\"p\":2,\"blocks\":[[1,0]]}");
  bad("{\"kind\":\"direct_sum\",\"parts\":[]}");
  bad("{\"kind\":\"power\",\"k\":0,\"inner\":{\"kind\":\"left_shift\",\"p\":2}}");
  bad("{\"kind\":\"poly_of\",\"poly\":[1,1],\"inner\":{\"kind\":\"int_endo\",\"free_rank\":1,"
      "\"torsion\":[],\"matrix\":[[2]]}}");
  bad("{\"kind\":\"int_endo\",\"free_rank\":1,\"torsion\":[],\"matrix\":[[1,0],[0,1]]}");
  bad("{\"kind\":\"int_endo\",\"free_rank\":0,\"torsion\":[1],\"matrix\":[[1]]}");
  bad("{\"kind\":\"int_endo\",\"free_rank\":0,\"torsion\":[2],\"matrix\":[[\"x\"]]}");
}

TEST(JsonParse, SubgroupDescriptors) {
  OperatorDesc ls = OperatorDesc::left_shift(2);
  auto kernel = cofinite_from_json(Json::parse("{\"kind\":\"kernel\",\"rows\":[[[0,1]],[[1,1]]]}"), ls);
  EXPECT_EQ(std::get<FpKernelSub>(kernel).rows.size(), 2u);

  FgGroup g{0, {Int(4), Int(2)}};
  OperatorDesc ie = OperatorDesc::int_endo(FgEndo(g, IntMat::identity(2)));
  auto lat = cofinite_from_json(Json::parse("{\"kind\":\"lattice\",\"columns\":[[2,0]]}"), ie);
  EXPECT_EQ(std::get<LatticeSub>(lat).index().value(), Int(4));
  auto whole = cofinite_from_json(Json::parse("{\"kind\":\"whole\"}"), ie);
  EXPECT_EQ(std::get<LatticeSub>(whole).index().value(), Int(1));
  auto half = cofinite_from_json(Json::parse("{\"kind\":\"scaled\",\"m\":2}"), ie);
  EXPECT_EQ(std::get<LatticeSub>(half).index().value(), Int(4));

  auto span = finite_from_json(Json::parse("{\"kind\":\"span\",\"generators\":[[[0,1]]]}"), ls);
  EXPECT_EQ(std::get<FpSpanSub>(span).generators.size(), 1u);
  auto tg = finite_from_json(Json::parse("{\"kind\":\"torsion_gens\",\"generators\":[[2,1]]}"), ie);
  EXPECT_EQ(std::get<FiniteGensSub>(tg).generators.size(), 1u);

  EXPECT_THROW(cofinite_from_json(Json::parse("{\"kind\":\"kernel\",\"rows\":[]}"), ls), ParseError);
  EXPECT_THROW(cofinite_from_json(Json::parse("{\"kind\":\"kernel\",\"rows\":[[[0,1]]]}"), ie),
               ParseError);
  EXPECT_THROW(cofinite_from_json(Json::parse("{\"kind\":\"lattice\",\"columns\":[[2,0]]}"), ls),
               ParseError);
  EXPECT_THROW(finite_from_json(Json::parse("{\"kind\":\"span\",\"generators\":[]}"), ls),
               ParseError);
}

TEST(JsonTrace, SerializesBothRunFlavors) {
  OperatorDesc ls = OperatorDesc::left_shift(2);
  GrowthTrace t = cotrajectory_trace(ls, FpKernelSub{{FpVec::unit(2, IndexTag::Nat, 0)}}, 4);
  Json j = trace_to_json(t);
  EXPECT_EQ(j["c_log_p"], Json::parse("[1,2,3,4]"));
  EXPECT_EQ(j["alpha"], Json::parse("[2,2,2]"));

  FgGroup z{1, {}};
  OperatorDesc ie = OperatorDesc::int_endo(FgEndo(z, IntMat::from_rows({{2}})));
  GrowthTrace lt = cotrajectory_trace(ie, LatticeSub::scaled(z, 3), 3);
  Json lj = trace_to_json(lt);
  EXPECT_TRUE(lj.contains("counts"));
  EXPECT_FALSE(lj.contains("c_log_p"));
}

TEST(Cli, SpecComputeExamples) {
  auto r = run_cli("compute --op '{\"p\":2,\"kind\":\"left_shift\"}' --subgroup "
                   "'{\"kind\":\"kernel\",\"rows\":[[[0,1]]]}' --mode hstar");
  ASSERT_EQ(r.exit_code, 0);
  Json rep = Json::parse(r.out);
  EXPECT_EQ(rep["results"][0]["value"]["text"], "log 2");
  EXPECT_EQ(rep["results"][0]["trace"]["alpha_final"], Json(2));
  EXPECT_EQ(rep["results"][0]["trace"]["exact"], Json(true));

  auto rz = run_cli("compute --op '{\"p\":2,\"kind\":\"right_shift\"}' --subgroup "
                    "'{\"kind\":\"kernel\",\"rows\":[[[0,1]]]}' --mode hstar");
  ASSERT_EQ(rz.exit_code, 0);
  EXPECT_EQ(Json::parse(rz.out)["results"][0]["value"]["kind"], "zero");

  auto rh = run_cli("compute --mode h --op right_shift --finite-subgroup e0");
  ASSERT_EQ(rh.exit_code, 0);
  EXPECT_EQ(Json::parse(rh.out)["results"][0]["value"]["text"], "log 2");
}

TEST(Cli, ClassifyExamples) {
  auto shift = run_cli("classify --op left_shift");
  ASSERT_EQ(shift.exit_code, 0);
  Json sj = Json::parse(shift.out);
  EXPECT_EQ(sj["value"]["kind"], "infinite");
  EXPECT_EQ(sj["certificate"]["kind"], "non_algebraic");
  EXPECT_EQ(sj["certificate_verified"], Json(true));

  auto mult = run_cli(
      "classify --op '{\"kind\":\"int_endo\",\"free_rank\":1,\"torsion\":[],\"matrix\":[[3]]}'");
  ASSERT_EQ(mult.exit_code, 0);
  Json mj = Json::parse(mult.out);
  EXPECT_EQ(mj["value"]["kind"], "zero");
  EXPECT_EQ(mj["certificate"]["kind"], "narrow");

  auto fin = run_cli("classify --op '{\"kind\":\"finite_dim\",\"p\":3,\"matrix\":[[1,1],[0,1]]}'");
  ASSERT_EQ(fin.exit_code, 0);
  Json fj = Json::parse(fin.out);
  EXPECT_EQ(fj["value"]["kind"], "zero");
  EXPECT_EQ(fj["certificate"]["kind"], "algebraic");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("compute --op '{\"kind\":\"bogus\"}' --subgroup e0").exit_code, 1);
  EXPECT_EQ(run_cli("compute --op 'not json' --subgroup e0").exit_code, 1);
  EXPECT_EQ(run_cli("compute --op left_shift").exit_code, 1);
  EXPECT_EQ(run_cli("verify --suite unknown").exit_code, 1);
  EXPECT_EQ(run_cli("compute --op left_shift --subgroup e0 --steps 2").exit_code, 2);
  EXPECT_EQ(run_cli("verify --suite growth-laws --budget 15").exit_code, 0);
}

TEST(Cli, ReportsAreByteIdentical) {
  std::string args = "verify --suite dichotomy --seed 9 --budget 25";
  auto a = run_cli(args);
  auto b = run_cli(args);
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);

  auto c = run_cli("verify --suite dichotomy --seed 10 --budget 25");
  EXPECT_NE(a.out, c.out);  // echoed seed differs
}

TEST(Cli, VerifySuitesAllPass) {
  for (const char* suite : {"duality", "dichotomy", "addition", "growth-laws", "perp"}) {
    auto r = run_cli(std::string("verify --suite ") + suite + " --budget 30 --seed 1");
    EXPECT_EQ(r.exit_code, 0) << suite;
    Json j = Json::parse(r.out);
    EXPECT_EQ(j["failed"], Json(0)) << suite;
    EXPECT_GT(j["cases"].get<int>(), 0) << suite;
    EXPECT_TRUE(j["counterexample"].is_null()) << suite;
  }
}

TEST(Cli, TextFormat) {
  auto r = run_cli("compute --op left_shift --subgroup e0,e1 --format text");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("log 2"), std::string::npos);
  EXPECT_EQ(r.out.find("{"), std::string::npos);
}

TEST(Cli, DigestTracksInput) {
  auto a = Json::parse(run_cli("classify --op left_shift").out);
  auto b = Json::parse(run_cli("classify --op '{\"kind\":\"left_shift\",\"p\":2}'").out);
  EXPECT_EQ(a["input_digest"], b["input_digest"]);  // same normalized input
  auto c = Json::parse(run_cli("classify --op '{\"kind\":\"left_shift\",\"p\":3}'").out);
  EXPECT_NE(a["input_digest"], c["input_digest"]);
}
