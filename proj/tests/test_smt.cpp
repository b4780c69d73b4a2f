#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "facpl/analyzer.hpp"
#include "facpl/parser.hpp"
#include "facpl/smt.hpp"
#include "testutil.hpp"

using namespace facpl;

namespace {

const DomainSpec& banking() {
  static const DomainSpec d = parse_domain(testutil::fixture("banking.dom"));
  return d;
}

const EngineConfig& cfg() {
  static const EngineConfig c = parse_config(testutil::fixture("banking.cfg"));
  return c;
}

std::string solver() { return default_solver(SOLVER_BIN); }

Decision formula_decision(const DecisionFormulas& f, const Request& r, const DomainSpec& dom) {
  int hits = 0;
  Decision out = Decision::indeterminate;
  for (Decision d : {Decision::permit, Decision::deny, Decision::not_applicable,
                     Decision::indeterminate}) {
    if (formula_holds(*f.of(d), r, dom)) {
      ++hits;
      out = d;
    }
  }
  REQUIRE(hits == 1);  // the four formulas partition the request space
  return out;
}

}  // namespace

TEST_CASE("encoding agrees with the evaluator on every request (fixtures)") {
  for (const char* name : {"policy_a.facpl", "policy_b.facpl", "policy_c.facpl"}) {
    CAPTURE(name);
    auto p = parse_policy(testutil::fixture(name));
    auto f = encode(p, banking(), cfg());
    for (const auto& r : enumerate_requests(banking()))
      CHECK(formula_decision(f, r, banking()) == eval_any(p, r, cfg()));
  }
}

TEST_CASE("encoding agrees with the evaluator on random policies and domains") {
  testutil::Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    auto dom = testutil::random_domain(rng);
    auto p = testutil::domain_policy(rng, dom, 2);
    auto f = encode(PolicyOrPdp(p), dom, cfg());
    for (const auto& r : enumerate_requests(dom))
      CHECK(formula_decision(f, r, dom) == eval_policy(*p, r, cfg()));
  }
}

TEST_CASE("references to values outside the universe are rejected") {
  DomainSpec d;
  d.add({{"action", "id"}, AttrKind::string, {Value("read"), Value("write")}, true});
  auto p = parse_policy("( permit target: equal(action/id, \"approve\") )");
  CHECK_THROWS_AS(encode(p, d, cfg()), EncodeError);
  auto q = parse_policy("( permit target: equal(action/id, \"read\") )");
  CHECK_NOTHROW(encode(q, d, cfg()));
  // attributes not declared in the domain are rejected too
  auto u = parse_policy("( permit target: equal(quux/id, \"read\") )");
  CHECK_THROWS_AS(encode(u, d, cfg()), EncodeError);
}

TEST_CASE("emitted scripts are byte-identical across runs") {
  auto p = parse_policy(testutil::fixture("policy_c.facpl"));
  auto f1 = encode(p, banking(), cfg());
  auto f2 = encode(p, banking(), cfg());
  auto s1 = emit_smtlib(f1, QueryReach{Decision::permit}, banking());
  auto s2 = emit_smtlib(f2, QueryReach{Decision::permit}, banking());
  CHECK(s1 == s2);
  CHECK(s1.find("(set-logic QF_LIRA)") == 0);
  CHECK(s1.find("(check-sat)") != std::string::npos);
}

TEST_CASE("the solver settles trivial scripts") {
  auto sat = solve("(set-logic QF_LIRA)(declare-const x Bool)(assert x)(check-sat)(get-model)",
                   solver());
  CHECK(sat.verdict == SatVerdict::sat);
  auto unsat = solve(
      "(set-logic QF_LIRA)(declare-const x Bool)(assert x)(assert (not x))(check-sat)",
      solver());
  CHECK(unsat.verdict == SatVerdict::unsat);
}

TEST_CASE("a missing solver raises a solver error") {
  CHECK_THROWS_AS(solve("(check-sat)", "/nonexistent/solver-binary"), SolverError);
}

TEST_CASE("reachability of not-applicable: policy A sat, policy B unsat") {
  auto a = encode(parse_policy(testutil::fixture("policy_a.facpl")), banking(), cfg());
  auto res = solve(emit_smtlib(a, QueryReach{Decision::not_applicable}, banking()), solver());
  REQUIRE(res.verdict == SatVerdict::sat);
  // the model decodes to a request on which the evaluator confirms the decision
  Request witness = decode_model(res.model_text, banking());
  CHECK(eval_any(parse_policy(testutil::fixture("policy_a.facpl")), witness, cfg()) ==
        Decision::not_applicable);

  auto b = encode(parse_policy(testutil::fixture("policy_b.facpl")), banking(), cfg());
  auto res_b = solve(emit_smtlib(b, QueryReach{Decision::not_applicable}, banking()), solver());
  CHECK(res_b.verdict == SatVerdict::unsat);
}

TEST_CASE("permit reachability witnesses re-evaluate to permit") {
  for (const char* name : {"policy_a.facpl", "policy_b.facpl", "policy_c.facpl"}) {
    CAPTURE(name);
    auto p = parse_policy(testutil::fixture(name));
    auto f = encode(p, banking(), cfg());
    auto res = solve(emit_smtlib(f, QueryReach{Decision::permit}, banking()), solver());
    REQUIRE(res.verdict == SatVerdict::sat);
    CHECK(eval_any(p, decode_model(res.model_text, banking()), cfg()) == Decision::permit);
  }
}

TEST_CASE("solver and enumerator agree on completeness and disjointness") {
  // completeness: sat for the complete query means some request is not-applicable
  for (const char* name : {"policy_a.facpl", "policy_b.facpl", "policy_c.facpl"}) {
    CAPTURE(name);
    auto p = parse_policy(testutil::fixture(name));
    auto f = encode(p, banking(), cfg());
    auto res = solve(emit_smtlib(f, QueryComplete{}, banking()), solver());
    bool complete_by_enum = check_completeness(p, banking(), cfg()).holds;
    CHECK((res.verdict == SatVerdict::unsat) == complete_by_enum);
  }

  auto read_rule = parse_policy("( permit target: equal(action/id, \"read\") )");
  auto write_rule = parse_policy("( permit target: equal(action/id, \"write\") )");
  auto fr = encode(read_rule, banking(), cfg());
  auto fw = encode(write_rule, banking(), cfg());
  auto disjoint = solve(emit_smtlib(fr, QueryDisjoint{fw}, banking()), solver());
  CHECK(disjoint.verdict == SatVerdict::unsat);
  CHECK(check_disjointness(read_rule, write_rule, banking(), cfg()).holds);

  auto self = solve(emit_smtlib(fr, QueryDisjoint{fr}, banking()), solver());
  CHECK(self.verdict == SatVerdict::sat);
  CHECK_FALSE(check_disjointness(read_rule, read_rule, banking(), cfg()).holds);
}

TEST_CASE("solver verdicts match the enumerator on random encodable policies") {
  testutil::Rng rng(77);
  for (int trial = 0; trial < 12; ++trial) {
    auto dom = testutil::random_domain(rng);
    auto p = testutil::domain_policy(rng, dom, 2);
    auto f = encode(PolicyOrPdp(p), dom, cfg());
    auto res = solve(emit_smtlib(f, QueryReach{Decision::permit}, dom), solver());
    bool reachable = false;
    for (const auto& r : enumerate_requests(dom))
      if (eval_policy(*p, r, cfg()) == Decision::permit) reachable = true;
    CAPTURE(print_policy(*p));
    CHECK((res.verdict == SatVerdict::sat) == reachable);
    if (res.verdict == SatVerdict::sat)
      CHECK(eval_policy(*p, decode_model(res.model_text, dom), cfg()) == Decision::permit);
  }
}

TEST_CASE("enforcement queries via constraints match the analyzer") {
  auto c = parse_policy(testutil::fixture("policy_c.facpl"));
  auto f = encode(c, banking(), cfg());
  auto members =
      encode_constraint(parse_constraint(testutil::fixture("conj_nonsecure.spec")),
                        banking(), cfg());
  // sat would mean: some nonsecure request is permitted — C forbids that
  auto res = solve(emit_smtlib(f, QueryEnforce{members, Decision::permit}, banking()), solver());
  CHECK(res.verdict == SatVerdict::unsat);

  auto b = parse_policy(testutil::fixture("policy_b.facpl"));
  auto fb = encode(b, banking(), cfg());
  auto res_b =
      solve(emit_smtlib(fb, QueryEnforce{members, Decision::permit}, banking()), solver());
  REQUIRE(res_b.verdict == SatVerdict::sat);
  Request witness = decode_model(res_b.model_text, banking());
  CHECK(eval_any(b, witness, cfg()) == Decision::permit);
}

TEST_CASE("the environment override picks the solver command") {
  CHECK(default_solver("fallback") == (std::getenv("FACPL_SMT_SOLVER")
                                           ? std::getenv("FACPL_SMT_SOLVER")
                                           : std::string("fallback")));
}
