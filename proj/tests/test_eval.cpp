#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>

#include "facpl/eval.hpp"
#include "facpl/parser.hpp"
#include "testutil.hpp"

using namespace facpl;

namespace {

constexpr Decision P = Decision::permit;
constexpr Decision D = Decision::deny;
constexpr Decision NA = Decision::not_applicable;
constexpr Decision I = Decision::indeterminate;

const std::array<Decision, 4> kAll = {P, D, NA, I};

Decision swap_pd(Decision d) { return d == P ? D : d == D ? P : d; }

ExprResult eval_str(const std::string& text, const Request& r, const EngineConfig& cfg = {}) {
  return eval_expr(*parse_constraint(text), r, cfg);
}

Request req(std::initializer_list<std::pair<AttrName, Value>> entries) {
  return Request::from_entries(std::vector<std::pair<AttrName, Value>>(entries));
}

// Enumerates all decision vectors of the given length.
template <typename Fn>
void for_all_vectors(std::size_t len, Fn&& fn) {
  std::vector<Decision> ds(len, P);
  std::vector<std::size_t> idx(len, 0);
  while (true) {
    for (std::size_t i = 0; i < len; ++i) ds[i] = kAll[idx[i]];
    fn(std::as_const(ds));
    std::size_t i = 0;
    for (; i < len; ++i) {
      if (++idx[i] < 4) break;
      idx[i] = 0;
    }
    if (i == len) return;
  }
}

}  // namespace

TEST_CASE("permit-overrides pairwise matrix: all 16 entries") {
  // rows: first decision; columns: second; order permit, deny, NA, indeterminate
  const Decision expected[4][4] = {
      {P, P, P, P},
      {P, D, D, I},
      {P, D, NA, I},
      {P, I, I, I},
  };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(permit_overrides_pair(kAll[i], kAll[j]) == expected[i][j]);
    }
}

TEST_CASE("permit-overrides fold is associative and commutative") {
  for (Decision a : kAll)
    for (Decision b : kAll) {
      CHECK(permit_overrides_pair(a, b) == permit_overrides_pair(b, a));
      for (Decision c : kAll)
        CHECK(permit_overrides_pair(permit_overrides_pair(a, b), c) ==
              permit_overrides_pair(a, permit_overrides_pair(b, c)));
    }
}

TEST_CASE("deny-overrides is the permit/deny dual of permit-overrides") {
  for (std::size_t len = 1; len <= 4; ++len)
    for_all_vectors(len, [&](const std::vector<Decision>& ds) {
      std::vector<Decision> swapped(ds.size());
      std::transform(ds.begin(), ds.end(), swapped.begin(), swap_pd);
      CHECK(combine(CombAlg::deny_overrides, ds) ==
            swap_pd(combine(CombAlg::permit_overrides, swapped)));
    });
}

TEST_CASE("combine examples") {
  using V = std::vector<Decision>;
  CHECK(combine(CombAlg::permit_overrides, V{D, P}) == P);
  CHECK(combine(CombAlg::permit_overrides, V{D, I}) == I);
  CHECK(combine(CombAlg::deny_unless_permit, V{NA, I, D}) == D);
  CHECK(combine(CombAlg::deny_unless_permit, V{NA, P, D}) == P);
  CHECK(combine(CombAlg::permit_unless_deny, V{NA, I}) == P);
  CHECK(combine(CombAlg::strong_consensus, V{P, NA}) == I);
  CHECK(combine(CombAlg::strong_consensus, V{P, P}) == P);
  CHECK(combine(CombAlg::strong_consensus, V{NA, NA}) == NA);
  CHECK(combine(CombAlg::first_applicable, V{NA, D, P}) == D);
  CHECK(combine(CombAlg::first_applicable, V{NA, I, P}) == I);  // errors are not skipped
  CHECK(combine(CombAlg::first_applicable, V{NA, NA}) == NA);
  CHECK(combine(CombAlg::only_one_applicable, V{NA, P, NA}) == P);
  CHECK(combine(CombAlg::only_one_applicable, V{P, D}) == I);
  CHECK(combine(CombAlg::only_one_applicable, V{NA, NA}) == NA);
  CHECK(combine(CombAlg::only_one_applicable, V{P, I}) == I);
  CHECK(combine(CombAlg::weak_consensus, V{P, NA, P}) == P);
  CHECK(combine(CombAlg::weak_consensus, V{D, NA}) == D);
  CHECK(combine(CombAlg::weak_consensus, V{P, D}) == I);
  CHECK(combine(CombAlg::weak_consensus, V{NA, NA}) == NA);
  CHECK_THROWS_AS(combine(CombAlg::permit_overrides, std::span<const Decision>{}),
                  std::invalid_argument);
}

TEST_CASE("first-applicable is order-sensitive") {
  using V = std::vector<Decision>;
  CHECK(combine(CombAlg::first_applicable, V{P, D}) !=
        combine(CombAlg::first_applicable, V{D, P}));
}

TEST_CASE("deny-unless-permit and permit-unless-deny are always conclusive") {
  for (std::size_t len = 1; len <= 4; ++len)
    for_all_vectors(len, [&](const std::vector<Decision>& ds) {
      for (CombAlg alg : {CombAlg::deny_unless_permit, CombAlg::permit_unless_deny}) {
        Decision d = combine(alg, ds);
        CHECK((d == P || d == D));
      }
      // they are also duals of each other
      std::vector<Decision> swapped(ds.size());
      std::transform(ds.begin(), ds.end(), swapped.begin(), swap_pd);
      CHECK(combine(CombAlg::permit_unless_deny, ds) ==
            swap_pd(combine(CombAlg::deny_unless_permit, swapped)));
    });
}

TEST_CASE("three-valued logic over bool, absent and error") {
  Request empty;
  auto yes = req({{{"a", "x"}, Value(true)}});
  // absent short-circuits per Kleene
  CHECK(is_false(eval_str("and(false, subject/id)", empty)));
  CHECK(is_absent(eval_str("and(true, subject/id)", empty)));
  CHECK(is_true(eval_str("or(true, subject/id)", empty)));
  CHECK(is_absent(eval_str("or(false, subject/id)", empty)));
  CHECK(is_absent(eval_str("not(subject/id)", empty)));
  // error dominates absent
  CHECK(is_error(eval_str("and(divide(1, 0), subject/id)", empty)));
  CHECK(is_error(eval_str("or(subject/id, divide(1, 0))", empty)));
  // a non-boolean operand is an error even when the other operand decides
  CHECK(is_error(eval_str("and(false, 3)", empty)));
  CHECK(is_error(eval_str("or(true, \"x\")", empty)));
  CHECK(is_true(eval_str("a/x", yes)));
}

TEST_CASE("comparison and arithmetic semantics") {
  Request empty;
  CHECK(is_true(eval_str("equal(2, add(1, 1))", empty)));
  CHECK(is_false(eval_str("equal(\"a\", \"b\")", empty)));
  CHECK(is_error(eval_str("equal(1, \"a\")", empty)));  // kind mismatch is an error
  CHECK(is_true(eval_str("greater-than(3, 2)", empty)));
  CHECK(is_error(eval_str("greater-than(true, false)", empty)));
  CHECK(is_true(eval_str("equal(divide(subtract(7, 1), multiply(2, 1.5)), 2)", empty)));
  CHECK(is_error(eval_str("divide(1, 0)", empty)));
  CHECK(is_error(eval_str("divide(1, subtract(2, 2))", empty)));
  CHECK(is_true(eval_str("equal(2021-06-30, 2021-06-30)", empty)));
  CHECK(is_error(eval_str("add(2021-06-30, 1)", empty)));
}

TEST_CASE("membership over value sets") {
  auto r = req({{{"resource", "ids"}, Value("clerk1")},
                {{"resource", "ids"}, Value("clerk2")},
                {{"subject", "id"}, Value("clerk1")}});
  CHECK(is_true(eval_str("in(subject/id, resource/ids)", r)));
  CHECK(is_false(eval_str("in(\"clerk3\", resource/ids)", r)));
  CHECK(is_true(eval_str("in(subject/id, {\"clerk1\", \"zz\"})", r)));
  // a set-valued left operand is a kind mismatch
  CHECK(is_error(eval_str("in(resource/ids, {\"clerk1\", \"clerk2\"})", r)));
  CHECK(is_error(eval_str("in(1, resource/ids)", r)));    // kind mismatch
  // a plain value on the right acts as a singleton set
  CHECK(is_true(eval_str("in(\"clerk1\", subject/id)", r)));
  CHECK(is_absent(eval_str("in(subject/id, action/x)", r)));
}

TEST_CASE("leq and sub-role consult the engine config") {
  auto cfg = EngineConfig::make({{"L1", "L2"}}, {{"assistant", "clerk"}});
  Request empty;
  CHECK(is_true(eval_str("leq(\"L1\", \"L2\")", empty, cfg)));
  CHECK(is_false(eval_str("leq(\"L2\", \"L1\")", empty, cfg)));
  CHECK(is_error(eval_str("leq(\"L1\", \"L9\")", empty, cfg)));  // unknown level
  CHECK(is_true(eval_str("sub-role(\"assistant\", \"clerk\")", empty, cfg)));
  CHECK(is_false(eval_str("sub-role(\"clerk\", \"assistant\")", empty, cfg)));
  CHECK(is_error(eval_str("sub-role(\"nobody\", \"clerk\")", empty, cfg)));
  CHECK(is_error(eval_str("leq(\"L1\", \"L2\")", empty, EngineConfig{})));  // no levels defined
}

TEST_CASE("rule clause: target drives effect, not-applicable or indeterminate") {
  EngineConfig cfg;
  auto permit_rule = Policy::make_rule(Effect::permit, parse_constraint("subject/ok"));
  auto ok = req({{{"subject", "ok"}, Value(true)}});
  auto not_ok = req({{{"subject", "ok"}, Value(false)}});
  auto broken = req({{{"subject", "ok"}, Value(3.0)}});
  CHECK(eval_policy(*permit_rule, ok, cfg) == P);
  CHECK(eval_policy(*permit_rule, not_ok, cfg) == NA);
  CHECK(eval_policy(*permit_rule, Request{}, cfg) == NA);  // absent target
  CHECK(eval_policy(*permit_rule, broken, cfg) == I);      // non-boolean target
  auto err_rule = Policy::make_rule(Effect::deny, parse_constraint("divide(1, 0)"));
  CHECK(eval_policy(*err_rule, ok, cfg) == I);
}

TEST_CASE("policy-set clause: target gates the combination") {
  EngineConfig cfg;
  auto p = std::get<PolicyPtr>(parse_policy(
      "{ deny-unless-permit target: subject/ok policies: ( permit target: false ) }"));
  CHECK(eval_policy(*p, req({{{"subject", "ok"}, Value(true)}}), cfg) == D);
  CHECK(eval_policy(*p, req({{{"subject", "ok"}, Value(false)}}), cfg) == NA);
  CHECK(eval_policy(*p, Request{}, cfg) == NA);                             // absent
  CHECK(eval_policy(*p, req({{{"subject", "ok"}, Value(1.0)}}), cfg) == I); // non-boolean
}

TEST_CASE("pdp evaluation combines top-level policies") {
  EngineConfig cfg;
  auto pdp = parse_policy(
      "pdp { strong-consensus policies: ( permit target: true ) ( deny target: true ) }");
  CHECK(eval_any(pdp, Request{}, cfg) == I);
  auto pdp2 = parse_policy(
      "pdp { permit-overrides policies: ( deny target: true ) ( permit target: true ) }");
  CHECK(eval_any(pdp2, Request{}, cfg) == P);
}

TEST_CASE("evaluation is total and pure over random ASTs and requests") {
  testutil::Rng rng(99);
  EngineConfig cfg = EngineConfig::make({{"L1", "L2"}}, {{"assistant", "clerk"}});
  for (int trial = 0; trial < 3000; ++trial) {
    auto p = testutil::random_policy(rng, 3);
    auto r = testutil::random_request(rng);
    Decision d1 = eval_policy(*p, r, cfg);
    Decision d2 = eval_policy(*p, r, cfg);
    CHECK(d1 == d2);
    CHECK((d1 == P || d1 == D || d1 == NA || d1 == I));
  }
}
