#pragma once

#include <string>

#include "facpl/analyzer.hpp"
#include "facpl/parser.hpp"

namespace facpl::casestudy {

// Bundled banking fixtures: three combinations of the no-read-up and DAC
// rules for read access to the loan request document, over a small finite
// domain. Kept in sync with the files under fixtures/.

inline constexpr const char* kDomain = R"(// loan-document request space
subject/id : string in {clerk1, clerk2} required
subject/level : string in {L1, L2, L3} required
resource/id : string in {loanDoc} required
resource/level : string in {L1, L2, L3} required
action/id : string in {read, write, submit, approve} required
resource/read.ids : set-of-string in {clerk1, clerk2} required
)";

inline constexpr const char* kConfig = R"(levels:
  L1 <= L2
  L2 <= L3
roles:
  assistant -> clerk
  officier -> clerk
)";

// permit-overrides over the two rules: nonsecure reads fall through to
// not-applicable instead of deny.
inline constexpr const char* kPolicyA = R"({ permit-overrides
  target: and(equal(resource/id, "loanDoc"), in(subject/id, {"clerk1", "clerk2"}))
  policies:
    ( permit target: and(equal(action/id, "read"), leq(resource/level, subject/level)) )
    ( permit target: and(equal(action/id, "read"), in(subject/id, resource/read.ids)) )
}
)";

// deny-unless-permit, flat: defaults to deny, but either rule alone is
// enough to permit, so the two properties are not enforced jointly.
inline constexpr const char* kPolicyB = R"({ deny-unless-permit
  target: and(equal(resource/id, "loanDoc"), in(subject/id, {"clerk1", "clerk2"}))
  policies:
    ( permit target: and(equal(action/id, "read"), leq(resource/level, subject/level)) )
    ( permit target: and(equal(action/id, "read"), in(subject/id, resource/read.ids)) )
}
)";

// deny-unless-permit over a strong-consensus layer: permit requires both
// rules to apply, everything else is denied.
inline constexpr const char* kPolicyC = R"({ deny-unless-permit
  policies:
    { strong-consensus
      target: and(equal(resource/id, "loanDoc"), in(subject/id, {"clerk1", "clerk2"}))
      policies:
        ( permit target: and(equal(action/id, "read"), leq(resource/level, subject/level)) )
        ( permit target: and(equal(action/id, "read"), in(subject/id, resource/read.ids)) )
    }
}
)";

inline constexpr const char* kNruSecure =
    R"(and(equal(action/id, "read"), leq(resource/level, subject/level))
)";

inline constexpr const char* kNruNonsecure =
    R"(and(equal(action/id, "read"), not(leq(resource/level, subject/level)))
)";

inline constexpr const char* kConjSecure =
    R"(and(equal(action/id, "read"), and(leq(resource/level, subject/level), in(subject/id, resource/read.ids)))
)";

inline constexpr const char* kConjNonsecure =
    R"(and(equal(action/id, "read"), not(and(leq(resource/level, subject/level), in(subject/id, resource/read.ids))))
)";

struct Outcome {
  CheckReport a_enforcement;   // expected: violated, with a not-applicable witness
  CheckReport b_enforcement;   // expected: violated, with a permit-despite-deny witness
  CheckReport c_enforcement;   // expected: holds
  CheckReport c_least_privilege;  // expected: holds

  bool a_has_na_witness = false;
  bool b_has_circumvention_witness = false;

  bool as_expected() const {
    return !a_enforcement.holds && a_has_na_witness && !b_enforcement.holds &&
           b_has_circumvention_witness && c_enforcement.holds && c_least_privilege.holds;
  }
};

inline Outcome run(std::size_t witness_cap = kDefaultWitnessCap) {
  DomainSpec dom = parse_domain(kDomain);
  EngineConfig cfg = parse_config(kConfig);
  PolicyOrPdp a = parse_policy(kPolicyA);
  PolicyOrPdp b = parse_policy(kPolicyB);
  PolicyOrPdp c = parse_policy(kPolicyC);

  RequestSetSpec nru_secure{dom, parse_constraint(kNruSecure)};
  RequestSetSpec nru_nonsecure{dom, parse_constraint(kNruNonsecure)};
  RequestSetSpec conj_secure{dom, parse_constraint(kConjSecure)};
  RequestSetSpec conj_nonsecure{dom, parse_constraint(kConjNonsecure)};

  Outcome out{
      check_enforcement(a, nru_secure, nru_nonsecure, cfg, kDefaultCap, witness_cap),
      check_enforcement(b, conj_secure, conj_nonsecure, cfg, kDefaultCap, witness_cap),
      check_enforcement(c, conj_secure, conj_nonsecure, cfg, kDefaultCap, witness_cap),
      check_least_privilege(c, conj_secure, cfg, kDefaultCap, witness_cap),
  };
  for (const auto& w : out.a_enforcement.witnesses)
    for (Decision d : w.observed)
      if (d == Decision::not_applicable) out.a_has_na_witness = true;
  for (const auto& w : out.b_enforcement.witnesses)
    if (w.expected == "deny")
      for (Decision d : w.observed)
        if (d == Decision::permit) out.b_has_circumvention_witness = true;
  return out;
}

inline std::string render_text(const Outcome& o) {
  auto first_witness = [](const CheckReport& r) {
    return r.witnesses.empty() ? std::string("-") : print_request(r.witnesses.front().request);
  };
  std::string out;
  out += std::string("A: enforcement ") + (o.a_enforcement.holds ? "HOLDS" : "FAILS") +
         (o.a_has_na_witness ? " (not-applicable witness: " + first_witness(o.a_enforcement) + ")"
                             : "") +
         "\n";
  out += std::string("B: enforcement ") + (o.b_enforcement.holds ? "HOLDS" : "FAILS") +
         (o.b_has_circumvention_witness
              ? " (circumvention witness: " + first_witness(o.b_enforcement) + ")"
              : "") +
         "\n";
  out += std::string("C: enforcement ") + (o.c_enforcement.holds ? "HOLDS" : "FAILS") +
         ", least-privilege " + (o.c_least_privilege.holds ? "HOLDS" : "FAILS") + "\n";
  return out;
}

inline std::string render_tsv(const Outcome& o) {
  auto row = [](const char* policy, const CheckReport& r) {
    return std::string(policy) + "\t" + to_string(r.property) + "\t" +
           (r.holds ? "true" : "false") + "\t" + std::to_string(r.witnesses.size()) + "\n";
  };
  return row("A", o.a_enforcement) + row("B", o.b_enforcement) + row("C", o.c_enforcement) +
         row("C", o.c_least_privilege);
}

}  // namespace facpl::casestudy
