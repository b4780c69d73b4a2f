#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "facpl/domain.hpp"
#include "facpl/eval.hpp"
#include "facpl/policy.hpp"
#include "facpl/printer.hpp"
#include "facpl/types.hpp"

namespace facpl {

// Thrown when a finite domain induces more requests than the configured cap.
class CapError : public std::runtime_error {
 public:
  explicit CapError(unsigned long long cap)
      : std::runtime_error("request space exceeds cap of " + std::to_string(cap)),
        cap_(cap) {}
  unsigned long long cap() const { return cap_; }

 private:
  unsigned long long cap_;
};

inline constexpr unsigned long long kDefaultCap = 10'000'000;

// ---------------------------------------------------------------------------
// Exhaustive request enumeration
// ---------------------------------------------------------------------------

namespace detail {

// Enumeration options for one attribute, in deterministic order: universe
// values first (non-empty subsets by increasing bitmask for set kinds),
// Absent last when allowed.
inline std::vector<std::optional<Attribute>> attr_options(const AttrDomain& a) {
  std::vector<std::optional<Attribute>> opts;
  if (a.kind == AttrKind::string_set) {
    unsigned long long n = 1ULL << a.universe.size();
    for (unsigned long long mask = 1; mask < n; ++mask) {
      std::vector<Value> elems;
      for (std::size_t j = 0; j < a.universe.size(); ++j)
        if (mask & (1ULL << j)) elems.push_back(a.universe[j]);
      opts.emplace_back(ValueSet::of(std::move(elems)));
    }
  } else {
    for (const auto& v : a.universe) opts.emplace_back(v);
  }
  if (a.allow_absent) opts.emplace_back(std::nullopt);
  return opts;
}

}  // namespace detail

// Visits every request of the finite domain in deterministic lexicographic
// order (first declared attribute most significant). Throws CapError when the
// analytic product of option counts exceeds `cap`.
inline void enumerate_requests(const DomainSpec& domain,
                               const std::function<void(const Request&)>& fn,
                               unsigned long long cap = kDefaultCap) {
  if (domain.request_count(cap) > cap) throw CapError(cap);

  std::vector<std::vector<std::optional<Attribute>>> options;
  options.reserve(domain.attrs.size());
  for (const auto& a : domain.attrs) options.push_back(detail::attr_options(a));

  std::vector<std::size_t> odometer(options.size(), 0);
  while (true) {
    Request r;
    for (std::size_t i = 0; i < options.size(); ++i)
      if (options[i][odometer[i]]) r.bind(domain.attrs[i].name, *options[i][odometer[i]]);
    fn(r);
    std::size_t i = options.size();
    while (i > 0) {
      --i;
      if (++odometer[i] < options[i].size()) break;
      odometer[i] = 0;
      if (i == 0) return;
    }
    if (options.empty()) return;  // empty domain has exactly one (empty) request
  }
}

inline std::vector<Request> enumerate_requests(const DomainSpec& domain,
                                               unsigned long long cap = kDefaultCap) {
  std::vector<Request> out;
  enumerate_requests(domain, [&](const Request& r) { out.push_back(r); }, cap);
  return out;
}

// ---------------------------------------------------------------------------
// Check reports
// ---------------------------------------------------------------------------

enum class Property {
  enforcement,
  least_privilege,
  completeness,
  redundancy,
  disjointness,
  coverage,
};

inline const char* to_string(Property p) {
  switch (p) {
    case Property::enforcement: return "enforcement";
    case Property::least_privilege: return "least-privilege";
    case Property::completeness: return "completeness";
    case Property::redundancy: return "redundancy";
    case Property::disjointness: return "disjointness";
    case Property::coverage: return "coverage";
  }
  return "?";
}

struct Witness {
  Request request;
  std::vector<Decision> observed;
  std::string expected;
  std::string note;  // set for spec-defect witnesses (constraint errors)
};

struct CheckStats {
  unsigned long long examined = 0;
  unsigned long long violations = 0;  // total, beyond the witness cap
  unsigned long long membership_warnings = 0;
  double elapsed_ms = 0;
};

struct CheckReport {
  Property property;
  bool holds = true;
  std::vector<Witness> witnesses;
  CheckStats stats;
};

inline constexpr std::size_t kDefaultWitnessCap = 10;

namespace detail {

struct ReportBuilder {
  CheckReport report;
  std::size_t witness_cap;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  ReportBuilder(Property p, std::size_t cap) : witness_cap(cap) { report.property = p; }

  void violation(const Request& r, std::vector<Decision> observed, std::string expected,
                 std::string note = {}) {
    report.holds = false;
    ++report.stats.violations;
    if (report.witnesses.size() < witness_cap)
      report.witnesses.push_back({r, std::move(observed), std::move(expected), std::move(note)});
  }

  CheckReport finish() {
    report.stats.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return std::move(report);
  }
};

enum class Membership { in, out, error };

inline Membership member_of(const ExprPtr& constraint, const Request& r,
                            const EngineConfig& cfg, CheckStats& stats) {
  ExprResult res = eval_expr(*constraint, r, cfg);
  if (is_true(res)) return Membership::in;
  if (is_error(res)) return Membership::error;
  if (is_absent(res)) ++stats.membership_warnings;  // conservative non-member
  return Membership::out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Security-enforcement checks
// ---------------------------------------------------------------------------

// Holds iff every request in the permit set evaluates to permit and every
// request in the deny set evaluates to deny. A constraint that errors on some
// request is itself reported as a spec-defect witness.
inline CheckReport check_enforcement(const PolicyOrPdp& p, const RequestSetSpec& permit_set,
                                     const RequestSetSpec& deny_set, const EngineConfig& cfg,
                                     unsigned long long cap = kDefaultCap,
                                     std::size_t witness_cap = kDefaultWitnessCap) {
  detail::ReportBuilder b(Property::enforcement, witness_cap);
  enumerate_requests(permit_set.domain, [&](const Request& r) {
    ++b.report.stats.examined;
    auto mp = detail::member_of(permit_set.constraint, r, cfg, b.report.stats);
    auto md = detail::member_of(deny_set.constraint, r, cfg, b.report.stats);
    if (mp == detail::Membership::error || md == detail::Membership::error) {
      b.violation(r, {}, "boolean constraint", "request-set constraint error");
      return;
    }
    if (mp == detail::Membership::in) {
      Decision d = eval_any(p, r, cfg);
      if (d != Decision::permit) b.violation(r, {d}, "permit");
    }
    if (md == detail::Membership::in) {
      Decision d = eval_any(p, r, cfg);
      if (d != Decision::deny) b.violation(r, {d}, "deny");
    }
  }, cap);
  return b.finish();
}

// Least privilege: permit-set members must permit, everything else must deny.
inline CheckReport check_least_privilege(const PolicyOrPdp& p, const RequestSetSpec& permit_set,
                                         const EngineConfig& cfg,
                                         unsigned long long cap = kDefaultCap,
                                         std::size_t witness_cap = kDefaultWitnessCap) {
  detail::ReportBuilder b(Property::least_privilege, witness_cap);
  enumerate_requests(permit_set.domain, [&](const Request& r) {
    ++b.report.stats.examined;
    auto m = detail::member_of(permit_set.constraint, r, cfg, b.report.stats);
    if (m == detail::Membership::error) {
      b.violation(r, {}, "boolean constraint", "request-set constraint error");
      return;
    }
    Decision d = eval_any(p, r, cfg);
    Decision want = m == detail::Membership::in ? Decision::permit : Decision::deny;
    if (d != want) b.violation(r, {d}, to_string(want));
  }, cap);
  return b.finish();
}

// ---------------------------------------------------------------------------
// Structural checks
// ---------------------------------------------------------------------------

// Holds iff no request evaluates to not-applicable; in strict mode
// indeterminate is rejected as well.
inline CheckReport check_completeness(const PolicyOrPdp& p, const DomainSpec& domain,
                                      const EngineConfig& cfg, bool strict = false,
                                      unsigned long long cap = kDefaultCap,
                                      std::size_t witness_cap = kDefaultWitnessCap) {
  detail::ReportBuilder b(Property::completeness, witness_cap);
  enumerate_requests(domain, [&](const Request& r) {
    ++b.report.stats.examined;
    Decision d = eval_any(p, r, cfg);
    if (d == Decision::not_applicable || (strict && d == Decision::indeterminate))
      b.violation(r, {d}, strict ? "permit or deny" : "any decision but not-applicable");
  }, cap);
  return b.finish();
}

namespace detail {

inline PolicyOrPdp without_child(const PolicyOrPdp& container, std::size_t idx) {
  auto drop = [idx](const std::vector<PolicyPtr>& children) {
    if (children.size() < 2)
      throw std::invalid_argument("cannot remove the only child of a container");
    if (idx >= children.size()) throw std::invalid_argument("child index out of range");
    std::vector<PolicyPtr> out;
    for (std::size_t i = 0; i < children.size(); ++i)
      if (i != idx) out.push_back(children[i]);
    return out;
  };
  if (const auto* pol = std::get_if<PolicyPtr>(&container)) {
    if ((*pol)->is_rule()) throw std::invalid_argument("a rule has no children to remove");
    const PolicySet& s = (*pol)->set();
    return Policy::make_set(s.alg, s.target, drop(s.children));
  }
  const Pdp& pdp = std::get<Pdp>(container);
  return Pdp{pdp.alg, drop(pdp.policies)};
}

}  // namespace detail

// Holds iff the container and the container with child `idx` removed decide
// every request identically, i.e. the child is redundant.
inline CheckReport check_redundancy(const PolicyOrPdp& container, std::size_t idx,
                                    const DomainSpec& domain, const EngineConfig& cfg,
                                    unsigned long long cap = kDefaultCap,
                                    std::size_t witness_cap = kDefaultWitnessCap) {
  PolicyOrPdp reduced = detail::without_child(container, idx);
  detail::ReportBuilder b(Property::redundancy, witness_cap);
  enumerate_requests(domain, [&](const Request& r) {
    ++b.report.stats.examined;
    Decision with = eval_any(container, r, cfg);
    Decision without = eval_any(reduced, r, cfg);
    if (with != without) b.violation(r, {with, without}, "identical decisions");
  }, cap);
  return b.finish();
}

// Holds iff no request makes both policies land in {permit, deny}.
inline CheckReport check_disjointness(const PolicyOrPdp& p1, const PolicyOrPdp& p2,
                                      const DomainSpec& domain, const EngineConfig& cfg,
                                      unsigned long long cap = kDefaultCap,
                                      std::size_t witness_cap = kDefaultWitnessCap) {
  detail::ReportBuilder b(Property::disjointness, witness_cap);
  auto conclusive = [](Decision d) {
    return d == Decision::permit || d == Decision::deny;
  };
  enumerate_requests(domain, [&](const Request& r) {
    ++b.report.stats.examined;
    Decision d1 = eval_any(p1, r, cfg);
    Decision d2 = eval_any(p2, r, cfg);
    if (conclusive(d1) && conclusive(d2))
      b.violation(r, {d1, d2}, "at most one conclusive decision");
  }, cap);
  return b.finish();
}

// Holds iff on every request in the set where pPrime concludes permit or
// deny, p returns the same decision.
inline CheckReport check_coverage(const PolicyOrPdp& p, const PolicyOrPdp& p_prime,
                                  const RequestSetSpec& requests, const EngineConfig& cfg,
                                  unsigned long long cap = kDefaultCap,
                                  std::size_t witness_cap = kDefaultWitnessCap) {
  detail::ReportBuilder b(Property::coverage, witness_cap);
  enumerate_requests(requests.domain, [&](const Request& r) {
    ++b.report.stats.examined;
    auto m = detail::member_of(requests.constraint, r, cfg, b.report.stats);
    if (m == detail::Membership::error) {
      b.violation(r, {}, "boolean constraint", "request-set constraint error");
      return;
    }
    if (m != detail::Membership::in) return;
    Decision dp = eval_any(p_prime, r, cfg);
    if (dp != Decision::permit && dp != Decision::deny) return;
    Decision d = eval_any(p, r, cfg);
    if (d != dp) b.violation(r, {d, dp}, to_string(dp));
  }, cap);
  return b.finish();
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

inline std::string render_text(const CheckReport& rep) {
  std::string out = std::string(to_string(rep.property)) + ": " +
                    (rep.holds ? "HOLDS" : "VIOLATED") + "\n";
  out += "  requests examined: " + std::to_string(rep.stats.examined) + "\n";
  if (!rep.holds) out += "  violations: " + std::to_string(rep.stats.violations) + "\n";
  if (rep.stats.membership_warnings)
    out += "  membership warnings (constraint evaluated to absent): " +
           std::to_string(rep.stats.membership_warnings) + "\n";
  for (const auto& w : rep.witnesses) {
    out += "  witness: " + print_request(w.request) + "\n";
    out += "    observed:";
    for (Decision d : w.observed) out += std::string(" ") + to_string(d);
    if (w.observed.empty()) out += " -";
    out += "\n    expected: " + w.expected + "\n";
    if (!w.note.empty()) out += "    note: " + w.note + "\n";
  }
  return out;
}

// Stable machine-readable format: PROPERTY<TAB>HOLDS<TAB>WITNESS_COUNT,
// then one witness block line per witness.
inline std::string render_tsv(const CheckReport& rep) {
  std::string out = std::string(to_string(rep.property)) + "\t" +
                    (rep.holds ? "true" : "false") + "\t" +
                    std::to_string(rep.witnesses.size()) + "\n";
  for (const auto& w : rep.witnesses) {
    out += "witness\t" + print_request(w.request) + "\t";
    bool first = true;
    for (Decision d : w.observed) {
      if (!first) out += ",";
      out += to_string(d);
      first = false;
    }
    out += "\t" + w.expected;
    if (!w.note.empty()) out += "\t" + w.note;
    out += "\n";
  }
  return out;
}

}  // namespace facpl
