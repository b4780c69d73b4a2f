#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "facpl/analyzer.hpp"
#include "facpl/domain.hpp"
#include "facpl/eval.hpp"
#include "facpl/policy.hpp"
#include "facpl/printer.hpp"
#include "facpl/types.hpp"

namespace facpl {

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Boolean formulas over domain atoms
// ---------------------------------------------------------------------------

// Atoms refer to attributes by their index in the DomainSpec:
//   bool_attr  — the boolean attribute's value variable
//   present    — the attribute is bound (always true for required attributes)
//   enum_eq    — the attribute equals universe[value]; strings and dates map
//                to enumeration constants, doubles to reals
//   member     — universe[value] belongs to the set-kind attribute
struct Atom {
  enum Kind { bool_attr, present, enum_eq, member } kind;
  int attr = 0;
  int value = 0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum Kind { constant, conj, disj, neg, atom } kind;
  bool value = false;              // constant
  Atom at{};                       // atom
  std::vector<FormulaPtr> args;    // conj / disj / neg
};

inline FormulaPtr f_const(bool v) {
  static const FormulaPtr t = [] {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::constant;
    f->value = true;
    return f;
  }();
  static const FormulaPtr f = [] {
    auto g = std::make_shared<Formula>();
    g->kind = Formula::constant;
    g->value = false;
    return g;
  }();
  return v ? t : f;
}

inline FormulaPtr f_atom(Atom a) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::atom;
  f->at = a;
  return f;
}

inline bool is_const(const FormulaPtr& f, bool v) {
  return f->kind == Formula::constant && f->value == v;
}

inline FormulaPtr f_not(FormulaPtr a) {
  if (a->kind == Formula::constant) return f_const(!a->value);
  if (a->kind == Formula::neg) return a->args[0];
  auto f = std::make_shared<Formula>();
  f->kind = Formula::neg;
  f->args = {std::move(a)};
  return f;
}

namespace detail {

inline FormulaPtr f_nary(Formula::Kind kind, std::vector<FormulaPtr> args) {
  bool absorb = kind == Formula::disj;  // true absorbs or, false absorbs and
  std::vector<FormulaPtr> flat;
  for (auto& a : args) {
    if (a->kind == Formula::constant) {
      if (a->value == absorb) return f_const(absorb);
      continue;  // neutral element
    }
    if (a->kind == kind) {
      flat.insert(flat.end(), a->args.begin(), a->args.end());
    } else {
      flat.push_back(std::move(a));
    }
  }
  if (flat.empty()) return f_const(!absorb);
  if (flat.size() == 1) return flat[0];
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->args = std::move(flat);
  return f;
}

}  // namespace detail

inline FormulaPtr f_and(std::vector<FormulaPtr> args) {
  return detail::f_nary(Formula::conj, std::move(args));
}
inline FormulaPtr f_or(std::vector<FormulaPtr> args) {
  return detail::f_nary(Formula::disj, std::move(args));
}

// Evaluates an atom under a concrete request from the same domain.
inline bool atom_holds(const Atom& a, const Request& r, const DomainSpec& dom) {
  const AttrDomain& ad = dom.attrs[static_cast<std::size_t>(a.attr)];
  Lookup found = r.lookup(ad.name);
  bool bound = !std::holds_alternative<Absent>(found);
  switch (a.kind) {
    case Atom::present:
      return bound;
    case Atom::bool_attr: {
      const Value* v = std::get_if<Value>(&found);
      return v && v->is_bool() && v->as_bool();
    }
    case Atom::enum_eq: {
      const Value* v = std::get_if<Value>(&found);
      return v && *v == ad.universe[static_cast<std::size_t>(a.value)];
    }
    case Atom::member: {
      const ValueSet* s = std::get_if<ValueSet>(&found);
      return s && s->contains(ad.universe[static_cast<std::size_t>(a.value)]);
    }
  }
  return false;
}

inline bool formula_holds(const Formula& f, const Request& r, const DomainSpec& dom) {
  switch (f.kind) {
    case Formula::constant: return f.value;
    case Formula::atom: return atom_holds(f.at, r, dom);
    case Formula::neg: return !formula_holds(*f.args[0], r, dom);
    case Formula::conj:
      for (const auto& a : f.args)
        if (!formula_holds(*a, r, dom)) return false;
      return true;
    case Formula::disj:
      for (const auto& a : f.args)
        if (formula_holds(*a, r, dom)) return true;
      return false;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Policy collapse: one constraint per decision
// ---------------------------------------------------------------------------

// The four per-decision constraints of a policy. Under every assignment
// admitted by the domain constraints exactly one of them is true.
struct DecisionFormulas {
  FormulaPtr permit, deny, not_applicable, indeterminate;

  const FormulaPtr& of(Decision d) const {
    switch (d) {
      case Decision::permit: return permit;
      case Decision::deny: return deny;
      case Decision::not_applicable: return not_applicable;
      case Decision::indeterminate: return indeterminate;
    }
    throw std::logic_error("bad decision");
  }
};

namespace detail {

// A guarded outcome table: guards are mutually exclusive and exhaustive over
// the domain, each paired with the concrete evaluation outcome under it.
struct SymCase {
  FormulaPtr guard;
  ExprResult outcome;
};
using CaseList = std::vector<SymCase>;

inline bool same_outcome(const ExprResult& a, const ExprResult& b) {
  return a == b;
}

inline void push_case(CaseList& cs, FormulaPtr guard, ExprResult outcome) {
  if (is_const(guard, false)) return;
  for (auto& c : cs) {
    if (same_outcome(c.outcome, outcome)) {
      c.guard = f_or({c.guard, std::move(guard)});
      return;
    }
  }
  cs.push_back({std::move(guard), std::move(outcome)});
}

struct EncodeContext {
  const DomainSpec& dom;
  const EngineConfig& cfg;
};

inline FormulaPtr presence(const EncodeContext& ctx, int idx) {
  if (ctx.dom.attrs[static_cast<std::size_t>(idx)].allow_absent)
    return f_atom({Atom::present, idx, 0});
  return f_const(true);
}

inline CaseList encode_name(const EncodeContext& ctx, const AttrName& name) {
  int idx = ctx.dom.index_of(name);
  if (idx < 0) throw EncodeError("attribute " + name.str() + " is not declared in the domain");
  const AttrDomain& a = ctx.dom.attrs[static_cast<std::size_t>(idx)];
  FormulaPtr here = presence(ctx, idx);
  CaseList cs;
  switch (a.kind) {
    case AttrKind::boolean: {
      FormulaPtr b = f_atom({Atom::bool_attr, idx, 0});
      push_case(cs, f_and({here, b}), Value(true));
      push_case(cs, f_and({here, f_not(b)}), Value(false));
      break;
    }
    case AttrKind::string_set: {
      if (a.universe.size() > 16)
        throw EncodeError("set universe of " + name.str() + " too large to unfold");
      unsigned long long n = 1ULL << a.universe.size();
      for (unsigned long long mask = 1; mask < n; ++mask) {
        std::vector<FormulaPtr> bits{here};
        std::vector<Value> elems;
        for (std::size_t j = 0; j < a.universe.size(); ++j) {
          FormulaPtr m = f_atom({Atom::member, idx, static_cast<int>(j)});
          if (mask & (1ULL << j)) {
            bits.push_back(m);
            elems.push_back(a.universe[j]);
          } else {
            bits.push_back(f_not(m));
          }
        }
        push_case(cs, f_and(std::move(bits)), ValueSet::of(std::move(elems)));
      }
      break;
    }
    default:
      for (std::size_t j = 0; j < a.universe.size(); ++j)
        push_case(cs, f_and({here, f_atom({Atom::enum_eq, idx, static_cast<int>(j)})}),
                  a.universe[j]);
      break;
  }
  if (a.allow_absent) push_case(cs, f_not(presence(ctx, idx)), Absent{});
  return cs;
}

// Checks that a literal compared against an attribute reference exists in
// that attribute's declared universe.
inline void check_literal_against(const EncodeContext& ctx, const Expr& name_ref,
                                  const Value& lit) {
  const AttrDomain* a = ctx.dom.find(name_ref.name);
  if (!a) return;  // undeclared attribute reported at encode time
  if (a->kind == AttrKind::boolean || a->kind == AttrKind::number) return;
  for (const auto& v : a->universe)
    if (v == lit) return;
  throw EncodeError("value " + print_value(lit) + " referenced by the policy is missing from " +
                    "the universe of " + name_ref.name.str());
}

inline void check_universe_references(const EncodeContext& ctx, const Expr& e) {
  if (e.op == ExprOp::equal || e.op == ExprOp::in) {
    const Expr& lhs = *e.args[0];
    const Expr& rhs = *e.args[1];
    if (lhs.op == ExprOp::name && rhs.op == ExprOp::literal)
      check_literal_against(ctx, lhs, rhs.lit);
    if (rhs.op == ExprOp::name && lhs.op == ExprOp::literal)
      check_literal_against(ctx, rhs, lhs.lit);
  }
  for (const auto& arg : e.args) check_universe_references(ctx, *arg);
}

inline CaseList encode_expr(const EncodeContext& ctx, const Expr& e) {
  switch (e.op) {
    case ExprOp::name:
      return encode_name(ctx, e.name);
    case ExprOp::literal:
      return {{f_const(true), e.lit}};
    case ExprOp::set_literal:
      return {{f_const(true), e.set}};
    case ExprOp::logic_not: {
      CaseList arg = encode_expr(ctx, *e.args[0]);
      CaseList out;
      for (auto& c : arg) push_case(out, c.guard, apply_not(c.outcome));
      return out;
    }
    default: {
      CaseList lhs = encode_expr(ctx, *e.args[0]);
      CaseList rhs = encode_expr(ctx, *e.args[1]);
      CaseList out;
      for (const auto& a : lhs)
        for (const auto& b : rhs)
          push_case(out, f_and({a.guard, b.guard}),
                    apply_op(e.op, a.outcome, b.outcome, ctx.cfg));
      return out;
    }
  }
}

// Splits a target's cases into the four branches the rule/policy clauses
// distinguish.
struct TargetSplit {
  FormulaPtr when_true = f_const(false);
  FormulaPtr not_applicable = f_const(false);  // false or absent
  FormulaPtr indeterminate = f_const(false);   // error or non-boolean
};

inline TargetSplit split_target(const CaseList& cs) {
  TargetSplit s;
  for (const auto& c : cs) {
    if (is_true(c.outcome))
      s.when_true = f_or({s.when_true, c.guard});
    else if (is_false(c.outcome) || is_absent(c.outcome))
      s.not_applicable = f_or({s.not_applicable, c.guard});
    else
      s.indeterminate = f_or({s.indeterminate, c.guard});
  }
  return s;
}

inline DecisionFormulas combine_matrix(const Decision table[4][4],
                                       const std::vector<DecisionFormulas>& children) {
  DecisionFormulas acc = children[0];
  for (std::size_t k = 1; k < children.size(); ++k) {
    DecisionFormulas next;
    std::vector<FormulaPtr> parts[4];
    const Decision order[4] = {Decision::permit, Decision::deny, Decision::not_applicable,
                               Decision::indeterminate};
    for (Decision d1 : order)
      for (Decision d2 : order) {
        Decision out = table[static_cast<int>(d1)][static_cast<int>(d2)];
        parts[static_cast<int>(out)].push_back(f_and({acc.of(d1), children[k].of(d2)}));
      }
    next.permit = f_or(parts[0]);
    next.deny = f_or(parts[1]);
    next.not_applicable = f_or(parts[2]);
    next.indeterminate = f_or(parts[3]);
    acc = next;
  }
  return acc;
}

inline DecisionFormulas combine_sym(CombAlg alg, const std::vector<DecisionFormulas>& cs) {
  auto all_of = [&](auto pick) {
    std::vector<FormulaPtr> v;
    for (const auto& c : cs) v.push_back(pick(c));
    return f_and(std::move(v));
  };
  auto any_of = [&](auto pick) {
    std::vector<FormulaPtr> v;
    for (const auto& c : cs) v.push_back(pick(c));
    return f_or(std::move(v));
  };
  auto p = [](const DecisionFormulas& c) { return c.permit; };
  auto d = [](const DecisionFormulas& c) { return c.deny; };
  auto na = [](const DecisionFormulas& c) { return c.not_applicable; };
  auto ind = [](const DecisionFormulas& c) { return c.indeterminate; };

  DecisionFormulas out;
  switch (alg) {
    case CombAlg::permit_overrides:
      return combine_matrix(kPermitOverrides, cs);
    case CombAlg::deny_overrides:
      return combine_matrix(kDenyOverrides, cs);
    case CombAlg::deny_unless_permit:
      out.permit = any_of(p);
      out.deny = f_not(out.permit);
      out.not_applicable = f_const(false);
      out.indeterminate = f_const(false);
      return out;
    case CombAlg::permit_unless_deny:
      out.deny = any_of(d);
      out.permit = f_not(out.deny);
      out.not_applicable = f_const(false);
      out.indeterminate = f_const(false);
      return out;
    case CombAlg::first_applicable: {
      FormulaPtr prefix_na = f_const(true);
      std::vector<FormulaPtr> ps, ds, is;
      for (const auto& c : cs) {
        ps.push_back(f_and({prefix_na, c.permit}));
        ds.push_back(f_and({prefix_na, c.deny}));
        is.push_back(f_and({prefix_na, c.indeterminate}));
        prefix_na = f_and({prefix_na, c.not_applicable});
      }
      out.permit = f_or(ps);
      out.deny = f_or(ds);
      out.indeterminate = f_or(is);
      out.not_applicable = prefix_na;
      return out;
    }
    case CombAlg::only_one_applicable: {
      FormulaPtr any_ind = any_of(ind);
      FormulaPtr none = all_of(na);
      auto exactly_this = [&](std::size_t i, const FormulaPtr& dec) {
        std::vector<FormulaPtr> v{dec};
        for (std::size_t j = 0; j < cs.size(); ++j)
          if (j != i) v.push_back(cs[j].not_applicable);
        return f_and(std::move(v));
      };
      std::vector<FormulaPtr> ps, ds;
      for (std::size_t i = 0; i < cs.size(); ++i) {
        ps.push_back(exactly_this(i, cs[i].permit));
        ds.push_back(exactly_this(i, cs[i].deny));
      }
      out.permit = f_and({f_not(any_ind), f_or(ps)});
      out.deny = f_and({f_not(any_ind), f_or(ds)});
      out.not_applicable = f_and({f_not(any_ind), none});
      out.indeterminate =
          f_not(f_or({out.permit, out.deny, out.not_applicable}));
      return out;
    }
    case CombAlg::weak_consensus: {
      FormulaPtr clean_p = f_and({any_of(p), all_of([](const DecisionFormulas& c) {
                                    return f_or({c.permit, c.not_applicable});
                                  })});
      FormulaPtr clean_d = f_and({any_of(d), all_of([](const DecisionFormulas& c) {
                                    return f_or({c.deny, c.not_applicable});
                                  })});
      out.permit = clean_p;
      out.deny = clean_d;
      out.not_applicable = all_of(na);
      out.indeterminate = f_not(f_or({out.permit, out.deny, out.not_applicable}));
      return out;
    }
    case CombAlg::strong_consensus:
      out.permit = all_of(p);
      out.deny = all_of(d);
      out.not_applicable = all_of(na);
      out.indeterminate = f_not(f_or({out.permit, out.deny, out.not_applicable}));
      return out;
  }
  throw std::logic_error("combine_sym: unknown algorithm");
}

inline DecisionFormulas encode_policy(const EncodeContext& ctx, const Policy& p) {
  if (p.is_rule()) {
    check_universe_references(ctx, *p.rule().target);
    TargetSplit t = split_target(encode_expr(ctx, *p.rule().target));
    DecisionFormulas out;
    out.permit = p.rule().effect == Effect::permit ? t.when_true : f_const(false);
    out.deny = p.rule().effect == Effect::deny ? t.when_true : f_const(false);
    out.not_applicable = t.not_applicable;
    out.indeterminate = t.indeterminate;
    return out;
  }
  const PolicySet& set = p.set();
  check_universe_references(ctx, *set.target);
  TargetSplit t = split_target(encode_expr(ctx, *set.target));
  std::vector<DecisionFormulas> children;
  children.reserve(set.children.size());
  for (const auto& c : set.children) children.push_back(encode_policy(ctx, *c));
  DecisionFormulas inner = combine_sym(set.alg, children);

  DecisionFormulas out;
  out.permit = f_and({t.when_true, inner.permit});
  out.deny = f_and({t.when_true, inner.deny});
  out.not_applicable = f_or({t.not_applicable, f_and({t.when_true, inner.not_applicable})});
  out.indeterminate = f_or({t.indeterminate, f_and({t.when_true, inner.indeterminate})});
  return out;
}

}  // namespace detail

// Collapses a policy or PDP into its four per-decision constraints over the
// declared finite domain. Extension functions are unfolded against the
// engine configuration.
inline DecisionFormulas encode(const PolicyOrPdp& p, const DomainSpec& domain,
                               const EngineConfig& cfg) {
  detail::EncodeContext ctx{domain, cfg};
  if (const auto* pol = std::get_if<PolicyPtr>(&p)) return detail::encode_policy(ctx, **pol);
  const Pdp& pdp = std::get<Pdp>(p);
  std::vector<DecisionFormulas> children;
  children.reserve(pdp.policies.size());
  for (const auto& c : pdp.policies) children.push_back(detail::encode_policy(ctx, *c));
  return detail::combine_sym(pdp.alg, children);
}

// Encodes a boolean request-set constraint: the formula is true exactly on
// the member requests (absent and error classify as non-member).
inline FormulaPtr encode_constraint(const ExprPtr& constraint, const DomainSpec& domain,
                                    const EngineConfig& cfg) {
  detail::EncodeContext ctx{domain, cfg};
  return detail::split_target(detail::encode_expr(ctx, *constraint)).when_true;
}

// ---------------------------------------------------------------------------
// SMT-LIB emission
// ---------------------------------------------------------------------------

// Property queries whose satisfiability the emitted script asks about.
struct QueryReach { Decision decision; };                 // sat: decision reachable
struct QueryComplete {};                                  // sat: some request is not-applicable
struct QueryDisjoint { DecisionFormulas other; };         // sat: both conclusive somewhere
struct QueryCoverage { DecisionFormulas other; FormulaPtr members; };  // sat: coverage violated
struct QueryEnforce { FormulaPtr members; Decision decision; };        // sat: member reaches decision
using Query =
    std::variant<QueryReach, QueryComplete, QueryDisjoint, QueryCoverage, QueryEnforce>;

namespace detail {

// SMT-LIB decimal like 2.0 or (- 2.5); SMT-LIB has no signed numerals.
inline std::string smt_number(double d) {
  bool neg = d < 0;
  std::string s = format_double(neg ? -d : d);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find('E') == std::string::npos)
    s += ".0";
  return neg ? "(- " + s + ")" : s;
}

struct SmtNames {
  static std::string value_var(int i) { return "a" + std::to_string(i); }
  static std::string presence_var(int i) { return "p" + std::to_string(i); }
  static std::string member_var(int i, int j) {
    return "m" + std::to_string(i) + "_" + std::to_string(j);
  }
  static std::string sort(int i) { return "E" + std::to_string(i); }
  static std::string ctor(int i, int j) {
    return "E" + std::to_string(i) + "V" + std::to_string(j);
  }
};

inline void emit_formula(std::string& out, const Formula& f, const DomainSpec& dom) {
  switch (f.kind) {
    case Formula::constant:
      out += f.value ? "true" : "false";
      return;
    case Formula::atom: {
      const Atom& a = f.at;
      const AttrDomain& ad = dom.attrs[static_cast<std::size_t>(a.attr)];
      switch (a.kind) {
        case Atom::bool_attr:
          out += SmtNames::value_var(a.attr);
          return;
        case Atom::present:
          out += ad.allow_absent ? SmtNames::presence_var(a.attr) : std::string("true");
          return;
        case Atom::member:
          out += SmtNames::member_var(a.attr, a.value);
          return;
        case Atom::enum_eq:
          if (ad.kind == AttrKind::number) {
            out += "(= " + SmtNames::value_var(a.attr) + " " +
                   smt_number(ad.universe[static_cast<std::size_t>(a.value)].as_number()) + ")";
          } else {
            out += "(= " + SmtNames::value_var(a.attr) + " " + SmtNames::ctor(a.attr, a.value) +
                   ")";
          }
          return;
      }
      return;
    }
    case Formula::neg:
      out += "(not ";
      emit_formula(out, *f.args[0], dom);
      out += ")";
      return;
    case Formula::conj:
    case Formula::disj:
      out += f.kind == Formula::conj ? "(and" : "(or";
      for (const auto& a : f.args) {
        out += " ";
        emit_formula(out, *a, dom);
      }
      out += ")";
      return;
  }
}

inline std::string smt(const FormulaPtr& f, const DomainSpec& dom) {
  std::string out;
  emit_formula(out, *f, dom);
  return out;
}

inline void emit_declarations(std::string& out, const DomainSpec& dom) {
  for (std::size_t i = 0; i < dom.attrs.size(); ++i) {
    const AttrDomain& a = dom.attrs[i];
    int idx = static_cast<int>(i);
    out += "; attribute " + std::to_string(i) + " = " + a.name.str() + " : " +
           to_string(a.kind) + "\n";
    switch (a.kind) {
      case AttrKind::boolean:
        out += "(declare-const " + SmtNames::value_var(idx) + " Bool)\n";
        break;
      case AttrKind::number: {
        out += "(declare-const " + SmtNames::value_var(idx) + " Real)\n";
        std::string dis = "(or";
        for (const auto& v : a.universe)
          dis += " (= " + SmtNames::value_var(idx) + " " + smt_number(v.as_number()) + ")";
        out += "(assert " + dis + "))\n";
        break;
      }
      case AttrKind::string:
      case AttrKind::date: {
        out += "(declare-datatypes ((" + SmtNames::sort(idx) + " 0)) ((";
        for (std::size_t j = 0; j < a.universe.size(); ++j) {
          const Value& v = a.universe[j];
          out += "(" + SmtNames::ctor(idx, static_cast<int>(j)) + ")";
          out += " ; " + (v.is_date() ? format_date(v.as_date()) : v.as_string()) + "\n  ";
        }
        out += ")))\n";
        out += "(declare-const " + SmtNames::value_var(idx) + " " + SmtNames::sort(idx) + ")\n";
        break;
      }
      case AttrKind::string_set: {
        std::string dis = "(or";
        for (std::size_t j = 0; j < a.universe.size(); ++j) {
          out += "(declare-const " + SmtNames::member_var(idx, static_cast<int>(j)) +
                 " Bool) ; " + a.universe[j].as_string() + "\n";
          dis += " " + SmtNames::member_var(idx, static_cast<int>(j));
        }
        out += "(assert " + dis + ")) ; value sets are non-empty\n";
        break;
      }
    }
    if (a.allow_absent)
      out += "(declare-const " + SmtNames::presence_var(idx) + " Bool)\n";
  }
}

}  // namespace detail

// Emits a complete SMT-LIB 2 script for the query: declarations, domain
// restrictions, the query assertion, (check-sat) and (get-model). Output is
// byte-identical for identical inputs.
inline std::string emit_smtlib(const DecisionFormulas& f, const Query& query,
                               const DomainSpec& domain) {
  std::string out = "(set-logic QF_LIRA)\n";
  detail::emit_declarations(out, domain);

  FormulaPtr assertion = std::visit(
      [&](const auto& q) -> FormulaPtr {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, QueryReach>) {
          return f.of(q.decision);
        } else if constexpr (std::is_same_v<T, QueryComplete>) {
          return f.not_applicable;
        } else if constexpr (std::is_same_v<T, QueryDisjoint>) {
          return f_and({f_or({f.permit, f.deny}), f_or({q.other.permit, q.other.deny})});
        } else if constexpr (std::is_same_v<T, QueryCoverage>) {
          return f_and({q.members, f_or({f_and({q.other.permit, f_not(f.permit)}),
                                         f_and({q.other.deny, f_not(f.deny)})})});
        } else {
          static_assert(std::is_same_v<T, QueryEnforce>);
          return f_and({q.members, f.of(q.decision)});
        }
      },
      query);

  out += "(assert " + detail::smt(assertion, domain) + ")\n";
  out += "(check-sat)\n(get-model)\n";
  return out;
}

// ---------------------------------------------------------------------------
// External solver invocation
// ---------------------------------------------------------------------------

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SatVerdict { sat, unsat, unknown };

inline const char* to_string(SatVerdict v) {
  switch (v) {
    case SatVerdict::sat: return "sat";
    case SatVerdict::unsat: return "unsat";
    case SatVerdict::unknown: return "unknown";
  }
  return "?";
}

struct SolveResult {
  SatVerdict verdict = SatVerdict::unknown;
  std::string model_text;  // raw solver output after the verdict line
};

// Runs the solver command with the script on standard input. The command is
// a shell fragment, e.g. "z3 -in" or a path to the bundled reference solver.
inline SolveResult solve(const std::string& script, const std::string& solver_cmd,
                         int timeout_sec = 30) {
  namespace fs = std::filesystem;
  static std::atomic<unsigned> counter{0};
  std::string tag = std::to_string(static_cast<unsigned long long>(
                        std::chrono::steady_clock::now().time_since_epoch().count())) +
                    "_" + std::to_string(counter.fetch_add(1));
  fs::path dir = fs::temp_directory_path();
  fs::path in = dir / ("facpl_smt_" + tag + ".smt2");
  fs::path out = dir / ("facpl_smt_" + tag + ".out");
  {
    std::ofstream f(in);
    f << script;
  }
  std::string cmd = "timeout " + std::to_string(timeout_sec) + "s " + solver_cmd + " < " +
                    in.string() + " > " + out.string() + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  std::ifstream result(out);
  std::stringstream buf;
  buf << result.rdbuf();
  fs::remove(in);
  fs::remove(out);
  std::string text = buf.str();

  if (rc == 124 << 8) throw SolverError("solver timed out after " +
                                        std::to_string(timeout_sec) + "s");
  if (text.empty()) throw SolverError("solver produced no output (command: " + solver_cmd + ")");

  std::istringstream lines(text);
  std::string first;
  std::getline(lines, first);
  SolveResult res;
  if (first == "sat") {
    res.verdict = SatVerdict::sat;
  } else if (first == "unsat") {
    res.verdict = SatVerdict::unsat;
  } else if (first == "unknown") {
    res.verdict = SatVerdict::unknown;
  } else {
    throw SolverError("unrecognised solver verdict: " + first);
  }
  std::stringstream rest;
  rest << lines.rdbuf();
  res.model_text = rest.str();
  return res;
}

namespace detail {

// Minimal s-expression reader for solver models.
struct Sexp {
  std::string atom;           // empty for lists
  std::vector<Sexp> items;
};

inline void skip_model_ws(const std::string& s, std::size_t& i) {
  while (i < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
    } else if (s[i] == ';') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else {
      break;
    }
  }
}

inline std::optional<Sexp> read_sexp(const std::string& s, std::size_t& i) {
  skip_model_ws(s, i);
  if (i >= s.size()) return std::nullopt;
  if (s[i] == '(') {
    ++i;
    Sexp list;
    while (true) {
      skip_model_ws(s, i);
      if (i >= s.size()) return std::nullopt;  // unbalanced
      if (s[i] == ')') {
        ++i;
        return list;
      }
      auto item = read_sexp(s, i);
      if (!item) return std::nullopt;
      list.items.push_back(std::move(*item));
    }
  }
  if (s[i] == ')') return std::nullopt;
  Sexp a;
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
         s[i] != ')')
    a.atom.push_back(s[i++]);
  return a;
}

inline void collect_define_funs(const Sexp& e, std::map<std::string, const Sexp*>& out) {
  if (!e.items.empty() && e.items[0].atom == "define-fun" && e.items.size() >= 5) {
    out[e.items[1].atom] = &e.items[4];
    return;
  }
  for (const auto& item : e.items) collect_define_funs(item, out);
}

inline double sexp_number(const Sexp& e) {
  if (!e.atom.empty()) return std::strtod(e.atom.c_str(), nullptr);
  if (e.items.size() == 2 && e.items[0].atom == "-") return -sexp_number(e.items[1]);
  if (e.items.size() == 3 && e.items[0].atom == "/")
    return sexp_number(e.items[1]) / sexp_number(e.items[2]);
  return 0;
}

}  // namespace detail

// Reconstructs a witness request from a solver model, using the deterministic
// variable naming of emit_smtlib.
inline Request decode_model(const std::string& model_text, const DomainSpec& domain) {
  std::map<std::string, const detail::Sexp*> defs;
  std::vector<detail::Sexp> roots;
  std::size_t i = 0;
  while (auto e = detail::read_sexp(model_text, i)) roots.push_back(std::move(*e));
  for (const auto& r : roots) detail::collect_define_funs(r, defs);

  auto lookup_def = [&](const std::string& name) -> const detail::Sexp* {
    auto it = defs.find(name);
    return it == defs.end() ? nullptr : it->second;
  };
  auto truthy = [](const detail::Sexp* e) { return e && e->atom == "true"; };

  Request r;
  for (std::size_t idx = 0; idx < domain.attrs.size(); ++idx) {
    const AttrDomain& a = domain.attrs[idx];
    int ii = static_cast<int>(idx);
    if (a.allow_absent && !truthy(lookup_def(detail::SmtNames::presence_var(ii)))) continue;

    if (a.kind == AttrKind::string_set) {
      std::vector<Value> elems;
      for (std::size_t j = 0; j < a.universe.size(); ++j)
        if (truthy(lookup_def(detail::SmtNames::member_var(ii, static_cast<int>(j)))))
          elems.push_back(a.universe[j]);
      if (!elems.empty()) r.bind(a.name, ValueSet::of(std::move(elems)));
      continue;
    }

    const detail::Sexp* def = lookup_def(detail::SmtNames::value_var(ii));
    if (!def) continue;
    switch (a.kind) {
      case AttrKind::boolean:
        r.bind(a.name, Value(def->atom == "true"));
        break;
      case AttrKind::number: {
        double v = detail::sexp_number(*def);
        for (const auto& u : a.universe)
          if (u.as_number() == v) {
            r.bind(a.name, u);
            break;
          }
        break;
      }
      default: {  // enum constructor ctor(i, j)
        for (std::size_t j = 0; j < a.universe.size(); ++j)
          if (def->atom == detail::SmtNames::ctor(ii, static_cast<int>(j))) {
            r.bind(a.name, a.universe[j]);
            break;
          }
        break;
      }
    }
  }
  return r;
}

// Default solver command: $FACPL_SMT_SOLVER if set, otherwise `fallback`
// (normally the bundled reference solver next to the calling binary).
inline std::string default_solver(const std::string& fallback) {
  if (const char* env = std::getenv("FACPL_SMT_SOLVER"); env && *env) return env;
  return fallback;
}

}  // namespace facpl
