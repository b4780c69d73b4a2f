#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "facpl/domain.hpp"
#include "facpl/policy.hpp"
#include "facpl/types.hpp"

namespace facpl {

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

struct EvalError {
  std::string message;
};
inline bool operator==(const EvalError& a, const EvalError& b) {
  return a.message == b.message;
}

// Result of evaluating an expression: a value, a value set, absent, or an
// in-band error (type mismatch, unknown level/role, division by zero).
using ExprResult = std::variant<Value, ValueSet, Absent, EvalError>;

inline bool is_error(const ExprResult& r) { return std::holds_alternative<EvalError>(r); }
inline bool is_absent(const ExprResult& r) { return std::holds_alternative<Absent>(r); }
inline bool is_bool(const ExprResult& r) {
  const Value* v = std::get_if<Value>(&r);
  return v && v->is_bool();
}
inline bool is_true(const ExprResult& r) { return is_bool(r) && std::get<Value>(r).as_bool(); }
inline bool is_false(const ExprResult& r) { return is_bool(r) && !std::get<Value>(r).as_bool(); }

namespace detail {

inline ExprResult err(std::string msg) { return EvalError{std::move(msg)}; }

inline ExprResult type_error(ExprOp op) {
  return err(std::string("type error in ") + to_string(op));
}

// Kleene conjunction/disjunction over {true, false, absent}. Errors dominate
// and a non-boolean operand is always a type error, even when the other
// operand is the absorbing element.
inline ExprResult apply_logic(ExprOp op, const ExprResult& a, const ExprResult& b) {
  if (is_error(a)) return a;
  if (is_error(b)) return b;
  for (const ExprResult* r : {&a, &b})
    if (!is_absent(*r) && !is_bool(*r)) return type_error(op);
  bool want = op == ExprOp::logic_or;  // absorbing element: true for or, false for and
  if (is_bool(a) && std::get<Value>(a).as_bool() == want) return Value(want);
  if (is_bool(b) && std::get<Value>(b).as_bool() == want) return Value(want);
  if (is_absent(a) || is_absent(b)) return Absent{};
  return Value(!want);  // neither operand hit the absorbing element
}

inline ExprResult apply_arith(ExprOp op, const Value& a, const Value& b) {
  double x = a.as_number(), y = b.as_number(), r = 0;
  switch (op) {
    case ExprOp::add: r = x + y; break;
    case ExprOp::subtract: r = x - y; break;
    case ExprOp::multiply: r = x * y; break;
    case ExprOp::divide:
      if (y == 0.0) return err("division by zero");
      r = x / y;
      break;
    default: return type_error(op);
  }
  if (!std::isfinite(r)) return err("non-finite arithmetic result");
  return Value(r);
}

}  // namespace detail

inline ExprResult apply_not(const ExprResult& a) {
  if (is_error(a)) return a;
  if (is_absent(a)) return Absent{};
  if (!is_bool(a)) return detail::type_error(ExprOp::logic_not);
  return Value(!std::get<Value>(a).as_bool());
}

// Applies a binary operator to already-evaluated operands. Exposed so the
// constraint encoder can reuse the exact operator semantics on concrete
// cases. Errors dominate absent; absent propagates except through the
// Kleene absorbing elements of and/or.
inline ExprResult apply_op(ExprOp op, const ExprResult& a, const ExprResult& b,
                           const EngineConfig& cfg) {
  using detail::err;
  using detail::type_error;

  if (op == ExprOp::logic_and || op == ExprOp::logic_or)
    return detail::apply_logic(op, a, b);

  if (is_error(a)) return a;
  if (is_error(b)) return b;
  if (is_absent(a) || is_absent(b)) return Absent{};

  const Value* av = std::get_if<Value>(&a);
  const Value* bv = std::get_if<Value>(&b);

  switch (op) {
    case ExprOp::equal:
      if (!av || !bv || av->kind() != bv->kind()) return type_error(op);
      return Value(*av == *bv);

    case ExprOp::in: {
      if (!av) return type_error(op);
      if (bv) {  // plain value on the right is a singleton set
        if (av->kind() != bv->kind()) return type_error(op);
        return Value(*av == *bv);
      }
      const ValueSet& s = std::get<ValueSet>(b);
      if (av->kind() != s.kind()) return type_error(op);
      return Value(s.contains(*av));
    }

    case ExprOp::greater_than:
      if (!av || !bv) return type_error(op);
      if (av->is_number() && bv->is_number())
        return Value(av->as_number() > bv->as_number());
      if (av->is_date() && bv->is_date())
        return Value(bv->as_date() < av->as_date());
      return type_error(op);

    case ExprOp::add:
    case ExprOp::subtract:
    case ExprOp::divide:
    case ExprOp::multiply:
      if (!av || !bv || !av->is_number() || !bv->is_number()) return type_error(op);
      return detail::apply_arith(op, *av, *bv);

    case ExprOp::leq: {
      if (!av || !bv || !av->is_string() || !bv->is_string()) return type_error(op);
      if (!cfg.level_defined(av->as_string())) return err("unknown level " + av->as_string());
      if (!cfg.level_defined(bv->as_string())) return err("unknown level " + bv->as_string());
      return Value(cfg.level_leq(av->as_string(), bv->as_string()));
    }

    case ExprOp::sub_role: {
      if (!bv || !bv->is_string()) return type_error(op);
      if (!cfg.role_defined(bv->as_string())) return err("unknown role " + bv->as_string());
      std::vector<Value> roles;
      if (av) {
        roles.push_back(*av);
      } else {
        const ValueSet& s = std::get<ValueSet>(a);
        roles.assign(s.elems().begin(), s.elems().end());
      }
      bool found = false;
      for (const auto& r : roles) {
        if (!r.is_string()) return type_error(op);
        if (!cfg.role_defined(r.as_string())) return err("unknown role " + r.as_string());
        if (cfg.sub_role(r.as_string(), bv->as_string())) found = true;
      }
      return Value(found);
    }

    default:
      return type_error(op);
  }
}

inline ExprResult eval_expr(const Expr& e, const Request& r, const EngineConfig& cfg) {
  switch (e.op) {
    case ExprOp::name:
      return std::visit([](const auto& v) -> ExprResult { return v; }, r.lookup(e.name));
    case ExprOp::literal:
      return e.lit;
    case ExprOp::set_literal:
      return e.set;
    case ExprOp::logic_not:
      return apply_not(eval_expr(*e.args[0], r, cfg));
    default:
      return apply_op(e.op, eval_expr(*e.args[0], r, cfg), eval_expr(*e.args[1], r, cfg), cfg);
  }
}

// ---------------------------------------------------------------------------
// Combining algorithms
// ---------------------------------------------------------------------------

namespace detail {

// Pairwise permit-overrides matrix; rows d1, columns d2 in the order
// permit, deny, not-applicable, indeterminate.
inline constexpr Decision kPermitOverrides[4][4] = {
    {Decision::permit, Decision::permit, Decision::permit, Decision::permit},
    {Decision::permit, Decision::deny, Decision::deny, Decision::indeterminate},
    {Decision::permit, Decision::deny, Decision::not_applicable, Decision::indeterminate},
    {Decision::permit, Decision::indeterminate, Decision::indeterminate, Decision::indeterminate},
};

// Dual matrix: deny takes precedence over any other decision.
inline constexpr Decision kDenyOverrides[4][4] = {
    {Decision::permit, Decision::deny, Decision::permit, Decision::indeterminate},
    {Decision::deny, Decision::deny, Decision::deny, Decision::deny},
    {Decision::permit, Decision::deny, Decision::not_applicable, Decision::indeterminate},
    {Decision::indeterminate, Decision::deny, Decision::indeterminate, Decision::indeterminate},
};

}  // namespace detail

inline Decision permit_overrides_pair(Decision a, Decision b) {
  return detail::kPermitOverrides[static_cast<int>(a)][static_cast<int>(b)];
}

inline Decision deny_overrides_pair(Decision a, Decision b) {
  return detail::kDenyOverrides[static_cast<int>(a)][static_cast<int>(b)];
}

inline Decision combine(CombAlg alg, std::span<const Decision> ds) {
  if (ds.empty()) throw std::invalid_argument("combine: empty decision sequence");

  auto count = [&](Decision d) {
    std::size_t n = 0;
    for (Decision x : ds)
      if (x == d) ++n;
    return n;
  };

  switch (alg) {
    case CombAlg::permit_overrides: {
      Decision acc = ds[0];
      for (std::size_t i = 1; i < ds.size(); ++i) acc = permit_overrides_pair(acc, ds[i]);
      return acc;
    }
    case CombAlg::deny_overrides: {
      Decision acc = ds[0];
      for (std::size_t i = 1; i < ds.size(); ++i) acc = deny_overrides_pair(acc, ds[i]);
      return acc;
    }
    case CombAlg::deny_unless_permit:
      return count(Decision::permit) > 0 ? Decision::permit : Decision::deny;
    case CombAlg::permit_unless_deny:
      return count(Decision::deny) > 0 ? Decision::deny : Decision::permit;
    case CombAlg::first_applicable:
      for (Decision d : ds)
        if (d != Decision::not_applicable) return d;
      return Decision::not_applicable;
    case CombAlg::only_one_applicable: {
      if (count(Decision::indeterminate) > 0) return Decision::indeterminate;
      std::size_t applicable = ds.size() - count(Decision::not_applicable);
      if (applicable == 0) return Decision::not_applicable;
      if (applicable > 1) return Decision::indeterminate;
      for (Decision d : ds)
        if (d != Decision::not_applicable) return d;
      return Decision::indeterminate;  // unreachable
    }
    case CombAlg::weak_consensus: {
      std::size_t p = count(Decision::permit), d = count(Decision::deny),
                  i = count(Decision::indeterminate);
      if (p > 0 && d == 0 && i == 0) return Decision::permit;
      if (d > 0 && p == 0 && i == 0) return Decision::deny;
      if (p == 0 && d == 0 && i == 0) return Decision::not_applicable;
      return Decision::indeterminate;
    }
    case CombAlg::strong_consensus: {
      if (count(Decision::permit) == ds.size()) return Decision::permit;
      if (count(Decision::deny) == ds.size()) return Decision::deny;
      if (count(Decision::not_applicable) == ds.size()) return Decision::not_applicable;
      return Decision::indeterminate;
    }
  }
  throw std::logic_error("combine: unknown algorithm");
}

// ---------------------------------------------------------------------------
// Rule, policy and PDP evaluation
// ---------------------------------------------------------------------------

inline Decision eval_rule(const Rule& rule, const Request& r, const EngineConfig& cfg) {
  ExprResult t = eval_expr(*rule.target, r, cfg);
  if (is_true(t)) return to_decision(rule.effect);
  if (is_false(t) || is_absent(t)) return Decision::not_applicable;
  return Decision::indeterminate;  // error or non-boolean target
}

inline Decision eval_policy(const Policy& p, const Request& r, const EngineConfig& cfg) {
  if (p.is_rule()) return eval_rule(p.rule(), r, cfg);

  const PolicySet& set = p.set();
  ExprResult t = eval_expr(*set.target, r, cfg);
  if (is_false(t) || is_absent(t)) return Decision::not_applicable;
  if (!is_true(t)) return Decision::indeterminate;

  std::vector<Decision> ds;
  ds.reserve(set.children.size());
  for (const auto& child : set.children) ds.push_back(eval_policy(*child, r, cfg));
  return combine(set.alg, ds);
}

inline Decision eval_pdp(const Pdp& pdp, const Request& r, const EngineConfig& cfg) {
  std::vector<Decision> ds;
  ds.reserve(pdp.policies.size());
  for (const auto& p : pdp.policies) ds.push_back(eval_policy(*p, r, cfg));
  return combine(pdp.alg, ds);
}

inline Decision eval_any(const PolicyOrPdp& p, const Request& r, const EngineConfig& cfg) {
  if (const auto* pol = std::get_if<PolicyPtr>(&p)) return eval_policy(**pol, r, cfg);
  return eval_pdp(std::get<Pdp>(p), r, cfg);
}

}  // namespace facpl
