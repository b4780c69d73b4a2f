#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "facpl/types.hpp"

namespace facpl {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprOp {
  name,          // attribute reference
  literal,       // constant value
  set_literal,   // constant value set
  logic_and,
  logic_or,
  logic_not,
  equal,
  in,
  greater_than,
  add,
  subtract,
  divide,
  multiply,
  leq,           // level partial order
  sub_role,      // role hierarchy reachability
};

inline const char* to_string(ExprOp op) {
  switch (op) {
    case ExprOp::name: return "<name>";
    case ExprOp::literal: return "<literal>";
    case ExprOp::set_literal: return "<set>";
    case ExprOp::logic_and: return "and";
    case ExprOp::logic_or: return "or";
    case ExprOp::logic_not: return "not";
    case ExprOp::equal: return "equal";
    case ExprOp::in: return "in";
    case ExprOp::greater_than: return "greater-than";
    case ExprOp::add: return "add";
    case ExprOp::subtract: return "subtract";
    case ExprOp::divide: return "divide";
    case ExprOp::multiply: return "multiply";
    case ExprOp::leq: return "leq";
    case ExprOp::sub_role: return "sub-role";
  }
  return "?";
}

inline int arity(ExprOp op) {
  switch (op) {
    case ExprOp::name:
    case ExprOp::literal:
    case ExprOp::set_literal: return 0;
    case ExprOp::logic_not: return 1;
    default: return 2;
  }
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op;
  AttrName name;            // op == name
  Value lit;                // op == literal
  ValueSet set;             // op == set_literal
  std::vector<ExprPtr> args;

  static ExprPtr ref(AttrName n) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::name;
    e->name = std::move(n);
    return e;
  }
  static ExprPtr constant(Value v) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::literal;
    e->lit = std::move(v);
    return e;
  }
  static ExprPtr constant_set(ValueSet s) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::set_literal;
    e->set = std::move(s);
    return e;
  }
  static ExprPtr call(ExprOp op, std::vector<ExprPtr> args) {
    if (static_cast<int>(args.size()) != arity(op))
      throw std::invalid_argument(std::string("wrong arity for ") + to_string(op));
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->args = std::move(args);
    return e;
  }
};

inline ExprPtr expr_true() { return Expr::constant(Value(true)); }

inline bool equal_exprs(const Expr& a, const Expr& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case ExprOp::name: return a.name == b.name;
    case ExprOp::literal: return a.lit == b.lit;
    case ExprOp::set_literal: return a.set == b.set;
    default:
      if (a.args.size() != b.args.size()) return false;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equal_exprs(*a.args[i], *b.args[i])) return false;
      return true;
  }
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

enum class CombAlg {
  permit_overrides,
  deny_overrides,
  deny_unless_permit,
  permit_unless_deny,
  first_applicable,
  only_one_applicable,
  weak_consensus,
  strong_consensus,
};

inline const char* to_string(CombAlg a) {
  switch (a) {
    case CombAlg::permit_overrides: return "permit-overrides";
    case CombAlg::deny_overrides: return "deny-overrides";
    case CombAlg::deny_unless_permit: return "deny-unless-permit";
    case CombAlg::permit_unless_deny: return "permit-unless-deny";
    case CombAlg::first_applicable: return "first-applicable";
    case CombAlg::only_one_applicable: return "only-one-applicable";
    case CombAlg::weak_consensus: return "weak-consensus";
    case CombAlg::strong_consensus: return "strong-consensus";
  }
  return "?";
}

inline std::optional<CombAlg> comb_alg_from(const std::string& s) {
  static const std::pair<const char*, CombAlg> table[] = {
      {"permit-overrides", CombAlg::permit_overrides},
      {"deny-overrides", CombAlg::deny_overrides},
      {"deny-unless-permit", CombAlg::deny_unless_permit},
      {"permit-unless-deny", CombAlg::permit_unless_deny},
      {"first-applicable", CombAlg::first_applicable},
      {"only-one-applicable", CombAlg::only_one_applicable},
      {"weak-consensus", CombAlg::weak_consensus},
      {"strong-consensus", CombAlg::strong_consensus},
  };
  for (const auto& [n, a] : table)
    if (s == n) return a;
  return std::nullopt;
}

struct Policy;
using PolicyPtr = std::shared_ptr<const Policy>;

struct Rule {
  Effect effect;
  ExprPtr target;  // never null
};

struct PolicySet {
  CombAlg alg;
  ExprPtr target;  // never null; an omitted target parses as literal true
  std::vector<PolicyPtr> children;  // non-empty
};

struct Policy {
  std::variant<Rule, PolicySet> node;

  bool is_rule() const { return std::holds_alternative<Rule>(node); }
  const Rule& rule() const { return std::get<Rule>(node); }
  const PolicySet& set() const { return std::get<PolicySet>(node); }

  static PolicyPtr make_rule(Effect e, ExprPtr target) {
    auto p = std::make_shared<Policy>();
    p->node = Rule{e, std::move(target)};
    return p;
  }
  static PolicyPtr make_set(CombAlg alg, ExprPtr target, std::vector<PolicyPtr> children) {
    if (children.empty()) throw std::invalid_argument("policy set needs at least one child");
    auto p = std::make_shared<Policy>();
    p->node = PolicySet{alg, std::move(target), std::move(children)};
    return p;
  }
};

inline bool equal_policies(const Policy& a, const Policy& b) {
  if (a.is_rule() != b.is_rule()) return false;
  if (a.is_rule()) {
    return a.rule().effect == b.rule().effect &&
           equal_exprs(*a.rule().target, *b.rule().target);
  }
  const auto& x = a.set();
  const auto& y = b.set();
  if (x.alg != y.alg || x.children.size() != y.children.size()) return false;
  if (!equal_exprs(*x.target, *y.target)) return false;
  for (std::size_t i = 0; i < x.children.size(); ++i)
    if (!equal_policies(*x.children[i], *y.children[i])) return false;
  return true;
}

// Top-level policy decision point: a targetless combination of policies.
struct Pdp {
  CombAlg alg;
  std::vector<PolicyPtr> policies;  // non-empty
};

// What a .facpl file holds: either a single policy or a pdp.
using PolicyOrPdp = std::variant<PolicyPtr, Pdp>;

}  // namespace facpl
