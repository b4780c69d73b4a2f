#pragma once

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>

#include "facpl/domain.hpp"
#include "facpl/policy.hpp"
#include "facpl/types.hpp"

namespace facpl {

// Shortest round-trip formatting; reparsing yields the exact same double.
inline std::string format_double(double d) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, p);
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

inline std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string print_value(const Value& v) {
  switch (v.kind()) {
    case ValueKind::boolean: return v.as_bool() ? "true" : "false";
    case ValueKind::number: return format_double(v.as_number());
    case ValueKind::string: return quote_string(v.as_string());
    case ValueKind::date: return format_date(v.as_date());
  }
  return "?";
}

inline std::string print_value_set(const ValueSet& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& v : s.elems()) {
    if (!first) out += ", ";
    out += print_value(v);
    first = false;
  }
  return out + "}";
}

inline std::string print_expr(const Expr& e) {
  switch (e.op) {
    case ExprOp::name: return e.name.str();
    case ExprOp::literal: return print_value(e.lit);
    case ExprOp::set_literal: return print_value_set(e.set);
    default: {
      std::string out = to_string(e.op);
      out += "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(*e.args[i]);
      }
      return out + ")";
    }
  }
}

namespace detail {

inline void print_policy_rec(const Policy& p, std::string& out, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (p.is_rule()) {
    out += pad + "( " + to_string(p.rule().effect) + " target: " +
           print_expr(*p.rule().target) + " )\n";
    return;
  }
  const PolicySet& s = p.set();
  out += pad + "{ " + to_string(s.alg) + "\n";
  out += pad + "  target: " + print_expr(*s.target) + "\n";
  out += pad + "  policies:\n";
  for (const auto& c : s.children) print_policy_rec(*c, out, indent + 2);
  out += pad + "}\n";
}

}  // namespace detail

inline std::string print_policy(const Policy& p) {
  std::string out;
  detail::print_policy_rec(p, out, 0);
  return out;
}

inline std::string print_policy(const PolicyOrPdp& p) {
  if (const auto* pol = std::get_if<PolicyPtr>(&p)) return print_policy(**pol);
  const Pdp& pdp = std::get<Pdp>(p);
  std::string out = "pdp { " + std::string(to_string(pdp.alg)) + "\n  policies:\n";
  for (const auto& c : pdp.policies) detail::print_policy_rec(*c, out, 2);
  return out + "}\n";
}

// Renders a request in .req syntax. Set bindings expand into one pair per
// element (singleton sets into two identical pairs) so the text reparses to
// an equal request under the collapse rule.
inline std::string print_request(const Request& r) {
  std::string out;
  bool first = true;
  auto emit = [&](const AttrName& n, const Value& v) {
    if (!first) out += " ";
    out += "(" + n.str() + ", " + print_value(v) + ")";
    first = false;
  };
  for (const auto& [name, attr] : r.bindings()) {
    if (const auto* v = std::get_if<Value>(&attr)) {
      emit(name, *v);
    } else {
      const ValueSet& s = std::get<ValueSet>(attr);
      for (const auto& v : s.elems()) emit(name, v);
      if (s.elems().size() == 1) emit(name, s.elems().front());
    }
  }
  return out;
}

}  // namespace facpl
