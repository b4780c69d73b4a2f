#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "facpl/policy.hpp"
#include "facpl/types.hpp"

namespace facpl {

// ---------------------------------------------------------------------------
// Finite attribute domains
// ---------------------------------------------------------------------------

enum class AttrKind { boolean, number, string, date, string_set };

inline const char* to_string(AttrKind k) {
  switch (k) {
    case AttrKind::boolean: return "boolean";
    case AttrKind::number: return "double";
    case AttrKind::string: return "string";
    case AttrKind::date: return "date";
    case AttrKind::string_set: return "set-of-string";
  }
  return "?";
}

struct AttrDomain {
  AttrName name;
  AttrKind kind = AttrKind::string;
  std::vector<Value> universe;  // non-empty, duplicate-free, declared order
  bool allow_absent = true;

  // Number of enumerable bindings: universe values (non-empty subsets for
  // set kinds), plus Absent when allowed.
  unsigned long long option_count() const {
    unsigned long long n;
    if (kind == AttrKind::string_set) {
      if (universe.size() >= 63) throw std::invalid_argument("set universe too large");
      n = (1ULL << universe.size()) - 1;
    } else {
      n = universe.size();
    }
    return n + (allow_absent ? 1 : 0);
  }
};

// The finite value universe per attribute name; induces the enumerable
// request space.
struct DomainSpec {
  std::vector<AttrDomain> attrs;  // declared order drives enumeration order

  const AttrDomain* find(const AttrName& n) const {
    for (const auto& a : attrs)
      if (a.name == n) return &a;
    return nullptr;
  }

  int index_of(const AttrName& n) const {
    for (std::size_t i = 0; i < attrs.size(); ++i)
      if (attrs[i].name == n) return static_cast<int>(i);
    return -1;
  }

  void add(AttrDomain a) {
    if (a.universe.empty()) throw std::invalid_argument("empty universe for " + a.name.str());
    std::set<Value> seen;
    for (const auto& v : a.universe)
      if (!seen.insert(v).second)
        throw std::invalid_argument("duplicate universe value for " + a.name.str());
    if (find(a.name)) throw std::invalid_argument("duplicate attribute " + a.name.str());
    attrs.push_back(std::move(a));
  }

  // Total request count, saturating at `cap + 1` so callers can test the cap
  // without overflow.
  unsigned long long request_count(unsigned long long cap) const {
    unsigned long long total = 1;
    for (const auto& a : attrs) {
      unsigned long long n = a.option_count();
      if (total > (cap + 1) / n + 1) return cap + 1;
      total *= n;
      if (total > cap) return cap + 1;
    }
    return total;
  }
};

// A set of requests: the members of a finite domain selected by a boolean
// constraint. A request belongs to the set iff the constraint evaluates to
// boolean true under it; Absent or error classify as non-member.
struct RequestSetSpec {
  DomainSpec domain;
  ExprPtr constraint;  // never null
};

// ---------------------------------------------------------------------------
// Engine configuration: level order and role hierarchy
// ---------------------------------------------------------------------------

// Holds the partially ordered set of confidentiality levels behind leq and
// the role DAG behind sub-role. Immutable once built.
class EngineConfig {
 public:
  EngineConfig() = default;

  // Builds from base pairs `a <= b` and role edges `child -> parent`.
  // Computes the reflexive-transitive closure of the level order and rejects
  // antisymmetry violations and role cycles.
  static EngineConfig make(const std::vector<std::pair<std::string, std::string>>& level_pairs,
                           const std::vector<std::pair<std::string, std::string>>& role_edges) {
    EngineConfig c;
    for (const auto& [a, b] : level_pairs) {
      c.levels_.insert(a);
      c.levels_.insert(b);
      c.leq_.insert({a, b});
    }
    for (const auto& l : c.levels_) c.leq_.insert({l, l});
    // transitive closure
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [a, b] : std::set<std::pair<std::string, std::string>>(c.leq_))
        for (const auto& l : c.levels_)
          if (c.leq_.count({b, l}) && c.leq_.insert({a, l}).second) changed = true;
    }
    for (const auto& [a, b] : c.leq_)
      if (a != b && c.leq_.count({b, a}))
        throw std::invalid_argument("level order is not antisymmetric: " + a + " and " + b);

    for (const auto& [child, parent] : role_edges) {
      c.roles_.insert(child);
      c.roles_.insert(parent);
      c.parents_[child].push_back(parent);
    }
    // cycle check via DFS colouring
    std::map<std::string, int> colour;
    for (const auto& r : c.roles_)
      if (c.has_cycle(r, colour)) throw std::invalid_argument("role cycle through " + r);
    return c;
  }

  bool level_defined(const std::string& l) const { return levels_.count(l) != 0; }
  bool role_defined(const std::string& r) const { return roles_.count(r) != 0; }

  // a <=_L b
  bool level_leq(const std::string& a, const std::string& b) const {
    return leq_.count({a, b}) != 0;
  }

  // true iff `child` reaches `ancestor` in the role hierarchy (incl. itself)
  bool sub_role(const std::string& child, const std::string& ancestor) const {
    if (child == ancestor) return role_defined(child);
    std::vector<std::string> stack{child};
    std::set<std::string> seen;
    while (!stack.empty()) {
      std::string r = stack.back();
      stack.pop_back();
      if (!seen.insert(r).second) continue;
      if (r == ancestor) return true;
      auto it = parents_.find(r);
      if (it != parents_.end())
        for (const auto& p : it->second) stack.push_back(p);
    }
    return false;
  }

  const std::set<std::pair<std::string, std::string>>& level_order() const { return leq_; }
  const std::set<std::string>& levels() const { return levels_; }
  const std::set<std::string>& roles() const { return roles_; }

 private:
  bool has_cycle(const std::string& r, std::map<std::string, int>& colour) const {
    int& c = colour[r];
    if (c == 2) return false;
    if (c == 1) return true;
    c = 1;
    auto it = parents_.find(r);
    if (it != parents_.end())
      for (const auto& p : it->second)
        if (has_cycle(p, colour)) return true;
    colour[r] = 2;
    return false;
  }

  std::set<std::string> levels_;
  std::set<std::pair<std::string, std::string>> leq_;
  std::set<std::string> roles_;
  std::map<std::string, std::vector<std::string>> parents_;
};

}  // namespace facpl
