// facpl-minismt: reference satisfiability checker for the quantifier-free,
// finite-domain SMT-LIB fragment the facpl encoder emits.
//
// Reads an SMT-LIB 2 script on standard input and prints sat/unsat (plus a
// model on sat) like a conventional solver. Variables are Bool, Real, or
// members of a declared enumeration datatype. Reals are only compared for
// equality against numeric constants, so candidate values can be collected
// syntactically; one extra fresh value represents "different from every
// constant". Satisfiability is decided by exhaustive assignment enumeration,
// which is sound and complete for this fragment.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace {

// ---------------------------------------------------------------------------
// S-expressions
// ---------------------------------------------------------------------------

struct Sexp {
  std::string atom;  // empty means list
  std::vector<Sexp> items;

  bool is_atom() const { return items.empty() && !atom.empty(); }
  const std::string& head() const {
    static const std::string empty;
    return items.empty() ? empty : items[0].atom;
  }
};

void skip_ws(const std::string& s, size_t& i) {
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

std::optional<Sexp> parse_sexp(const std::string& s, size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) return std::nullopt;
  if (s[i] == '(') {
    ++i;
    Sexp list;
    while (true) {
      skip_ws(s, i);
      if (i >= s.size()) {
        std::cerr << "minismt: unbalanced parenthesis\n";
        std::exit(1);
      }
      if (s[i] == ')') {
        ++i;
        return list;
      }
      auto item = parse_sexp(s, i);
      if (!item) return std::nullopt;
      list.items.push_back(std::move(*item));
    }
  }
  if (s[i] == ')') {
    std::cerr << "minismt: stray ')'\n";
    std::exit(1);
  }
  Sexp a;
  if (s[i] == '|') {  // quoted symbol
    ++i;
    while (i < s.size() && s[i] != '|') a.atom.push_back(s[i++]);
    ++i;
    return a;
  }
  while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
         s[i] != ')' && s[i] != ';')
    a.atom.push_back(s[i++]);
  return a;
}

// ---------------------------------------------------------------------------
// Solver state
// ---------------------------------------------------------------------------

// A runtime value: boolean, rational-as-double, or enum constructor name.
using RtValue = std::variant<bool, double, std::string>;

struct Variable {
  std::string name;
  std::string sort;                    // "Bool", "Real", or a datatype name
  std::vector<RtValue> candidates;     // filled before solving
};

struct State {
  std::map<std::string, std::vector<std::string>> datatypes;  // sort -> constructors
  std::set<std::string> constructors;
  std::vector<Variable> vars;          // declaration order
  std::map<std::string, size_t> var_index;
  std::vector<Sexp> assertions;
  bool last_sat = false;
  std::map<std::string, RtValue> model;
};

bool is_number(const std::string& a) {
  if (a.empty()) return false;
  char c = a[0];
  return std::isdigit(static_cast<unsigned char>(c)) ||
         ((c == '-' || c == '.') && a.size() > 1);
}

double eval_num(const Sexp& e, const std::map<std::string, RtValue>& env);

RtValue eval(const Sexp& e, const std::map<std::string, RtValue>& env,
             const State& st) {
  if (e.is_atom()) {
    if (e.atom == "true") return true;
    if (e.atom == "false") return false;
    if (auto it = env.find(e.atom); it != env.end()) return it->second;
    if (st.constructors.count(e.atom)) return e.atom;
    if (is_number(e.atom)) return std::strtod(e.atom.c_str(), nullptr);
    std::cerr << "minismt: unknown symbol " << e.atom << "\n";
    std::exit(1);
  }
  const std::string& op = e.head();
  auto arg = [&](size_t i) { return eval(e.items[i], env, st); };
  auto as_bool = [&](size_t i) {
    RtValue v = arg(i);
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    std::cerr << "minismt: boolean expected under " << op << "\n";
    std::exit(1);
  };

  if (op == "and") {
    for (size_t i = 1; i < e.items.size(); ++i)
      if (!as_bool(i)) return false;
    return true;
  }
  if (op == "or") {
    for (size_t i = 1; i < e.items.size(); ++i)
      if (as_bool(i)) return true;
    return false;
  }
  if (op == "not") return !as_bool(1);
  if (op == "=>") return !as_bool(1) || as_bool(2);
  if (op == "ite") return as_bool(1) ? arg(2) : arg(3);
  if (op == "=") {
    RtValue first = arg(1);
    for (size_t i = 2; i < e.items.size(); ++i)
      if (arg(i) != first) return false;
    return true;
  }
  if (op == "distinct") {
    std::vector<RtValue> seen;
    for (size_t i = 1; i < e.items.size(); ++i) {
      RtValue v = arg(i);
      for (const auto& s : seen)
        if (s == v) return false;
      seen.push_back(std::move(v));
    }
    return true;
  }
  if (op == "<" || op == "<=" || op == ">" || op == ">=") {
    double a = eval_num(e.items[1], env), b = eval_num(e.items[2], env);
    if (op == "<") return a < b;
    if (op == "<=") return a <= b;
    if (op == ">") return a > b;
    return a >= b;
  }
  if (op == "+" || op == "-" || op == "*" || op == "/") return eval_num(e, env);
  std::cerr << "minismt: unsupported operator " << op << "\n";
  std::exit(1);
}

double eval_num(const Sexp& e, const std::map<std::string, RtValue>& env) {
  if (e.is_atom()) {
    if (auto it = env.find(e.atom); it != env.end())
      if (const double* d = std::get_if<double>(&it->second)) return *d;
    if (is_number(e.atom)) return std::strtod(e.atom.c_str(), nullptr);
    std::cerr << "minismt: numeric expected, got " << e.atom << "\n";
    std::exit(1);
  }
  const std::string& op = e.head();
  if (op == "-" && e.items.size() == 2) return -eval_num(e.items[1], env);
  double acc = eval_num(e.items[1], env);
  for (size_t i = 2; i < e.items.size(); ++i) {
    double v = eval_num(e.items[i], env);
    if (op == "+") acc += v;
    else if (op == "-") acc -= v;
    else if (op == "*") acc *= v;
    else if (op == "/") acc /= v;
  }
  return acc;
}

// Collects candidate constants for Real variables from (= var c) atoms, in
// either argument order.
void collect_real_candidates(const Sexp& e, State& st) {
  if (e.head() == "=" && e.items.size() == 3) {
    for (int k : {1, 2}) {
      const Sexp& lhs = e.items[static_cast<size_t>(k)];
      const Sexp& rhs = e.items[static_cast<size_t>(3 - k)];
      if (!lhs.is_atom()) continue;
      auto it = st.var_index.find(lhs.atom);
      if (it == st.var_index.end() || st.vars[it->second].sort != "Real") continue;
      double v;
      if (rhs.is_atom() && is_number(rhs.atom)) {
        v = std::strtod(rhs.atom.c_str(), nullptr);
      } else if (rhs.head() == "-" && rhs.items.size() == 2 && rhs.items[1].is_atom()) {
        v = -std::strtod(rhs.items[1].atom.c_str(), nullptr);
      } else {
        continue;
      }
      auto& cand = st.vars[it->second].candidates;
      bool seen = false;
      for (const auto& c : cand)
        if (std::get<double>(c) == v) seen = true;
      if (!seen) cand.push_back(v);
    }
  }
  for (const auto& item : e.items) collect_real_candidates(item, st);
}

void check_sat(State& st) {
  for (auto& v : st.vars) {
    if (v.sort == "Bool") {
      v.candidates = {true, false};
    } else if (v.sort == "Real") {
      v.candidates.clear();
    } else {
      auto it = st.datatypes.find(v.sort);
      if (it == st.datatypes.end()) {
        std::cerr << "minismt: unknown sort " << v.sort << "\n";
        std::exit(1);
      }
      v.candidates.clear();
      for (const auto& c : it->second) v.candidates.emplace_back(c);
    }
  }
  for (const auto& a : st.assertions) collect_real_candidates(a, st);
  for (auto& v : st.vars) {
    if (v.sort != "Real") continue;
    double fresh = 0;
    for (const auto& c : v.candidates) fresh = std::max(fresh, std::get<double>(c));
    v.candidates.push_back(fresh + 1);  // "none of the mentioned constants"
  }

  std::map<std::string, RtValue> env;
  std::vector<size_t> odo(st.vars.size(), 0);
  while (true) {
    for (size_t i = 0; i < st.vars.size(); ++i) env[st.vars[i].name] = st.vars[i].candidates[odo[i]];
    bool ok = true;
    for (const auto& a : st.assertions) {
      RtValue v = eval(a, env, st);
      if (!std::get<bool>(v)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      st.last_sat = true;
      st.model = env;
      std::cout << "sat\n";
      return;
    }
    size_t i = st.vars.size();
    while (true) {
      if (i == 0) {
        st.last_sat = false;
        std::cout << "unsat\n";
        return;
      }
      --i;
      if (++odo[i] < st.vars[i].candidates.size()) break;
      odo[i] = 0;
    }
  }
}

std::string print_rt(const RtValue& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  double d = std::get<double>(v);
  std::ostringstream os;
  os << d;
  std::string s = os.str();
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
  if (!s.empty() && s[0] == '-') return "(- " + s.substr(1) + ")";
  return s;
}

void get_model(const State& st) {
  if (!st.last_sat) {
    std::cout << "(error \"model is not available\")\n";
    return;
  }
  std::cout << "(\n";
  for (const auto& v : st.vars) {
    auto it = st.model.find(v.name);
    if (it == st.model.end()) continue;
    std::cout << "  (define-fun " << v.name << " () " << v.sort << " " << print_rt(it->second)
              << ")\n";
  }
  std::cout << ")\n";
}

}  // namespace

int main() {
  std::ostringstream buf;
  buf << std::cin.rdbuf();
  std::string input = buf.str();

  State st;
  size_t pos = 0;
  bool answered = false;
  while (auto cmd = parse_sexp(input, pos)) {
    const std::string& op = cmd->head();
    if (op == "set-logic" || op == "set-option" || op == "set-info") continue;
    if (op == "declare-datatypes") {
      // ((Name 0) ...) (((c1) (c2) ...) ...)
      const auto& names = cmd->items[1].items;
      const auto& defs = cmd->items[2].items;
      for (size_t i = 0; i < names.size(); ++i) {
        std::string sort = names[i].items[0].atom;
        std::vector<std::string> ctors;
        for (const auto& c : defs[i].items) {
          const std::string& ctor = c.is_atom() ? c.atom : c.items[0].atom;
          ctors.push_back(ctor);
          st.constructors.insert(ctor);
        }
        st.datatypes[sort] = std::move(ctors);
      }
      continue;
    }
    if (op == "declare-const" || op == "declare-fun") {
      Variable v;
      v.name = cmd->items[1].atom;
      v.sort = cmd->items.back().atom;
      st.var_index[v.name] = st.vars.size();
      st.vars.push_back(std::move(v));
      continue;
    }
    if (op == "assert") {
      st.assertions.push_back(cmd->items[1]);
      continue;
    }
    if (op == "check-sat") {
      check_sat(st);
      answered = true;
      continue;
    }
    if (op == "get-model") {
      get_model(st);
      continue;
    }
    if (op == "exit") break;
    std::cerr << "minismt: ignoring unsupported command " << op << "\n";
  }
  if (!answered) std::cout << "unknown\n";
  return 0;
}
