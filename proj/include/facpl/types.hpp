#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace facpl {

// ---------------------------------------------------------------------------
// Decisions and effects
// ---------------------------------------------------------------------------

enum class Decision { permit, deny, not_applicable, indeterminate };

enum class Effect { permit, deny };

inline Decision to_decision(Effect e) {
  return e == Effect::permit ? Decision::permit : Decision::deny;
}

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::permit: return "permit";
    case Decision::deny: return "deny";
    case Decision::not_applicable: return "not-applicable";
    case Decision::indeterminate: return "indeterminate";
  }
  return "?";
}

inline const char* to_string(Effect e) {
  return e == Effect::permit ? "permit" : "deny";
}

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

// Calendar day. Comparison is calendar order.
struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  friend auto operator<=>(const Date&, const Date&) = default;

  static bool valid(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    static const int len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int n = len[m - 1];
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) n = 29;
    return d <= n;
  }
};

enum class ValueKind { boolean, number, string, date };

inline const char* to_string(ValueKind k) {
  switch (k) {
    case ValueKind::boolean: return "boolean";
    case ValueKind::number: return "double";
    case ValueKind::string: return "string";
    case ValueKind::date: return "date";
  }
  return "?";
}

// A literal value: boolean, finite double, string, or date.
class Value {
 public:
  Value() : v_(false) {}
  explicit Value(bool b) : v_(b) {}
  explicit Value(double d) : v_(d) {}
  explicit Value(std::string s) : v_(std::move(s)) {}
  explicit Value(const char* s) : v_(std::string(s)) {}
  explicit Value(Date d) : v_(d) {}

  ValueKind kind() const { return static_cast<ValueKind>(v_.index()); }

  bool is_bool() const { return kind() == ValueKind::boolean; }
  bool is_number() const { return kind() == ValueKind::number; }
  bool is_string() const { return kind() == ValueKind::string; }
  bool is_date() const { return kind() == ValueKind::date; }

  bool as_bool() const { return std::get<bool>(v_); }
  double as_number() const { return std::get<double>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const Date& as_date() const { return std::get<Date>(v_); }

  friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }
  friend bool operator<(const Value& a, const Value& b) {
    if (a.v_.index() != b.v_.index()) return a.v_.index() < b.v_.index();
    return a.v_ < b.v_;
  }

 private:
  std::variant<bool, double, std::string, Date> v_;
};

// Non-empty, duplicate-free set of values of one uniform kind.
class ValueSet {
 public:
  ValueSet() = default;

  // Deduplicates and sorts; all elements must share one kind.
  static ValueSet of(std::vector<Value> vs) {
    if (vs.empty()) throw std::invalid_argument("empty value set");
    ValueKind k = vs.front().kind();
    for (const auto& v : vs)
      if (v.kind() != k) throw std::invalid_argument("mixed-kind value set");
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    ValueSet s;
    s.elems_ = std::move(vs);
    return s;
  }

  const std::vector<Value>& elems() const { return elems_; }
  ValueKind kind() const { return elems_.front().kind(); }
  bool contains(const Value& v) const {
    return std::binary_search(elems_.begin(), elems_.end(), v);
  }

  friend bool operator==(const ValueSet& a, const ValueSet& b) {
    return a.elems_ == b.elems_;
  }

 private:
  std::vector<Value> elems_;
};

// ---------------------------------------------------------------------------
// Attribute names
// ---------------------------------------------------------------------------

inline bool valid_identifier(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

// Structured name cat/att, e.g. subject/role or resource/read.ids.
struct AttrName {
  std::string category;
  std::string attribute;

  AttrName() = default;
  AttrName(std::string cat, std::string att)
      : category(std::move(cat)), attribute(std::move(att)) {
    if (!valid_identifier(category) || !valid_identifier(attribute))
      throw std::invalid_argument("invalid attribute name: " + category + "/" + attribute);
  }

  std::string str() const { return category + "/" + attribute; }

  friend auto operator<=>(const AttrName&, const AttrName&) = default;
};

// ---------------------------------------------------------------------------
// Requests
// ---------------------------------------------------------------------------

// What an attribute name is bound to inside a request.
using Attribute = std::variant<Value, ValueSet>;

struct Absent {};
inline bool operator==(Absent, Absent) { return true; }

// Lookup result: a value, a set of values, or absent.
using Lookup = std::variant<Value, ValueSet, Absent>;

// A request in functional form: a total map from attribute names to values,
// value sets, or absent. Unbound names read as Absent.
class Request {
 public:
  Request() = default;

  // Builds a request from raw (name, value) entries. A name occurring in more
  // than one entry collapses to the set of its distinct values; a single
  // entry stays a plain value. Construction is order-insensitive.
  static Request from_entries(const std::vector<std::pair<AttrName, Value>>& entries) {
    std::map<AttrName, std::vector<Value>> grouped;
    for (const auto& [name, value] : entries) grouped[name].push_back(value);
    Request r;
    for (auto& [name, values] : grouped) {
      if (values.size() == 1)
        r.bindings_.emplace(name, values.front());
      else
        r.bindings_.emplace(name, ValueSet::of(std::move(values)));
    }
    return r;
  }

  void bind(const AttrName& name, Attribute a) { bindings_[name] = std::move(a); }

  Lookup lookup(const AttrName& name) const {
    auto it = bindings_.find(name);
    if (it == bindings_.end()) return Absent{};
    return std::visit([](const auto& v) -> Lookup { return v; }, it->second);
  }

  const std::map<AttrName, Attribute>& bindings() const { return bindings_; }
  std::size_t size() const { return bindings_.size(); }

  friend bool operator==(const Request& a, const Request& b) {
    return a.bindings_ == b.bindings_;
  }

 private:
  std::map<AttrName, Attribute> bindings_;
};

inline Lookup lookup(const Request& r, const AttrName& name) { return r.lookup(name); }

}  // namespace facpl
