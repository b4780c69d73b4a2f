#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "facpl/domain.hpp"
#include "facpl/policy.hpp"
#include "facpl/types.hpp"

namespace facpl {

// Syntax error with a 1-based source position and the offending line.
class SourceError : public std::runtime_error {
 public:
  SourceError(int line, int column, std::string message, std::string snippet)
      : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(column) +
                           ": " + message),
        line_(line),
        column_(column),
        message_(std::move(message)),
        snippet_(std::move(snippet)) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }
  const std::string& snippet() const { return snippet_; }

 private:
  int line_;
  int column_;
  std::string message_;
  std::string snippet_;
};

namespace detail {

enum class Tok {
  ident,      // bare identifier (may contain . and -)
  number,
  string,     // double-quoted, already unescaped
  date,
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  colon,
  slash,
  leq_arrow,  // <=
  role_arrow, // ->
  end,
};

struct Token {
  Tok kind;
  std::string text;
  double num = 0;
  Date date;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw SourceError(at.line, at.column, msg, line_snippet(at.line));
  }

  std::string line_snippet(int line) const {
    int cur = 1;
    std::size_t start = 0;
    for (std::size_t i = 0; i < src_.size() && cur < line; ++i)
      if (src_[i] == '\n') {
        ++cur;
        start = i + 1;
      }
    std::size_t end = src_.find('\n', start);
    if (end == std::string_view::npos) end = src_.size();
    return std::string(src_.substr(start, end - start));
  }

  Token next() {
    skip_ws_and_comments();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::end;
      return t;
    }
    char c = src_[pos_];
    switch (c) {
      case '(': return punct(t, Tok::lparen);
      case ')': return punct(t, Tok::rparen);
      case '{': return punct(t, Tok::lbrace);
      case '}': return punct(t, Tok::rbrace);
      case ',': return punct(t, Tok::comma);
      case ':': return punct(t, Tok::colon);
      case '/': return punct(t, Tok::slash);
      default: break;
    }
    if (c == '<' && peek(1) == '=') {
      advance();
      advance();
      t.kind = Tok::leq_arrow;
      return t;
    }
    if (c == '-' && peek(1) == '>') {
      advance();
      advance();
      t.kind = Tok::role_arrow;
      return t;
    }
    if (c == '"') return lex_string(t);
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1)))))
      return lex_number_or_date(t);
    if (std::isalpha(static_cast<unsigned char>(c))) return lex_ident(t);
    fail(t, std::string("unexpected character '") + c + "'");
  }

 private:
  char peek(std::size_t off = 0) const {
    return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
  }

  void advance() {
    if (pos_ < src_.size()) {
      if (src_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  void skip_ws_and_comments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token punct(Token& t, Tok kind) {
    t.kind = kind;
    t.text = src_[pos_];
    advance();
    return t;
  }

  Token lex_string(Token& t) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') fail(t, "unterminated string literal");
      char c = src_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        char esc = peek();
        if (esc == '"' || esc == '\\') {
          out.push_back(esc);
          advance();
        } else {
          fail(t, "unknown escape sequence");
        }
      } else {
        out.push_back(c);
        advance();
      }
    }
    t.kind = Tok::string;
    t.text = std::move(out);
    return t;
  }

  Token lex_number_or_date(Token& t) {
    std::size_t start = pos_;
    if (peek() == '-') advance();
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    // ISO date: YYYY-MM-DD (a '-' followed by a digit, two groups)
    if (peek() == '-' && std::isdigit(static_cast<unsigned char>(peek(1))) &&
        src_[start] != '-') {
      std::string y(src_.substr(start, pos_ - start));
      advance();
      std::string mo, d;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        mo.push_back(peek());
        advance();
      }
      if (peek() == '-') {
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          d.push_back(peek());
          advance();
        }
        if (y.size() == 4 && mo.size() == 2 && d.size() == 2) {
          int yy = std::atoi(y.c_str()), mm = std::atoi(mo.c_str()), dd = std::atoi(d.c_str());
          if (!Date::valid(yy, mm, dd)) fail(t, "invalid calendar date");
          t.kind = Tok::date;
          t.date = Date{yy, mm, dd};
          return t;
        }
      }
      fail(t, "malformed date literal");
    }
    if (peek() == '.') {
      advance();
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail(t, "malformed number");
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      advance();
      if (peek() == '+' || peek() == '-') advance();
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail(t, "malformed number");
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    std::string text(src_.substr(start, pos_ - start));
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(v))
      fail(t, "non-finite or malformed double literal");
    t.kind = Tok::number;
    t.num = v;
    t.text = std::move(text);
    return t;
  }

  Token lex_ident(Token& t) {
    std::size_t start = pos_;
    while (true) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        advance();
      } else if (c == '-' && peek(1) != '>' &&
                 (std::isalnum(static_cast<unsigned char>(peek(1))) || peek(1) == '_')) {
        advance();
      } else {
        break;
      }
    }
    t.kind = Tok::ident;
    t.text = std::string(src_.substr(start, pos_ - start));
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { shift(); }

  // ---- policies -----------------------------------------------------------

  PolicyOrPdp parse_policy_file() {
    PolicyOrPdp result = [&]() -> PolicyOrPdp {
      if (cur_.kind == Tok::ident && cur_.text == "pdp") return parse_pdp();
      return parse_policy(0);
    }();
    expect_end();
    return result;
  }

  Pdp parse_pdp() {
    expect_ident("pdp");
    expect(Tok::lbrace, "expected '{' after pdp");
    Pdp pdp;
    pdp.alg = parse_alg();
    expect_keyword("policies");
    pdp.policies = parse_policy_list(0);
    expect(Tok::rbrace, "expected '}' closing pdp");
    return pdp;
  }

  PolicyPtr parse_policy(int depth) {
    check_depth(depth);
    if (cur_.kind == Tok::lparen) {
      shift();
      Effect e;
      if (cur_.kind == Tok::ident && cur_.text == "permit") {
        e = Effect::permit;
      } else if (cur_.kind == Tok::ident && cur_.text == "deny") {
        e = Effect::deny;
      } else {
        fail("expected effect 'permit' or 'deny'");
      }
      shift();
      expect_keyword("target");
      ExprPtr target = parse_expr(depth + 1);
      expect(Tok::rparen, "expected ')' closing rule");
      return Policy::make_rule(e, std::move(target));
    }
    if (cur_.kind == Tok::lbrace) {
      shift();
      CombAlg alg = parse_alg();
      ExprPtr target = expr_true();  // omitted target means the set always applies
      if (cur_.kind == Tok::ident && cur_.text == "target") {
        expect_keyword("target");
        target = parse_expr(depth + 1);
      }
      expect_keyword("policies");
      auto children = parse_policy_list(depth + 1);
      expect(Tok::rbrace, "expected '}' closing policy set");
      return Policy::make_set(alg, std::move(target), std::move(children));
    }
    fail("expected a rule '(' or a policy set '{'");
  }

  // ---- expressions --------------------------------------------------------

  ExprPtr parse_expr(int depth) {
    check_depth(depth);
    switch (cur_.kind) {
      case Tok::string: {
        Value v{cur_.text};
        shift();
        return Expr::constant(std::move(v));
      }
      case Tok::number: {
        Value v{cur_.num};
        shift();
        return Expr::constant(std::move(v));
      }
      case Tok::date: {
        Value v{cur_.date};
        shift();
        return Expr::constant(std::move(v));
      }
      case Tok::lbrace:
        return parse_set_literal();
      case Tok::ident:
        break;
      default:
        fail("expected an expression");
    }
    std::string head = cur_.text;
    Token head_tok = cur_;
    shift();
    if (head == "true") return Expr::constant(Value(true));
    if (head == "false") return Expr::constant(Value(false));
    if (cur_.kind == Tok::slash) {
      shift();
      if (cur_.kind != Tok::ident) fail("expected attribute identifier after '/'");
      std::string att = cur_.text;
      shift();
      return Expr::ref(AttrName(head, att));
    }
    if (cur_.kind == Tok::lparen) {
      ExprOp op = function_op(head_tok, head);
      shift();
      std::vector<ExprPtr> args;
      args.push_back(parse_expr(depth + 1));
      while (cur_.kind == Tok::comma) {
        shift();
        args.push_back(parse_expr(depth + 1));
      }
      expect(Tok::rparen, "expected ')' closing call");
      if (static_cast<int>(args.size()) != arity(op))
        lex_.fail(head_tok, "wrong number of arguments for " + head);
      return Expr::call(op, std::move(args));
    }
    lex_.fail(head_tok, "expected '/' or '(' after identifier '" + head + "'");
  }

  ExprPtr parse_set_literal() {
    expect(Tok::lbrace, "expected '{'");
    std::vector<Value> vs;
    vs.push_back(parse_value());
    while (cur_.kind == Tok::comma) {
      shift();
      vs.push_back(parse_value());
    }
    Token at = cur_;
    expect(Tok::rbrace, "expected '}' closing set literal");
    try {
      return Expr::constant_set(ValueSet::of(std::move(vs)));
    } catch (const std::invalid_argument& e) {
      lex_.fail(at, e.what());
    }
  }

  // A literal value: quoted string, number, date, true/false, or a bare
  // identifier read as a string (request-file convenience).
  Value parse_value() {
    switch (cur_.kind) {
      case Tok::string: {
        Value v{cur_.text};
        shift();
        return v;
      }
      case Tok::number: {
        Value v{cur_.num};
        shift();
        return v;
      }
      case Tok::date: {
        Value v{cur_.date};
        shift();
        return v;
      }
      case Tok::ident: {
        if (cur_.text == "true" || cur_.text == "false") {
          Value v{cur_.text == "true"};
          shift();
          return v;
        }
        Value v{cur_.text};
        shift();
        return v;
      }
      default:
        fail("expected a value literal");
    }
  }

  // ---- requests -----------------------------------------------------------

  Request parse_request_file() {
    std::vector<std::pair<AttrName, Value>> entries;
    while (cur_.kind != Tok::end) {
      expect(Tok::lparen, "expected '(' starting request pair");
      AttrName name = parse_attr_name();
      expect(Tok::comma, "expected ',' between name and value");
      Value v = parse_value();
      expect(Tok::rparen, "expected ')' closing request pair");
      entries.emplace_back(std::move(name), std::move(v));
    }
    try {
      return Request::from_entries(entries);
    } catch (const std::invalid_argument& e) {
      throw SourceError(cur_.line, cur_.column, e.what(), "");
    }
  }

  // ---- domains ------------------------------------------------------------

  DomainSpec parse_domain_file() {
    DomainSpec dom;
    while (cur_.kind != Tok::end) {
      AttrDomain a;
      Token at = cur_;
      a.name = parse_attr_name();
      expect(Tok::colon, "expected ':' after attribute name");
      a.kind = parse_attr_kind();
      expect_ident("in");
      expect(Tok::lbrace, "expected '{' starting universe");
      a.universe.push_back(parse_value());
      while (cur_.kind == Tok::comma) {
        shift();
        a.universe.push_back(parse_value());
      }
      expect(Tok::rbrace, "expected '}' closing universe");
      if (cur_.kind == Tok::ident && cur_.text == "required") {
        a.allow_absent = false;
        shift();
      }
      check_universe(at, a);
      try {
        dom.add(std::move(a));
      } catch (const std::invalid_argument& e) {
        lex_.fail(at, e.what());
      }
    }
    return dom;
  }

  // ---- engine configuration -----------------------------------------------

  EngineConfig parse_config_file() {
    std::vector<std::pair<std::string, std::string>> levels, roles;
    Token at = cur_;
    while (cur_.kind != Tok::end) {
      if (cur_.kind != Tok::ident || (cur_.text != "levels" && cur_.text != "roles"))
        fail("expected section 'levels:' or 'roles:'");
      bool in_levels = cur_.text == "levels";
      shift();
      expect(Tok::colon, "expected ':' after section name");
      while (cur_.kind == Tok::ident && cur_.text != "levels" && cur_.text != "roles") {
        std::string a = cur_.text;
        shift();
        if (in_levels) {
          expect(Tok::leq_arrow, "expected '<=' in level pair");
        } else {
          expect(Tok::role_arrow, "expected '->' in role edge");
        }
        if (cur_.kind != Tok::ident) fail("expected identifier");
        std::string b = cur_.text;
        shift();
        (in_levels ? levels : roles).emplace_back(std::move(a), std::move(b));
      }
    }
    try {
      return EngineConfig::make(levels, roles);
    } catch (const std::invalid_argument& e) {
      lex_.fail(at, e.what());
    }
  }

  // ---- request-set constraints ---------------------------------------------

  ExprPtr parse_constraint_file() {
    ExprPtr e = parse_expr(0);
    expect_end();
    return e;
  }

 private:
  static constexpr int kMaxDepth = 256;

  ExprOp function_op(const Token& at, const std::string& name) {
    static const std::pair<const char*, ExprOp> table[] = {
        {"and", ExprOp::logic_and},   {"or", ExprOp::logic_or},
        {"not", ExprOp::logic_not},   {"equal", ExprOp::equal},
        {"in", ExprOp::in},           {"greater-than", ExprOp::greater_than},
        {"add", ExprOp::add},         {"subtract", ExprOp::subtract},
        {"divide", ExprOp::divide},   {"multiply", ExprOp::multiply},
        {"leq", ExprOp::leq},         {"sub-role", ExprOp::sub_role},
    };
    for (const auto& [n, op] : table)
      if (name == n) return op;
    lex_.fail(at, "unknown function '" + name + "'");
  }

  void check_depth(int depth) {
    if (depth > kMaxDepth) fail("nesting too deep");
  }

  AttrName parse_attr_name() {
    if (cur_.kind != Tok::ident) fail("expected attribute name");
    std::string cat = cur_.text;
    shift();
    expect(Tok::slash, "expected '/' in attribute name");
    if (cur_.kind != Tok::ident) fail("expected attribute identifier after '/'");
    std::string att = cur_.text;
    shift();
    return AttrName(std::move(cat), std::move(att));
  }

  AttrKind parse_attr_kind() {
    if (cur_.kind != Tok::ident) fail("expected attribute kind");
    std::string k = cur_.text;
    shift();
    if (k == "boolean") return AttrKind::boolean;
    if (k == "double") return AttrKind::number;
    if (k == "string") return AttrKind::string;
    if (k == "date") return AttrKind::date;
    if (k == "set-of-string") return AttrKind::string_set;
    fail("unknown attribute kind '" + k + "'");
  }

  void check_universe(const Token& at, const AttrDomain& a) {
    ValueKind want;
    switch (a.kind) {
      case AttrKind::boolean: want = ValueKind::boolean; break;
      case AttrKind::number: want = ValueKind::number; break;
      case AttrKind::date: want = ValueKind::date; break;
      default: want = ValueKind::string; break;
    }
    for (const auto& v : a.universe)
      if (v.kind() != want)
        lex_.fail(at, std::string("universe value of kind ") + to_string(v.kind()) +
                          " does not match declared kind " + to_string(a.kind));
  }

  CombAlg parse_alg() {
    if (cur_.kind != Tok::ident) fail("expected combining algorithm");
    auto alg = comb_alg_from(cur_.text);
    if (!alg) fail("unknown combining algorithm '" + cur_.text + "'");
    shift();
    return *alg;
  }

  std::vector<PolicyPtr> parse_policy_list(int depth) {
    std::vector<PolicyPtr> ps;
    while (cur_.kind == Tok::lparen || cur_.kind == Tok::lbrace)
      ps.push_back(parse_policy(depth));
    if (ps.empty()) fail("empty policy list");
    return ps;
  }

  void expect(Tok kind, const std::string& msg) {
    if (cur_.kind != kind) fail(msg);
    shift();
  }

  void expect_ident(const std::string& word) {
    if (cur_.kind != Tok::ident || cur_.text != word) fail("expected '" + word + "'");
    shift();
  }

  void expect_keyword(const std::string& word) {
    expect_ident(word);
    expect(Tok::colon, "expected ':' after '" + word + "'");
  }

  void expect_end() {
    if (cur_.kind != Tok::end) fail("unexpected trailing input");
  }

  [[noreturn]] void fail(const std::string& msg) { lex_.fail(cur_, msg); }

  void shift() { cur_ = lex_.next(); }

  Lexer lex_;
  Token cur_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Public parsing entry points. All throw SourceError on malformed input.
// ---------------------------------------------------------------------------

inline PolicyOrPdp parse_policy(std::string_view text) {
  return detail::Parser(text).parse_policy_file();
}

inline Request parse_request(std::string_view text) {
  return detail::Parser(text).parse_request_file();
}

inline DomainSpec parse_domain(std::string_view text) {
  return detail::Parser(text).parse_domain_file();
}

inline EngineConfig parse_config(std::string_view text) {
  return detail::Parser(text).parse_config_file();
}

inline ExprPtr parse_constraint(std::string_view text) {
  return detail::Parser(text).parse_constraint_file();
}

}  // namespace facpl
