#include "mumonoids/parser.hpp"

#include <cctype>
#include <charconv>
#include <climits>
#include <cstdint>
#include <optional>

#include "mumonoids/builtins.hpp"
#include "mumonoids/error.hpp"

namespace mumonoids {

namespace {

enum class Tok { Ident, Upper, Int, Float, String, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

const char* const kSymbols[] = {"->", "<=", ">=", "==", "!=", "++", "(", ")", "{", "}", "[", "]", ",",
                                ";",  ":",  "=",  "\\", "|",  "<",  ">",  "+",  "-", "*", "/"};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto fail = [&](const std::string& msg) -> void {
    throw Error(ErrorKind::Syntax, "lex", std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const int l = line, cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '\'') {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\'')) ++j;
      std::string text(src.substr(i, j - i));
      out.push_back({std::isupper(static_cast<unsigned char>(c)) ? Tok::Upper : Tok::Ident, text, l, cl});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      bool is_float = false;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        is_float = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          is_float = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      out.push_back({is_float ? Tok::Float : Tok::Int, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string text;
      std::size_t j = i + 1;
      for (;; ++j) {
        if (j >= src.size()) fail("unterminated string literal");
        if (src[j] == '"') break;
        if (src[j] == '\\') {
          if (++j >= src.size()) fail("unterminated string literal");
          switch (src[j]) {
            case 'n': text += '\n'; break;
            case 't': text += '\t'; break;
            case '"': text += '"'; break;
            case '\\': text += '\\'; break;
            default: fail("unknown escape sequence");
          }
        } else {
          text += src[j];
        }
      }
      out.push_back({Tok::String, text, l, cl});
      advance(j + 1 - i);
      continue;
    }
    bool matched = false;
    for (const char* s : kSymbols) {
      const std::string_view sv(s);
      if (src.substr(i, sv.size()) == sv) {
        out.push_back({Tok::Sym, std::string(sv), l, cl});
        advance(sv.size());
        matched = true;
        break;
      }
    }
    if (!matched) fail(std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

bool is_keyword(std::string_view s) {
  static const char* const kw[] = {"let",     "in",   "if",         "then",    "else",    "input", "assume",
                                   "flatmap", "reduce", "reduceByKey", "groupBy", "join",   "cogroup",
                                   "fix",     "aggregate", "distinct", "dist",    "and",    "or", "inf"};
  for (const char* k : kw)
    if (s == k) return true;
  return false;
}

const char* const kInfix[] = {"==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "++"};

bool is_infix_symbol(std::string_view s) {
  for (const char* k : kInfix)
    if (s == k) return true;
  return false;
}

std::optional<std::int64_t> parse_int(std::string_view digits, bool negative) {
  std::uint64_t mag = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), mag);
  if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
  if (!negative) {
    if (mag > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
    return static_cast<std::int64_t>(mag);
  }
  if (mag > static_cast<std::uint64_t>(INT64_MAX) + 1) return std::nullopt;
  return static_cast<std::int64_t>(0 - mag);
}

class Parser {
 public:
  Parser(std::string_view src, bool strict) : toks_(lex(src)), strict_(strict) {}

  Program program() {
    Program prog;
    for (;;) {
      if (peek_ident("input")) {
        next();
        InputDecl d;
        d.name = expect_any_name("input name");
        if (is_keyword(d.name) || d.name == "True" || d.name == "False") error("reserved name used as input");
        expect_sym(":");
        d.type = type();
        if (accept_sym("=")) d.path = expect(Tok::String, "input file path").text;
        expect_sym(";");
        scope_.push_back(d.name);
        prog.inputs.push_back(std::move(d));
      } else if (peek_ident("assume")) {
        next();
        if (expect(Tok::Ident, "'compatible'").text != "compatible") error("expected 'compatible'");
        expect_sym("(");
        std::string agg = expect_any_name("aggregator name");
        expect_sym(",");
        std::string label = accept_sym("*") ? "*" : expect(Tok::Ident, "fixpoint label").text;
        expect_sym(")");
        expect_sym(";");
        prog.annotations.add(std::move(agg), std::move(label));
      } else {
        break;
      }
    }
    prog.body = expr();
    expect_end();
    return prog;
  }

  ExprPtr whole_expr() {
    auto e = expr();
    expect_end();
    return e;
  }
  TypeExpr whole_type() {
    auto t = type();
    expect_end();
    return t;
  }
  Value whole_value() {
    auto v = value();
    expect_end();
    return v;
  }
  Pattern whole_pattern() {
    auto p = pattern();
    expect_end();
    return p;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool strict_;
  std::vector<std::string> scope_;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void error(const std::string& msg) const {
    const Token& t = peek();
    std::string near = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw Error(ErrorKind::Syntax, "parse",
                std::to_string(t.line) + ":" + std::to_string(t.col) + ": " + msg + " near " + near);
  }

  bool peek_sym(std::string_view s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
  bool peek_ident(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == s;
  }
  bool accept_sym(std::string_view s) {
    if (!peek_sym(s)) return false;
    next();
    return true;
  }
  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) error("expected '" + std::string(s) + "'");
  }
  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) error(std::string("expected ") + what);
    return next();
  }
  std::string expect_any_name(const char* what) {
    if (peek().kind != Tok::Ident && peek().kind != Tok::Upper) error(std::string("expected ") + what);
    return next().text;
  }
  void expect_end() {
    if (peek().kind != Tok::End) error("unexpected trailing input");
  }

  bool in_scope(const std::string& n) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (*it == n) return true;
    return false;
  }

  // ---- expressions ----

  ExprPtr expr() {
    if (accept_sym("\\")) return lambda_cases();
    if (peek_ident("let")) {
      next();
      std::string name = expect(Tok::Ident, "let-bound name").text;
      if (is_keyword(name)) error("keyword cannot be bound");
      expect_sym("=");
      ExprPtr bound = expr();
      if (!peek_ident("in")) error("expected 'in'");
      next();
      scope_.push_back(name);
      ExprPtr body = expr();
      scope_.pop_back();
      return ex::let(std::move(name), std::move(bound), std::move(body));
    }
    if (peek_ident("if")) {
      next();
      ExprPtr c = expr();
      if (!peek_ident("then")) error("expected 'then'");
      next();
      ExprPtr a = expr();
      if (!peek_ident("else")) error("expected 'else'");
      next();
      ExprPtr b = expr();
      return ex::if_then_else(std::move(c), std::move(a), std::move(b));
    }
    return or_expr();
  }

  ExprPtr lambda_cases() {
    std::vector<LambdaCase> cases;
    do {
      Pattern p = pattern();
      expect_sym("->");
      const auto vars = p.variables();
      scope_.insert(scope_.end(), vars.begin(), vars.end());
      ExprPtr body = expr();
      scope_.resize(scope_.size() - vars.size());
      cases.push_back(LambdaCase{std::move(p), std::move(body)});
    } while (accept_sym("|"));
    return ex::lambda(std::move(cases));
  }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (peek_ident("or")) {
      next();
      e = ex::call("or", e, and_expr());
    }
    return e;
  }
  ExprPtr and_expr() {
    ExprPtr e = cmp_expr();
    while (peek_ident("and")) {
      next();
      e = ex::call("and", e, cmp_expr());
    }
    return e;
  }
  ExprPtr cmp_expr() {
    ExprPtr e = add_expr();
    for (const char* op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (peek_sym(op)) {
        next();
        return ex::call(op, e, add_expr());
      }
    }
    return e;
  }
  ExprPtr add_expr() {
    ExprPtr e = mul_expr();
    for (;;) {
      if (peek_sym("+") || peek_sym("-") || peek_sym("++")) {
        const std::string op = next().text;
        e = ex::call(op, e, mul_expr());
      } else {
        return e;
      }
    }
  }
  ExprPtr mul_expr() {
    ExprPtr e = app_expr();
    while (peek_sym("*") || peek_sym("/")) {
      const std::string op = next().text;
      e = ex::call(op, e, app_expr());
    }
    return e;
  }
  ExprPtr app_expr() {
    ExprPtr e = atom();
    while (starts_atom()) e = ex::apply(e, atom());
    return e;
  }

  bool starts_atom() const {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Int:
      case Tok::Float:
      case Tok::String:
      case Tok::Upper: return true;
      case Tok::Ident:
        return !(t.text == "and" || t.text == "or" || t.text == "in" || t.text == "then" || t.text == "else" ||
                 t.text == "let" || t.text == "if");
      case Tok::Sym: return t.text == "(" || t.text == "{";
      case Tok::End: return false;
    }
    return false;
  }

  ExprPtr atom() {
    const Token& t = peek();
    if (t.kind == Tok::Sym && t.text == "-" && (peek(1).kind == Tok::Int || peek(1).kind == Tok::Float)) {
      next();
      return ex::constant(number(next(), true));
    }
    switch (t.kind) {
      case Tok::Int:
      case Tok::Float: return ex::constant(number(next(), false));
      case Tok::String: return ex::string(next().text);
      case Tok::Upper: {
        // Bare capitalised names other than True/False are variables; nullary
        // constructors are written C().
        if (!peek_sym("(", 1) && t.text != kTrueCtor && t.text != kFalseCtor) return named_atom();
        std::string name = next().text;
        std::vector<ExprPtr> args;
        if (accept_sym("(")) args = expr_list(")");
        return ex::construct(std::move(name), std::move(args));
      }
      case Tok::Ident: return named_atom();
      case Tok::Sym:
        if (t.text == "(") return paren();
        if (t.text == "{") return bag_literal();
        break;
      case Tok::End: break;
    }
    error("expected an expression");
  }

  Value number(const Token& t, bool negative) {
    if (t.kind == Tok::Int) {
      auto v = parse_int(t.text, negative);
      if (!v) error("integer literal out of range");
      return Value::integer(*v);
    }
    double d = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), d);
    if (ec != std::errc()) error("malformed float literal");
    return Value::floating(negative ? -d : d);
  }

  std::vector<ExprPtr> expr_list(std::string_view close) {
    std::vector<ExprPtr> out;
    if (accept_sym(close)) return out;
    do out.push_back(expr());
    while (accept_sym(","));
    expect_sym(close);
    return out;
  }

  ExprPtr paren() {
    expect_sym("(");
    // Operator sections: (+), (==), (and), ...
    if (peek(1).kind == Tok::Sym && peek(1).text == ")") {
      const Token& t = peek();
      if ((t.kind == Tok::Sym && is_infix_symbol(t.text)) ||
          (t.kind == Tok::Ident && (t.text == "and" || t.text == "or"))) {
        std::string op = next().text;
        next();
        return ex::builtin(op);
      }
    }
    auto items = expr_list(")");
    if (items.empty()) error("empty parentheses");
    if (items.size() == 1) return items.front();
    return ex::tuple(std::move(items));
  }

  static std::optional<Value> fold_constant(const ExprPtr& e) {
    if (const auto* c = e->as<node::Const>()) {
      if (c->value.is_function()) return std::nullopt;
      return c->value;
    }
    if (const auto* k = e->as<node::Construct>()) {
      std::vector<Value> args;
      for (const auto& a : k->args) {
        auto v = fold_constant(a);
        if (!v) return std::nullopt;
        args.push_back(*v);
      }
      return Value::constructed(k->name, std::move(args));
    }
    if (const auto* s = e->as<node::Singleton>()) {
      auto v = fold_constant(s->elem);
      if (!v) return std::nullopt;
      return Value::bag(Bag::singleton(*v));
    }
    return std::nullopt;
  }

  ExprPtr bag_literal() {
    expect_sym("{");
    auto items = expr_list("}");
    if (items.empty()) return ex::empty_bag();
    if (items.size() == 1) return ex::singleton(items.front());
    std::vector<Value> values;
    for (const auto& it : items) {
      auto v = fold_constant(it);
      if (!v) break;
      values.push_back(*v);
    }
    if (values.size() == items.size()) return ex::constant(Value::bag(Bag::from_values(std::move(values))));
    ExprPtr e = ex::singleton(items.front());
    for (std::size_t i = 1; i < items.size(); ++i) e = ex::call("++", e, ex::singleton(items[i]));
    return e;
  }

  ExprPtr named_atom() {
    const std::string name = next().text;
    if (in_scope(name)) return ex::var(name);
    if (name == "inf") return ex::integer(INT64_MAX);
    if (name == "flatmap") {
      auto a = args(2);
      return ex::flatmap(a[0], a[1]);
    }
    if (name == "reduce") {
      auto a = args(3);
      return ex::reduce(a[0], a[1], a[2]);
    }
    if (name == "reduceByKey") {
      auto a = args(2);
      return ex::reduce_by_key(a[0], a[1]);
    }
    if (name == "join") {
      auto a = args(2);
      return ex::join(a[0], a[1]);
    }
    if (name == "cogroup") {
      auto a = args(2);
      return ex::cogroup(a[0], a[1]);
    }
    if (name == "groupBy") {
      auto a = args(1);
      auto pair_up = ex::lambda(Pattern::tuple({Pattern::var("k"), Pattern::var("v")}),
                                ex::singleton(ex::tuple({ex::var("k"), ex::singleton(ex::var("v"))})));
      return ex::reduce_by_key(ex::builtin("++"), ex::flatmap(pair_up, a[0]));
    }
    if (name == "distinct") return ex::aggregate(AggregatorSpec::distinct(), args(1)[0]);
    if (name == "dist") return ex::dist(args(1)[0]);
    if (name == "aggregate") {
      expect_sym("[");
      AggregatorSpec d = aggregator();
      expect_sym("]");
      return ex::aggregate(std::move(d), args(1)[0]);
    }
    if (name == "fix") {
      AggregatorSpec d = AggregatorSpec::distinct();
      std::string label;
      if (accept_sym("[")) {
        if (!peek_sym(";")) d = aggregator();
        if (accept_sym(";")) label = expect(Tok::Ident, "fixpoint label").text;
        expect_sym("]");
      }
      auto a = args(2);
      return ex::fixpoint(std::move(d), a[0], a[1], std::move(label));
    }
    if (is_keyword(name)) error("unexpected keyword '" + name + "'");
    if (find_builtin(name)) return ex::builtin(name);
    if (strict_) {
      --pos_;
      error("unknown identifier '" + name + "'");
    }
    return ex::var(name);
  }

  std::vector<ExprPtr> args(std::size_t n) {
    expect_sym("(");
    auto a = expr_list(")");
    if (a.size() != n) error("expected " + std::to_string(n) + " arguments");
    return a;
  }

  AggregatorSpec aggregator() {
    const std::string name = expect(Tok::Ident, "aggregator").text;
    if (name == "distinct") return AggregatorSpec::distinct();
    if (name == "identity") return AggregatorSpec::identity();
    if (name == "minByKey") return AggregatorSpec::by_key("min");
    if (name == "maxByKey") return AggregatorSpec::by_key("max");
    if (name == "filter") {
      expect_sym("(");
      Pattern p = pattern();
      expect_sym(",");
      std::string var = expect(Tok::Ident, "filter variable").text;
      if (!p.binds(var)) error("filter variable does not occur in its pattern");
      expect_sym(",");
      const auto vars = p.variables();
      scope_.insert(scope_.end(), vars.begin(), vars.end());
      ExprPtr pred = expr();
      scope_.resize(scope_.size() - vars.size());
      expect_sym(")");
      return AggregatorSpec::filter(std::move(p), std::move(var), std::move(pred));
    }
    --pos_;
    error("unknown aggregator '" + name + "'");
  }

  // ---- patterns ----

  Pattern pattern() {
    const Token& t = peek();
    const bool bare_upper = t.kind == Tok::Upper && !peek_sym("(", 1) && t.text != kTrueCtor && t.text != kFalseCtor;
    if (t.kind == Tok::Ident || bare_upper) {
      if (is_keyword(t.text)) error("keyword used as a pattern variable");
      return Pattern::var(next().text);
    }
    if (t.kind == Tok::Upper) {
      std::string name = next().text;
      std::vector<Pattern> subs;
      if (accept_sym("(")) subs = pattern_list();
      return Pattern::ctor(std::move(name), std::move(subs));
    }
    if (accept_sym("(")) {
      auto subs = pattern_list();
      if (subs.empty()) error("empty pattern");
      if (subs.size() == 1) return subs.front();
      return Pattern::tuple(std::move(subs));
    }
    error("expected a pattern");
  }

  std::vector<Pattern> pattern_list() {
    std::vector<Pattern> out;
    if (accept_sym(")")) return out;
    do out.push_back(pattern());
    while (accept_sym(","));
    expect_sym(")");
    return out;
  }

  // ---- types ----

  TypeExpr type() {
    TypeExpr t = sum_type();
    if (accept_sym("->")) return TypeExpr::func(t, type());
    return t;
  }

  TypeExpr sum_type() {
    TypeExpr t = type_atom();
    while (accept_sym("|")) {
      TypeExpr u = type_atom();
      if (t.kind() != TypeKind::Sum || u.kind() != TypeKind::Sum) error("only constructor types can form a sum");
      std::vector<SumCase> cases = t.cases();
      for (const auto& c : u.cases()) {
        if (t.find_case(c.name)) error("constructor " + c.name + " appears twice in a sum type");
        cases.push_back(c);
      }
      t = TypeExpr::sum(std::move(cases));
    }
    return t;
  }

  TypeExpr type_atom() {
    const Token& t = peek();
    if (t.kind == Tok::Ident && t.text.size() > 2 && t.text.rfind("'a", 0) == 0) {
      auto id = parse_int(std::string_view(t.text).substr(2), false);
      if (!id) error("malformed rigid type variable");
      next();
      return TypeExpr::rigid(static_cast<int>(*id));
    }
    if (t.kind == Tok::Upper) {
      const std::string name = next().text;
      if (name == "Int" || name == "Float" || name == "String") return TypeExpr::basic(name);
      if (name == "Bool") return TypeExpr::boolean();
      if (name == "Nothing") return TypeExpr::bottom();
      if (name == "Bag_l" || name == "Bag_d") {
        expect_sym("<");
        TypeExpr e = type();
        expect_sym(">");
        if (contains_dist_bag(e)) error("distributed bags cannot be nested");
        return TypeExpr::bag(name == "Bag_l" ? BagKind::Local : BagKind::Distributed, e);
      }
      std::vector<TypeExpr> params;
      if (accept_sym("(")) {
        if (!accept_sym(")")) {
          do params.push_back(type());
          while (accept_sym(","));
          expect_sym(")");
        }
      }
      return TypeExpr::constructed(name, std::move(params));
    }
    if (accept_sym("(")) {
      std::vector<TypeExpr> items;
      do items.push_back(type());
      while (accept_sym(","));
      expect_sym(")");
      if (items.size() == 1) return items.front();
      return TypeExpr::tuple(std::move(items));
    }
    error("expected a type");
  }

  // ---- values ----

  Value value() {
    const Token& t = peek();
    if (t.kind == Tok::Sym && t.text == "-") {
      next();
      const Token& n = next();
      if (n.kind != Tok::Int && n.kind != Tok::Float) error("expected a number");
      return number(n, true);
    }
    switch (t.kind) {
      case Tok::Int:
      case Tok::Float: return number(next(), false);
      case Tok::String: return Value::string(next().text);
      case Tok::Ident:
        if (t.text == "inf") {
          next();
          return Value::integer(INT64_MAX);
        }
        break;
      case Tok::Upper: {
        std::string name = next().text;
        std::vector<Value> args;
        if (accept_sym("(")) args = value_list(")");
        return Value::constructed(std::move(name), std::move(args));
      }
      case Tok::Sym:
        if (accept_sym("(")) {
          auto items = value_list(")");
          if (items.empty()) error("empty parentheses");
          if (items.size() == 1) return items.front();
          return Value::tuple(std::move(items));
        }
        if (accept_sym("{")) return Value::bag(Bag::from_values(value_list("}")));
        break;
      case Tok::End: break;
    }
    error("expected a value");
  }

  std::vector<Value> value_list(std::string_view close) {
    std::vector<Value> out;
    if (accept_sym(close)) return out;
    do out.push_back(value());
    while (accept_sym(","));
    expect_sym(close);
    return out;
  }
};

// ---- printing ----

void print(std::string& out, const Expr& e);

void print_value_expr(std::string& out, const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int:
      if (v.as_int() == INT64_MAX) out += "inf";
      else if (v.as_int() < 0) out += "(" + to_string(v) + ")";
      else out += to_string(v);
      return;
    case ValueKind::Float:
      if (v.as_float() < 0) out += "(" + to_string(v) + ")";
      else out += to_string(v);
      return;
    case ValueKind::Builtin:
      if (v.builtin_applied().empty()) {
        const Builtin& b = v.builtin_def();
        if (b.infix) out += "(" + b.name + ")";
        else out += b.name;
        return;
      }
      break;
    default: break;
  }
  out += to_string(v);
}

void print_list(std::string& out, const std::vector<ExprPtr>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    print(out, *items[i]);
  }
}

const Builtin* infix_head(const Expr& e, ExprPtr& lhs, ExprPtr& rhs) {
  const auto* outer = e.as<node::Apply>();
  if (!outer) return nullptr;
  const auto* inner = outer->fn->as<node::Apply>();
  if (!inner) return nullptr;
  const auto* c = inner->fn->as<node::Const>();
  if (!c || c->value.kind() != ValueKind::Builtin || !c->value.builtin_applied().empty()) return nullptr;
  const Builtin& b = c->value.builtin_def();
  if (!b.infix || b.arity != 2) return nullptr;
  lhs = inner->arg;
  rhs = outer->arg;
  return &b;
}

void print(std::string& out, const Expr& e) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, node::Const>) {
          print_value_expr(out, x.value);
        } else if constexpr (std::is_same_v<T, node::Var>) {
          out += x.name;
        } else if constexpr (std::is_same_v<T, node::Singleton>) {
          out += '{';
          print(out, *x.elem);
          out += '}';
        } else if constexpr (std::is_same_v<T, node::Lambda>) {
          out += "(\\";
          for (std::size_t i = 0; i < x.cases.size(); ++i) {
            if (i) out += " | ";
            out += print_pattern(x.cases[i].pattern) + " -> ";
            print(out, *x.cases[i].body);
          }
          out += ')';
        } else if constexpr (std::is_same_v<T, node::Apply>) {
          ExprPtr l, r;
          if (auto parts = as_if(e)) {
            out += "(if ";
            print(out, *parts->cond);
            out += " then ";
            print(out, *parts->then_branch);
            out += " else ";
            print(out, *parts->else_branch);
            out += ')';
          } else if (const Builtin* b = infix_head(e, l, r)) {
            out += '(';
            print(out, *l);
            out += " " + b->name + " ";
            print(out, *r);
            out += ')';
          } else {
            out += '(';
            print(out, *x.fn);
            out += ' ';
            print(out, *x.arg);
            out += ')';
          }
        } else if constexpr (std::is_same_v<T, node::Construct>) {
          if (x.name == kTupleCtor && x.args.size() >= 2) {
            out += '(';
            print_list(out, x.args);
            out += ')';
          } else {
            out += x.name;
            if (!x.args.empty() || (x.name != kTrueCtor && x.name != kFalseCtor)) {
              out += '(';
              print_list(out, x.args);
              out += ')';
            }
          }
        } else if constexpr (std::is_same_v<T, node::Flatmap>) {
          out += "flatmap(";
          print_list(out, {x.fn, x.src});
          out += ')';
        } else if constexpr (std::is_same_v<T, node::Reduce>) {
          out += "reduce(";
          print_list(out, {x.op, x.zero, x.src});
          out += ')';
        } else if constexpr (std::is_same_v<T, node::ReduceByKey>) {
          out += "reduceByKey(";
          print_list(out, {x.op, x.src});
          out += ')';
        } else if constexpr (std::is_same_v<T, node::Cogroup>) {
          out += "cogroup(";
          print_list(out, {x.left, x.right});
          out += ')';
        } else if constexpr (std::is_same_v<T, node::Join>) {
          out += "join(";
          print_list(out, {x.left, x.right});
          out += ')';
        } else if constexpr (std::is_same_v<T, node::Fixpoint>) {
          out += "fix[" + print_aggregator(x.delta);
          if (!x.label.empty()) out += "; " + x.label;
          out += "](";
          print_list(out, {x.seed, x.phi});
          out += ')';
        } else if constexpr (std::is_same_v<T, node::Let>) {
          out += "(let " + x.name + " = ";
          print(out, *x.bound);
          out += " in ";
          print(out, *x.body);
          out += ')';
        } else if constexpr (std::is_same_v<T, node::Aggregate>) {
          out += "aggregate[" + print_aggregator(x.delta) + "](";
          print(out, *x.src);
          out += ')';
        } else {
          out += "dist(";
          print(out, *x.src);
          out += ')';
        }
      },
      e.node());
}

}  // namespace

TypeEnv Program::type_env() const {
  TypeEnv env;
  for (const auto& in : inputs) env.bind(in.name, in.type);
  return env;
}

Program parse_program(std::string_view text) { return Parser(text, true).program(); }
ExprPtr parse_expr(std::string_view text) { return Parser(text, false).whole_expr(); }
TypeExpr parse_type(std::string_view text) { return Parser(text, false).whole_type(); }
Value parse_value(std::string_view text) { return Parser(text, false).whole_value(); }
Pattern parse_pattern(std::string_view text) { return Parser(text, false).whole_pattern(); }

std::string print_expr(const Expr& e) {
  std::string out;
  print(out, e);
  return out;
}

std::string print_pattern(const Pattern& p) {
  if (p.is_var()) return p.name();
  std::string out;
  const bool tuple = p.name() == kTupleCtor && p.subs().size() >= 2;
  if (!tuple) out += p.name();
  if (tuple || !p.subs().empty() || (p.name() != kTrueCtor && p.name() != kFalseCtor)) {
    out += '(';
    for (std::size_t i = 0; i < p.subs().size(); ++i) {
      if (i) out += ", ";
      out += print_pattern(p.subs()[i]);
    }
    out += ')';
  }
  return out;
}

std::string print_aggregator(const AggregatorSpec& d) {
  if (d.kind != AggregatorKind::Filter) return d.name();
  return "filter(" + print_pattern(*d.pattern) + ", " + d.var + ", " + print_expr(*d.predicate) + ")";
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& in : p.inputs) {
    out += "input " + in.name + " : " + to_string(in.type);
    if (!in.path.empty()) out += " = " + to_string(Value::string(in.path));
    out += ";\n";
  }
  for (const auto& [agg, label] : p.annotations.compatible) out += "assume compatible(" + agg + ", " + label + ");\n";
  return out + print_expr(*p.body) + "\n";
}

}  // namespace mumonoids
