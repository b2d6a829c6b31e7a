#include "matlang/textio.hpp"

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "matlang/typecheck.hpp"
#include "matlang/rewrite.hpp"

namespace matlang {

namespace {

bool is_reserved(std::string_view w) {
  static const std::set<std::string_view> words = {
      "matrix", "over", "in",   "let",  "for",  "ones", "diag",
      "pickany", "apply", "cast", "cond", "enc", "dec",  "true",
      "false",  "inf",  "x"};
  return words.count(w) > 0 || ring_from_name(w).has_value();
}

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

ScalarValue parse_value_token(Ring r, std::string_view token) {
  auto bad = [&](const std::string& why) -> ScalarValue {
    throw std::invalid_argument("bad " + std::string(ring_name(r)) +
                                " value \"" + std::string(token) + "\": " +
                                why);
  };
  if (r == Ring::Bool) {
    if (token == "true") return ScalarValue::of_bool(true);
    if (token == "false") return ScalarValue::of_bool(false);
    return bad("expected true or false");
  }
  if (token == "inf") {
    if (r == Ring::Real || is_min_plus(r)) return ScalarValue::pos_inf(r);
    return bad("inf is outside this carrier");
  }
  if (token == "-inf") {
    if (r == Ring::Real || is_max_plus(r)) return ScalarValue::neg_inf(r);
    return bad("-inf is outside this carrier");
  }
  if (token.empty()) return bad("empty token");
  if (is_int_domain(r)) {
    std::int64_t v = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec == std::errc::result_out_of_range) return bad("out of range");
    if (ec != std::errc() || p != last) return bad("expected an integer");
    return ScalarValue::of_int(r, v);
  }
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (*first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last) return bad("expected a number");
  return ScalarValue::of_real(r, v);
}

namespace {

// ---------------------------------------------------------------- lexing

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    int tl = line, tc = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (digit(c)) {
      std::size_t j = i;
      while (j < text.size() && digit(text[j])) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && digit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && digit(text[k])) {
          j = k;
          while (j < text.size() && digit(text[j])) ++j;
        }
      }
      out.push_back({Tok::Number, std::string(text.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == ":=" || two == "->" || two == "==") {
      out.push_back({Tok::Sym, std::string(two), tl, tc});
      advance(2);
      continue;
    }
    if (std::string_view("()[]{},;*+-/'=:").find(c) != std::string_view::npos) {
      out.push_back({Tok::Sym, std::string(1, c), tl, tc});
      advance(1);
      continue;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", tl,
                     tc);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

// --------------------------------------------------------------- parsing

struct Parser {
  std::vector<Token> toks;
  std::size_t pos = 0;
  std::map<const ExprNode*, char> sugar;  // parsed +/- pending ring fixup

  const Token& peek() const { return toks[pos]; }
  const Token& peek2() const {
    return toks[pos + 1 < toks.size() ? pos + 1 : toks.size() - 1];
  }
  Token take() { return toks[pos++]; }

  [[noreturn]] void fail(const std::string& why) const {
    const Token& t = peek();
    std::string at = t.kind == Tok::End ? "end of input" : "\"" + t.text + "\"";
    throw ParseError(why + " (found " + at + ")", t.line, t.col);
  }

  bool at_sym(std::string_view s) const {
    return peek().kind == Tok::Sym && peek().text == s;
  }
  bool at_word(std::string_view w) const {
    return peek().kind == Tok::Ident && peek().text == w;
  }
  void expect_sym(std::string_view s) {
    if (!at_sym(s)) fail("expected \"" + std::string(s) + "\"");
    ++pos;
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("expected \"" + std::string(w) + "\"");
    ++pos;
  }
  std::string expect_name(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    if (is_reserved(peek().text))
      fail("\"" + peek().text + "\" is reserved and cannot name a " + what);
    return take().text;
  }
  Ring expect_ring() {
    if (peek().kind == Tok::Ident)
      if (auto r = ring_from_name(peek().text)) {
        ++pos;
        return *r;
      }
    fail("expected a ring name");
  }

  // Builder invariant failures (arity, duplicate names) become parse errors
  // at the construct's opening token.
  template <typename F>
  auto built(int line, int col, F&& f) {
    try {
      return f();
    } catch (const std::invalid_argument& ex) {
      throw ParseError(ex.what(), line, col);
    }
  }

  Schema parse_decls() {
    Schema schema;
    while (at_word("matrix")) {
      const Token& open = peek();
      ++pos;
      std::string name = expect_name("matrix");
      if (schema.count(name))
        throw ParseError("duplicate declaration of " + name, open.line,
                         open.col);
      expect_sym(":");
      SizeTerm rows = parse_size();
      expect_word("x");
      SizeTerm cols = parse_size();
      expect_word("over");
      Ring ring = expect_ring();
      expect_sym(";");
      schema.emplace(std::move(name), MatrixType{rows, cols, ring});
    }
    return schema;
  }

  SizeTerm parse_size() {
    if (peek().kind == Tok::Number) {
      if (peek().text != "1") fail("matrix sizes are symbolic names or 1");
      ++pos;
      return SizeTerm::one();
    }
    return SizeTerm::sym(expect_name("size"));
  }

  Expr parse_expr() {
    Expr e = parse_mul();
    while (at_sym("+") || at_sym("-")) {
      char op = take().text[0];
      Expr rhs = parse_mul();
      // Placeholder ring; resolve_sugar rewrites the function afterwards.
      Expr node = apply(make_add_fn(Ring::Bool), {std::move(e), std::move(rhs)});
      sugar.emplace(node.get(), op);
      e = std::move(node);
    }
    return e;
  }

  Expr parse_mul() {
    Expr e = parse_postfix();
    while (at_sym("*")) {
      ++pos;
      e = matmul(std::move(e), parse_postfix());
    }
    return e;
  }

  Expr parse_postfix() {
    Expr e = parse_primary();
    while (at_sym("'")) {
      ++pos;
      e = transpose(std::move(e));
    }
    return e;
  }

  std::vector<Expr> parse_arg_list() {
    expect_sym("(");
    std::vector<Expr> args;
    args.push_back(parse_expr());
    while (at_sym(",")) {
      ++pos;
      args.push_back(parse_expr());
    }
    expect_sym(")");
    return args;
  }

  Expr parse_primary() {
    const Token t = peek();
    if (at_sym("(")) {
      ++pos;
      Expr e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (at_word("ones") || at_word("diag") || at_word("pickany")) {
      std::string head = take().text;
      expect_sym("(");
      Expr e = parse_expr();
      expect_sym(")");
      if (head == "ones") return ones(std::move(e));
      if (head == "diag") return diag(std::move(e));
      return pickany(std::move(e));
    }
    if (at_word("apply")) {
      ++pos;
      expect_sym("[");
      PointwiseFn fn = parse_fn(t.line, t.col);
      expect_sym("]");
      std::vector<Expr> args = parse_arg_list();
      return built(t.line, t.col,
                   [&] { return apply(fn, std::move(args)); });
    }
    if (at_word("let")) {
      ++pos;
      std::string name = expect_name("binding");
      expect_sym("=");
      Expr bound = parse_expr();
      expect_word("in");
      Expr body = parse_expr();
      return let_in(std::move(name), std::move(bound), std::move(body));
    }
    if (at_word("for")) return parse_loop();
    if (peek().kind == Tok::Ident && !is_reserved(peek().text))
      return var(take().text);
    fail("expected an expression");
  }

  Expr parse_loop() {
    const Token t = take();  // "for"
    std::optional<std::string> v;
    if (at_sym("[")) {
      ++pos;
      v = expect_name("loop vector");
      expect_sym("]");
    }
    expect_sym("{");
    std::vector<Binding> bindings;
    while (true) {
      std::string name = expect_name("binding");
      expect_sym(":=");
      bindings.push_back({std::move(name), parse_expr()});
      if (at_sym(";")) {
        ++pos;
        if (at_sym("}")) break;
        continue;
      }
      break;
    }
    expect_sym("}");
    std::vector<Expr> args = parse_arg_list();
    return built(t.line, t.col, [&]() -> Expr {
      if (v) return for_canonical(*v, std::move(bindings), std::move(args));
      if (args.size() < 2)
        throw std::invalid_argument(
            "a counted loop takes a driver and one init per binding");
      Expr driver = std::move(args.front());
      args.erase(args.begin());
      return for_counted(std::move(driver), std::move(bindings),
                         std::move(args));
    });
  }

  PointwiseFn parse_fn(int line, int col) {
    expect_sym("(");
    std::vector<std::pair<std::string, Ring>> params;
    while (true) {
      std::string name = expect_name("parameter");
      expect_sym(":");
      params.emplace_back(std::move(name), expect_ring());
      if (at_sym(",")) {
        ++pos;
        continue;
      }
      break;
    }
    expect_sym(")");
    expect_sym("->");
    ScalarPtr body = parse_sexpr();
    return built(line, col,
                 [&] { return make_fn(std::move(params), std::move(body)); });
  }

  ScalarPtr parse_sexpr() {
    ScalarPtr e = parse_scalar_add();
    while (at_sym("==")) {
      ++pos;
      e = sc_eq(std::move(e), parse_scalar_add());
    }
    return e;
  }

  ScalarPtr parse_scalar_add() {
    ScalarPtr e = parse_scalar_mul();
    while (at_sym("+") || at_sym("-")) {
      bool add = take().text == "+";
      ScalarPtr rhs = parse_scalar_mul();
      e = add ? sc_add(std::move(e), std::move(rhs))
              : sc_sub(std::move(e), std::move(rhs));
    }
    return e;
  }

  ScalarPtr parse_scalar_mul() {
    ScalarPtr e = parse_scalar_atom();
    while (at_sym("*") || at_sym("/")) {
      bool mul = take().text == "*";
      ScalarPtr rhs = parse_scalar_atom();
      e = mul ? sc_mul(std::move(e), std::move(rhs))
              : sc_div(std::move(e), std::move(rhs));
    }
    return e;
  }

  ScalarPtr parse_scalar_atom() {
    if (at_sym("(")) {
      ++pos;
      ScalarPtr e = parse_sexpr();
      expect_sym(")");
      return e;
    }
    if (at_word("cast") || at_word("enc") || at_word("dec")) {
      std::string head = take().text;
      expect_sym("(");
      Ring r = expect_ring();
      expect_sym(",");
      ScalarPtr a = parse_sexpr();
      expect_sym(")");
      if (head == "cast") return sc_cast(r, std::move(a));
      if (head == "enc") return sc_enc(r, std::move(a));
      return sc_dec(r, std::move(a));
    }
    if (at_word("cond")) {
      ++pos;
      expect_sym("(");
      ScalarPtr w = parse_sexpr();
      expect_sym(",");
      ScalarPtr x = parse_sexpr();
      expect_sym(",");
      ScalarPtr y = parse_sexpr();
      expect_sym(",");
      ScalarPtr z = parse_sexpr();
      expect_sym(")");
      return sc_cond(std::move(w), std::move(x), std::move(y), std::move(z));
    }
    if (peek().kind == Tok::Ident) {
      if (auto r = ring_from_name(peek().text)) {
        const Token t = take();
        expect_sym("(");
        std::string tok;
        if (at_sym("-")) {
          ++pos;
          tok = "-";
        }
        if (peek().kind == Tok::Number || at_word("inf") || at_word("true") ||
            at_word("false")) {
          tok += take().text;
        } else {
          fail("expected a value token");
        }
        expect_sym(")");
        try {
          return sc_lit(parse_value_token(*r, tok));
        } catch (const std::invalid_argument& ex) {
          throw ParseError(ex.what(), t.line, t.col);
        }
      }
      if (!is_reserved(peek().text)) return sc_param(take().text);
    }
    fail("expected a scalar expression");
  }
};

// ------------------------------------------------ sugar ring resolution
//
// "+"/"-" between matrices abbreviate apply of the ring's combining
// functions; the ring comes from the left operand, computed by a
// ring-only shadow of the type checker (sizes are ignored, failures fall
// back to bool and surface later as ordinary type errors).

struct SugarResolver {
  const Schema& schema;
  const std::map<const ExprNode*, char>& sugar;
  std::vector<std::pair<std::string, Ring>> scope;

  std::optional<Ring> lookup(const std::string& name) const {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) return it->second;
    auto it = schema.find(name);
    if (it != schema.end()) return it->second.ring;
    return std::nullopt;
  }

  Ring scope_ring() const {
    std::set<Ring> rings;
    for (const auto& [n, t] : schema) {
      (void)n;
      rings.insert(t.ring);
    }
    for (const auto& [n, r] : scope) {
      (void)n;
      rings.insert(r);
    }
    return rings.size() == 1 ? *rings.begin() : Ring::Bool;
  }

  std::pair<Ring, Expr> walk(const Expr& e) {
    switch (e->op) {
      case ExprOp::Var:
        return {lookup(e->name).value_or(Ring::Bool), e};
      case ExprOp::Transpose: {
        auto [r, c] = walk(e->args[0]);
        return {r, c == e->args[0] ? e : transpose(std::move(c))};
      }
      case ExprOp::Ones: {
        auto [r, c] = walk(e->args[0]);
        return {r, c == e->args[0] ? e : ones(std::move(c))};
      }
      case ExprOp::Diag: {
        auto [r, c] = walk(e->args[0]);
        return {r, c == e->args[0] ? e : diag(std::move(c))};
      }
      case ExprOp::PickAny: {
        auto [r, c] = walk(e->args[0]);
        return {r, c == e->args[0] ? e : pickany(std::move(c))};
      }
      case ExprOp::MatMul: {
        auto [rl, l] = walk(e->args[0]);
        auto [rr, r] = walk(e->args[1]);
        (void)rr;
        if (l == e->args[0] && r == e->args[1]) return {rl, e};
        return {rl, matmul(std::move(l), std::move(r))};
      }
      case ExprOp::Apply: {
        std::vector<Expr> args;
        bool changed = false;
        Ring first = Ring::Bool;
        for (std::size_t i = 0; i < e->args.size(); ++i) {
          auto [r, c] = walk(e->args[i]);
          if (i == 0) first = r;
          changed = changed || c != e->args[i];
          args.push_back(std::move(c));
        }
        auto it = sugar.find(e.get());
        if (it != sugar.end()) {
          PointwiseFn fn =
              it->second == '+' ? make_add_fn(first) : make_sub_fn(first);
          return {first, apply(fn, std::move(args))};
        }
        Ring out = first;
        try {
          std::map<std::string, Ring> rings;
          for (const auto& [n, r] : e->fn->params) rings[n] = r;
          out = check_scalar(rings, e->fn->body);
        } catch (const TypeCheckError&) {
        }
        if (!changed) return {out, e};
        return {out, apply(*e->fn, std::move(args))};
      }
      case ExprOp::Let: {
        auto [rb, bound] = walk(e->args[0]);
        scope.emplace_back(e->name, rb);
        auto [r, body] = walk(e->args[1]);
        scope.pop_back();
        if (bound == e->args[0] && body == e->args[1]) return {r, e};
        return {r, let_in(e->name, std::move(bound), std::move(body))};
      }
      case ExprOp::ForCanonical:
      case ExprOp::ForCounted: {
        bool counted = e->op == ExprOp::ForCounted;
        bool changed = false;
        Expr driver;
        if (counted) {
          auto [rd, d] = walk(e->driver());
          (void)rd;
          changed = changed || d != e->driver();
          driver = std::move(d);
        }
        std::vector<Expr> inits;
        std::vector<Ring> init_rings;
        for (std::size_t i = 0; i < e->init_count(); ++i) {
          auto [r, c] = walk(e->init(i));
          init_rings.push_back(r);
          changed = changed || c != e->init(i);
          inits.push_back(std::move(c));
        }
        std::size_t mark = scope.size();
        for (std::size_t i = 0; i < e->bindings.size(); ++i)
          scope.emplace_back(e->bindings[i].name, init_rings[i]);
        if (!counted) {
          auto seed = lookup(e->name);
          scope.emplace_back(e->name, seed ? *seed : scope_ring());
        }
        std::vector<Binding> bindings;
        for (const auto& b : e->bindings) {
          auto [r, c] = walk(b.body);
          (void)r;
          changed = changed || c != b.body;
          bindings.push_back({b.name, std::move(c)});
        }
        scope.resize(mark);
        if (!changed) return {init_rings[0], e};
        if (counted)
          return {init_rings[0],
                  for_counted(std::move(driver), std::move(bindings),
                              std::move(inits))};
        return {init_rings[0],
                for_canonical(e->name, std::move(bindings), std::move(inits))};
      }
    }
    throw std::logic_error("unknown op");
  }
};

}  // namespace

ParsedProgram parse_program(std::string_view text) {
  Parser p;
  p.toks = lex(text);
  Schema schema = p.parse_decls();
  p.expect_word("in");
  Expr e = p.parse_expr();
  if (p.peek().kind != Tok::End) p.fail("expected end of input");
  if (!p.sugar.empty()) {
    SugarResolver r{schema, p.sugar, {}};
    e = r.walk(e).second;
  }
  auto d = smallest_dialect(e, schema);
  if (!d) {
    std::string why = "program fits no dialect";
    ValidationReport muse = validate_dialect(e, Dialect::MUSE_ML, schema);
    ValidationReport sifor = validate_dialect(e, Dialect::SIFOR_ML, schema);
    if (!muse.ok) why += "\nagainst muse: " + muse.str();
    if (!sifor.ok) why += "\nagainst sifor: " + sifor.str();
    throw ParseError(why, 1, 1);
  }
  return {std::move(schema), std::move(e), *d};
}

namespace {

void print_scalar(std::string& out, const ScalarPtr& s) {
  auto infix = [&](const char* op) {
    out += '(';
    print_scalar(out, s->args[0]);
    out += ' ';
    out += op;
    out += ' ';
    print_scalar(out, s->args[1]);
    out += ')';
  };
  auto call = [&](const char* head) {
    out += head;
    out += '(';
    out += ring_name(s->ring);
    out += ", ";
    print_scalar(out, s->args[0]);
    out += ')';
  };
  switch (s->op) {
    case ScalarOp::Param:
      out += s->param;
      return;
    case ScalarOp::Lit:
      out += ring_name(s->lit->ring());
      out += '(';
      out += s->lit->token();
      out += ')';
      return;
    case ScalarOp::Add:
      infix("+");
      return;
    case ScalarOp::Mul:
      infix("*");
      return;
    case ScalarOp::Sub:
      infix("-");
      return;
    case ScalarOp::Div:
      infix("/");
      return;
    case ScalarOp::Eq:
      infix("==");
      return;
    case ScalarOp::Cast:
      call("cast");
      return;
    case ScalarOp::Enc:
      call("enc");
      return;
    case ScalarOp::Dec:
      call("dec");
      return;
    case ScalarOp::Cond:
      out += "cond(";
      for (std::size_t i = 0; i < 4; ++i) {
        if (i) out += ", ";
        print_scalar(out, s->args[i]);
      }
      out += ')';
      return;
  }
}

void print_fn(std::string& out, const PointwiseFn& fn) {
  out += '(';
  for (std::size_t i = 0; i < fn.params.size(); ++i) {
    if (i) out += ", ";
    out += fn.params[i].first;
    out += ": ";
    out += ring_name(fn.params[i].second);
  }
  out += ") -> ";
  print_scalar(out, fn.body);
}

// Every composite form prints self-delimited (calls, or wrapped in
// parens), so a postfix quote never needs extra bracketing.
void print_rec(std::string& out, const Expr& e) {
  switch (e->op) {
    case ExprOp::Var:
      out += e->name;
      return;
    case ExprOp::Transpose:
      print_rec(out, e->args[0]);
      out += '\'';
      return;
    case ExprOp::Ones:
    case ExprOp::Diag:
    case ExprOp::PickAny:
      out += e->op == ExprOp::Ones ? "ones"
             : e->op == ExprOp::Diag ? "diag"
                                     : "pickany";
      out += '(';
      print_rec(out, e->args[0]);
      out += ')';
      return;
    case ExprOp::MatMul:
      out += '(';
      print_rec(out, e->args[0]);
      out += " * ";
      print_rec(out, e->args[1]);
      out += ')';
      return;
    case ExprOp::Apply: {
      if (e->args.size() == 2 && (is_add_fn(*e->fn) || is_sub_fn(*e->fn))) {
        out += '(';
        print_rec(out, e->args[0]);
        out += is_add_fn(*e->fn) ? " + " : " - ";
        print_rec(out, e->args[1]);
        out += ')';
        return;
      }
      out += "apply[";
      print_fn(out, *e->fn);
      out += "](";
      for (std::size_t i = 0; i < e->args.size(); ++i) {
        if (i) out += ", ";
        print_rec(out, e->args[i]);
      }
      out += ')';
      return;
    }
    case ExprOp::Let:
      out += "(let ";
      out += e->name;
      out += " = ";
      print_rec(out, e->args[0]);
      out += " in ";
      print_rec(out, e->args[1]);
      out += ')';
      return;
    case ExprOp::ForCanonical:
    case ExprOp::ForCounted: {
      out += "(for ";
      if (e->op == ExprOp::ForCanonical) {
        out += '[';
        out += e->name;
        out += "] ";
      }
      out += "{ ";
      for (std::size_t i = 0; i < e->bindings.size(); ++i) {
        if (i) out += "; ";
        out += e->bindings[i].name;
        out += " := ";
        print_rec(out, e->bindings[i].body);
      }
      out += " } (";
      bool first = true;
      if (e->op == ExprOp::ForCounted) {
        print_rec(out, e->driver());
        first = false;
      }
      for (std::size_t i = 0; i < e->init_count(); ++i) {
        if (!first) out += ", ";
        first = false;
        print_rec(out, e->init(i));
      }
      out += "))";
      return;
    }
  }
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  print_rec(out, e);
  return out;
}

std::string print_program(const Schema& schema, const Expr& e) {
  std::string out;
  for (const auto& [name, ty] : schema) {
    out += "matrix ";
    out += name;
    out += " : ";
    out += ty.rows.str();
    out += " x ";
    out += ty.cols.str();
    out += " over ";
    out += ring_name(ty.ring);
    out += ";\n";
  }
  out += "in ";
  print_rec(out, e);
  out += '\n';
  return out;
}

// ---------------------------------------------------------- matrix files

Matrix parse_matrix(std::string_view text) {
  std::optional<Matrix> m;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  int lineno = 0;
  std::size_t i = 0;
  while (i <= text.size()) {
    std::size_t end = text.find('\n', i);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(i, end - i);
    i = end + 1;
    ++lineno;
    if (auto cut = line.find('%'); cut != std::string_view::npos)
      line = line.substr(0, cut);
    std::vector<std::string_view> fields;
    std::size_t j = 0;
    while (j < line.size()) {
      while (j < line.size() && (line[j] == ' ' || line[j] == '\t' ||
                                 line[j] == '\r'))
        ++j;
      std::size_t k = j;
      while (k < line.size() && line[k] != ' ' && line[k] != '\t' &&
             line[k] != '\r')
        ++k;
      if (k > j) fields.push_back(line.substr(j, k - j));
      j = k;
    }
    if (fields.empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto bad = [&](const std::string& why) -> ParseError {
      return ParseError(why, lineno, 1);
    };
    auto field_size = [&](std::string_view f, const char* what) {
      std::size_t v = 0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size() || v == 0)
        throw bad("bad " + std::string(what) + " \"" + std::string(f) + "\"");
      return v;
    };
    if (!m) {
      if (fields.size() != 4 || fields[0] != "matrix")
        throw bad("expected header \"matrix ROWS COLS ring\"");
      std::size_t rows = field_size(fields[1], "row count");
      std::size_t cols = field_size(fields[2], "column count");
      auto ring = ring_from_name(fields[3]);
      if (!ring) throw bad("unknown ring \"" + std::string(fields[3]) + "\"");
      if (rows > kDefaultElementLimit / cols)
        throw bad("matrix exceeds the element limit");
      m.emplace(rows, cols, *ring);
      continue;
    }
    if (fields.size() != 3)
      throw bad("expected an entry \"row col value\"");
    std::size_t r = field_size(fields[0], "row index");
    std::size_t c = field_size(fields[1], "column index");
    if (r > m->rows() || c > m->cols())
      throw bad("entry (" + std::to_string(r) + "," + std::to_string(c) +
                ") is out of range");
    if (!seen.emplace(r, c).second)
      throw bad("duplicate entry (" + std::to_string(r) + "," +
                std::to_string(c) + ")");
    ScalarValue v = [&] {
      try {
        return parse_value_token(m->ring(), fields[2]);
      } catch (const std::invalid_argument& ex) {
        throw bad(ex.what());
      }
    }();
    if (!v.is_finite() && !is_tropical(m->ring()))
      throw bad("carrier violation: non-finite entry in a " +
                std::string(ring_name(m->ring())) + " file");
    m->set(r - 1, c - 1, std::move(v));
    if (end == text.size()) break;
  }
  if (!m) throw ParseError("empty matrix file", lineno, 1);
  return std::move(*m);
}

std::string print_matrix(const Matrix& m) {
  std::string out = "matrix " + std::to_string(m.rows()) + " " +
                    std::to_string(m.cols()) + " " +
                    std::string(ring_name(m.ring())) + "\n";
  ScalarValue z = zero(m.ring());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m.at(r, c) != z)
        out += std::to_string(r + 1) + " " + std::to_string(c + 1) + " " +
               m.at(r, c).token() + "\n";
  return out;
}

}  // namespace matlang
