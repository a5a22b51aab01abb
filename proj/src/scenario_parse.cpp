// Copyright 2026 The tsvf-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "tsvf/scenario.hpp"

namespace tsvf {

namespace {

constexpr std::size_t kMaxExprDepth = 64;
constexpr std::size_t kMaxModes = 64;
constexpr std::size_t kMaxListLength = 4096;

// A piece of one source line with the 1-based column of its first byte.
struct Span {
  std::string_view text;
  std::size_t line = 0;
  std::size_t col = 0;

  SourcePos pos() const { return {line, col}; }
  Span sub(std::size_t offset, std::size_t count = std::string_view::npos) const {
    return {text.substr(offset, count), line, col + offset};
  }
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

Span trim(Span s) {
  std::size_t b = 0;
  while (b < s.text.size() && is_space(s.text[b])) ++b;
  std::size_t e = s.text.size();
  while (e > b && is_space(s.text[e - 1])) --e;
  return s.sub(b, e - b);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

// Splits on `sep` outside parentheses; pieces are trimmed.
std::vector<Span> split(Span s, char sep) {
  std::vector<Span> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= s.text.size(); ++i) {
    if (i < s.text.size()) {
      if (s.text[i] == '(') ++depth;
      if (s.text[i] == ')') --depth;
    }
    if (i == s.text.size() || (s.text[i] == sep && depth == 0)) {
      out.push_back(trim(s.sub(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

struct Failure {
  SourcePos pos;
  std::string message;
};

[[noreturn]] void fail_at(SourcePos pos, std::string message) { throw Failure{pos, std::move(message)}; }
[[noreturn]] void fail_at(const Span& s, std::string message) { fail_at(s.pos(), std::move(message)); }

// Unsigned decimal real: digits [. digits] [e [+-] digits], at least one mantissa digit.
std::optional<double> scan_unsigned_real(std::string_view s, std::size_t& pos) {
  const std::size_t start = pos;
  std::size_t i = pos;
  std::size_t mantissa_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++mantissa_digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++mantissa_digits;
  }
  if (mantissa_digits == 0) return std::nullopt;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    std::size_t exp_digits = 0;
    while (j < s.size() && is_digit(s[j])) ++j, ++exp_digits;
    if (exp_digits == 0) return std::nullopt;
    i = j;
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data() + start, s.data() + i, value);
  if (ec != std::errc() || ptr != s.data() + i || !std::isfinite(value)) return std::nullopt;
  pos = i;
  return value;
}

std::optional<Complex> parse_complex_literal(std::string_view raw) {
  std::string s;
  for (char c : raw) {
    if (!is_space(c)) s.push_back(c);
  }
  std::size_t pos = 0;
  auto sign = [&](double& out) {
    out = 1.0;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      out = s[pos] == '-' ? -1.0 : 1.0;
      ++pos;
    }
  };
  double s1 = 1.0;
  sign(s1);
  const std::optional<double> a = scan_unsigned_real(s, pos);
  if (pos < s.size() && s[pos] == 'i') {
    if (pos + 1 != s.size()) return std::nullopt;
    return Complex(0.0, s1 * a.value_or(1.0));
  }
  if (!a) return std::nullopt;
  if (pos == s.size()) return Complex(s1 * *a, 0.0);
  if (s[pos] != '+' && s[pos] != '-') return std::nullopt;
  double s2 = 1.0;
  sign(s2);
  const std::optional<double> b = scan_unsigned_real(s, pos);
  if (pos + 1 != s.size() || s[pos] != 'i') return std::nullopt;
  return Complex(s1 * *a, s2 * b.value_or(1.0));
}

std::size_t parse_count(const Span& s, std::size_t max_value, const char* what) {
  if (s.text.empty() || !std::all_of(s.text.begin(), s.text.end(), is_digit)) {
    fail_at(s, std::string("malformed integer for ") + what);
  }
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.text.data(), s.text.data() + s.text.size(), value);
  if (ec != std::errc() || value > max_value) {
    std::ostringstream msg;
    msg << what << " must be at most " << max_value;
    fail_at(s, msg.str());
  }
  return value;
}

// ---------------------------------------------------------------------------
// Expressions

struct Token {
  enum Kind { number, ident, lparen, rparen, plus, minus, star, slash, comma, end } kind = end;
  std::string_view text;
  std::size_t col = 0;
  double value = 0.0;
};

std::vector<Token> tokenize(const Span& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::string_view t = s.text;
  while (i < t.size()) {
    if (is_space(t[i])) {
      ++i;
      continue;
    }
    Token tok;
    tok.col = s.col + i;
    const char c = t[i];
    if (is_digit(c) || c == '.') {
      std::size_t j = i;
      const auto v = scan_unsigned_real(t, j);
      if (!v || (j < t.size() && is_ident_char(t[j]))) fail_at({s.line, tok.col}, "malformed number");
      tok.kind = Token::number;
      tok.value = *v;
      tok.text = t.substr(i, j - i);
      i = j;
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < t.size() && is_ident_char(t[j])) ++j;
      tok.kind = Token::ident;
      tok.text = t.substr(i, j - i);
      i = j;
    } else {
      switch (c) {
        case '(':
          tok.kind = Token::lparen;
          break;
        case ')':
          tok.kind = Token::rparen;
          break;
        case '+':
          tok.kind = Token::plus;
          break;
        case '-':
          tok.kind = Token::minus;
          break;
        case '*':
          tok.kind = Token::star;
          break;
        case '/':
          tok.kind = Token::slash;
          break;
        case ',':
          tok.kind = Token::comma;
          break;
        default:
          fail_at({s.line, tok.col}, std::string("unexpected character '") + c + "'");
      }
      tok.text = t.substr(i, 1);
      ++i;
    }
    out.push_back(tok);
  }
  Token end;
  end.col = s.col + t.size();
  out.push_back(end);
  return out;
}

struct ExprContext {
  std::size_t system_dim = 0;  // 0: operators unavailable
  const std::vector<NamedState>* states = nullptr;
  const std::vector<NamedOperator>* operators = nullptr;
  const std::set<std::string>* failed = nullptr;  // sections that already reported an error
};

struct Value {
  bool is_op = false;
  double scalar = 0.0;
  LinearOperator op;
};

class ExprParser {
 public:
  ExprParser(const Span& s, const ExprContext& ctx) : line_(s.line), tokens_(tokenize(s)), ctx_(ctx) {}

  Value parse_all() {
    if (tokens_.front().kind == Token::end) fail_here("empty expression");
    Value v = expr();
    if (peek().kind != Token::end) fail_here("unexpected token '" + std::string(peek().text) + "'");
    return v;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }
  [[noreturn]] void fail_tok(const Token& t, std::string msg) const { fail_at({line_, t.col}, std::move(msg)); }
  [[noreturn]] void fail_here(std::string msg) const { fail_tok(peek(), std::move(msg)); }

  void expect(Token::Kind kind, const char* what) {
    if (peek().kind != kind) fail_here(std::string("expected ") + what);
    ++pos_;
  }

  struct DepthGuard {
    explicit DepthGuard(ExprParser& p) : p_(p) {
      if (++p_.depth_ > kMaxExprDepth) p_.fail_here("expression nested too deeply");
    }
    ~DepthGuard() { --p_.depth_; }
    ExprParser& p_;
  };

  Value expr() {
    DepthGuard guard(*this);
    Value lhs = term();
    while (peek().kind == Token::plus || peek().kind == Token::minus) {
      const Token op = take();
      Value rhs = term();
      lhs = add(lhs, rhs, op);
    }
    return lhs;
  }

  Value term() {
    Value lhs = unary();
    while (peek().kind == Token::star || peek().kind == Token::slash) {
      const Token op = take();
      Value rhs = unary();
      lhs = op.kind == Token::star ? multiply(lhs, rhs, op) : divide(lhs, rhs, op);
    }
    return lhs;
  }

  Value unary() {
    DepthGuard guard(*this);
    if (peek().kind == Token::minus || peek().kind == Token::plus) {
      const Token sign = take();
      Value v = unary();
      if (sign.kind == Token::minus) {
        if (v.is_op) {
          v = checked(sign, [&] { return op_value(Complex(-1.0) * v.op); });
        } else {
          v.scalar = -v.scalar;
        }
      }
      return v;
    }
    return primary();
  }

  Value primary() {
    const Token t = take();
    switch (t.kind) {
      case Token::number:
        return scalar(t.value);
      case Token::lparen: {
        Value v = expr();
        expect(Token::rparen, "')'");
        return v;
      }
      case Token::ident:
        return identifier(t);
      default:
        fail_tok(t, t.kind == Token::end ? "unexpected end of expression" : "unexpected token '" + std::string(t.text) + "'");
    }
  }

  static Value scalar(double x) {
    Value v;
    v.scalar = x;
    return v;
  }

  static Value op_value(LinearOperator op) {
    Value v;
    v.is_op = true;
    v.op = std::move(op);
    return v;
  }

  void require_operators(const Token& t) const {
    if (ctx_.system_dim == 0) fail_tok(t, "operator '" + std::string(t.text) + "' not allowed here");
  }

  Value identifier(const Token& t) {
    const std::string_view name = t.text;
    if (name == "pi") return scalar(std::numbers::pi);
    if (name == "sqrt") {
      expect(Token::lparen, "'(' after sqrt");
      const Token arg_tok = peek();
      Value arg = expr();
      expect(Token::rparen, "')'");
      if (arg.is_op) fail_tok(arg_tok, "sqrt takes a scalar");
      if (arg.scalar < 0.0) fail_tok(arg_tok, "sqrt of a negative number");
      return scalar(std::sqrt(arg.scalar));
    }
    if (name == "pauli_x" || name == "pauli_y" || name == "pauli_z") {
      require_operators(t);
      if (name == "pauli_x") return op_value(LinearOperator::pauli_x());
      if (name == "pauli_y") return op_value(LinearOperator::pauli_y());
      return op_value(LinearOperator::pauli_z());
    }
    if (name == "identity") {
      require_operators(t);
      expect(Token::lparen, "'(' after identity");
      const Token n_tok = peek();
      expect(Token::number, "dimension");
      expect(Token::rparen, "')'");
      const double n = n_tok.value;
      if (n != std::floor(n) || n < 1.0 || n > static_cast<double>(kMaxSystemDim)) {
        fail_tok(n_tok, "identity dimension must be an integer in [1, 16]");
      }
      return op_value(LinearOperator::identity(static_cast<std::size_t>(n)));
    }
    if (name == "projector") {
      require_operators(t);
      expect(Token::lparen, "'(' after projector");
      const Token s_tok = peek();
      expect(Token::ident, "state name");
      expect(Token::rparen, "')'");
      for (const NamedState& st : *ctx_.states) {
        if (st.name == s_tok.text) return op_value(LinearOperator::projector(StateVector(st.amps)));
      }
      if (already_failed("state", s_tok.text)) throw Failure{SourcePos{1, 1}, {}};
      fail_tok(s_tok, "unresolved state '" + std::string(s_tok.text) + "'");
    }
    if (ctx_.system_dim != 0) {
      for (const NamedOperator& op : *ctx_.operators) {
        if (op.name == name) return op_value(op.value);
      }
      if (already_failed("operator", name)) throw Failure{SourcePos{1, 1}, {}};
      fail_tok(t, "unresolved operator '" + std::string(name) + "' (operators must be defined before use)");
    }
    fail_tok(t, "unresolved name '" + std::string(name) + "'");
  }

  template <typename Fn>
  Value checked(const Token& op, Fn fn) const {
    try {
      return fn();
    } catch (const Error& ex) {
      fail_tok(op, ex.what());
    }
  }

  Value add(const Value& a, const Value& b, const Token& op) const {
    return checked(op, [&] { return add_unchecked(a, b, op); });
  }

  Value multiply(const Value& a, const Value& b, const Token& op) const {
    return checked(op, [&] { return multiply_unchecked(a, b, op); });
  }

  Value divide(const Value& a, const Value& b, const Token& op) const {
    return checked(op, [&] { return divide_unchecked(a, b, op); });
  }

  Value add_unchecked(const Value& a, const Value& b, const Token& op) const {
    const double sign = op.kind == Token::plus ? 1.0 : -1.0;
    if (a.is_op != b.is_op) fail_tok(op, "cannot add a scalar and an operator");
    if (!a.is_op) return finite(scalar(a.scalar + sign * b.scalar), op);
    if (a.op.dim() != b.op.dim()) fail_tok(op, dim_message(a.op.dim(), b.op.dim()));
    return op_value(sign > 0 ? a.op + b.op : a.op - b.op);
  }

  Value multiply_unchecked(const Value& a, const Value& b, const Token& op) const {
    if (!a.is_op && !b.is_op) return finite(scalar(a.scalar * b.scalar), op);
    if (!a.is_op) return op_value(Complex(a.scalar) * b.op);
    if (!b.is_op) return op_value(Complex(b.scalar) * a.op);
    if (a.op.dim() != b.op.dim()) fail_tok(op, dim_message(a.op.dim(), b.op.dim()));
    return op_value(a.op * b.op);
  }

  Value divide_unchecked(const Value& a, const Value& b, const Token& op) const {
    if (b.is_op) fail_tok(op, "cannot divide by an operator");
    if (b.scalar == 0.0) fail_tok(op, "division by zero");
    if (!a.is_op) return finite(scalar(a.scalar / b.scalar), op);
    return op_value(a.op / Complex(b.scalar));
  }

  Value finite(Value v, const Token& op) const {
    if (!std::isfinite(v.scalar)) fail_tok(op, "non-finite value");
    return v;
  }

  static std::string dim_message(std::size_t a, std::size_t b) {
    std::ostringstream msg;
    msg << "dimension mismatch (" << a << " vs " << b << ")";
    return msg.str();
  }

  std::size_t line_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
  bool already_failed(std::string_view kind, std::string_view name) const {
    return ctx_.failed && ctx_.failed->count(std::string(kind) + ":" + std::string(name)) > 0;
  }

  const ExprContext& ctx_;
};

double parse_scalar(const Span& s) {
  if (s.text.empty()) fail_at(s, "missing value");
  const ExprContext ctx;
  const Value v = ExprParser(s, ctx).parse_all();
  if (v.is_op) fail_at(s, "expected a scalar");
  return v.scalar;
}

std::vector<double> parse_scalar_list(const Span& s, std::vector<SourcePos>* positions = nullptr) {
  std::vector<double> out;
  const auto items = split(s, ',');
  if (items.size() > kMaxListLength) fail_at(s, "list too long");
  for (const Span& item : items) {
    if (item.text.empty()) fail_at(item, "empty list entry");
    out.push_back(parse_scalar(item));
    if (positions) positions->push_back(item.pos());
  }
  return out;
}

std::vector<Span> parse_ident_list(const Span& s, const char* what) {
  const auto items = split(s, ',');
  if (items.size() > kMaxListLength) fail_at(s, "list too long");
  for (const Span& item : items) {
    if (!is_identifier(item.text)) fail_at(item, std::string("malformed ") + what + " name");
  }
  return items;
}

CVector parse_complex_list(const Span& s) {
  const auto items = split(s, ',');
  if (items.size() > kMaxSystemDim * kMaxSystemDim) fail_at(s, "list too long");
  CVector out(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto c = parse_complex_literal(items[i].text);
    if (!c) fail_at(items[i], "malformed complex literal");
    out[static_cast<Eigen::Index>(i)] = *c;
  }
  return out;
}

// label:int
std::pair<std::string, std::size_t> parse_labeled_mode(const Span& s, std::size_t n_modes) {
  const auto colon = s.text.find(':');
  if (colon == std::string_view::npos) fail_at(s, "expected label:mode");
  const Span label = trim(s.sub(0, colon));
  const Span mode = trim(s.sub(colon + 1));
  if (!is_identifier(label.text)) fail_at(label.text.empty() ? s : label, "malformed label");
  const std::size_t m = parse_count(mode, kMaxModes, "mode");
  if (m >= n_modes) fail_at(mode, "mode out of range");
  return {std::string(label.text), m};
}

// ---------------------------------------------------------------------------
// Sections

struct RawEntry {
  Span key;
  Span value;
};

struct RawSection {
  Span name;
  std::optional<Span> arg;
  std::vector<RawEntry> entries;
};

class DocBuilder {
 public:
  explicit DocBuilder(std::vector<ParseDiagnostic>& diags) : diags_(diags) {}

  std::optional<ScenarioDoc> build(std::vector<RawSection>& sections) {
    // Section bookkeeping.
    const std::set<std::string_view> singletons{"system", "pointer", "selection", "network", "experiment"};
    std::set<std::string_view> seen;
    for (const RawSection& sec : sections) {
      const std::string_view n = sec.name.text;
      if (n == "state" || n == "operator") {
        if (!sec.arg) error(sec.name, "section [" + std::string(n) + "] needs a name");
        continue;
      }
      if (!singletons.count(n)) {
        error(sec.name, "unknown section [" + std::string(n) + "]");
        continue;
      }
      if (sec.arg) error(*sec.arg, "section [" + std::string(n) + "] takes no name");
      if (!seen.insert(n).second) error(sec.name, "duplicate section [" + std::string(n) + "]");
    }
    if (has_errors()) return std::nullopt;

    guarded(find(sections, "system"), [&](const RawSection& s) { system(s); });
    for (const RawSection& sec : sections) {
      if (sec.name.text == "state") guarded(&sec, [&](const RawSection& s) { state(s); });
    }
    for (const RawSection& sec : sections) {
      if (sec.name.text == "operator") guarded(&sec, [&](const RawSection& s) { op(s); });
    }
    guarded(find(sections, "pointer"), [&](const RawSection& s) { pointer(s); });
    guarded(find(sections, "selection"), [&](const RawSection& s) { selection(s); });
    guarded(find(sections, "network"), [&](const RawSection& s) { network(s); });
    const RawSection* exp = find(sections, "experiment");
    if (!exp) {
      error(SourcePos{1, 1}, "missing [experiment] section");
    } else {
      guarded(exp, [&](const RawSection& s) { experiment(s); });
    }
    if (!find(sections, "system") && !find(sections, "network")) error(SourcePos{1, 1}, "missing [system] section");
    if (has_errors()) return std::nullopt;
    return std::move(doc_);
  }

 private:
  bool has_errors() const {
    return std::any_of(diags_.begin(), diags_.end(), [](const auto& d) { return d.severity == Severity::error; });
  }

  void error(SourcePos pos, std::string msg) { diags_.push_back({pos.line, pos.column, std::move(msg), Severity::error}); }
  void error(const Span& s, std::string msg) { error(s.pos(), std::move(msg)); }

  template <typename Fn>
  void guarded(const RawSection* sec, Fn fn) {
    if (!sec) return;
    try {
      fn(*sec);
      return;
    } catch (const Failure& f) {
      if (!f.message.empty()) error(f.pos, f.message);
    } catch (const Error& ex) {
      error(sec->name, ex.what());
    }
    failed_.insert(std::string(sec->name.text) + (sec->arg ? ":" + std::string(sec->arg->text) : ""));
  }

  // A reference to something that already failed is reported once, at the failure.
  bool failed(std::string_view kind, std::string_view name = {}) const {
    return failed_.count(std::string(kind) + (name.empty() ? "" : ":" + std::string(name))) > 0;
  }

  [[noreturn]] static void fail_silently() { throw Failure{SourcePos{1, 1}, {}}; }

  static const Span& key_span(const RawSection& sec, std::string_view key) {
    for (const RawEntry& e : sec.entries) {
      if (e.key.text == key) return e.key;
    }
    return sec.name;
  }

  static const RawSection* find(const std::vector<RawSection>& sections, std::string_view name) {
    for (const RawSection& s : sections) {
      if (s.name.text == name) return &s;
    }
    return nullptr;
  }

  // Maps keys to values, rejecting unknown and repeated keys.
  std::map<std::string_view, Span> keyed(const RawSection& sec, std::initializer_list<std::string_view> allowed) {
    std::map<std::string_view, Span> out;
    for (const RawEntry& e : sec.entries) {
      if (std::find(allowed.begin(), allowed.end(), e.key.text) == allowed.end()) {
        fail_at(e.key, "unknown key '" + std::string(e.key.text) + "' in [" + std::string(sec.name.text) + "]");
      }
      if (!out.emplace(e.key.text, e.value).second) fail_at(e.key, "duplicate key '" + std::string(e.key.text) + "'");
    }
    return out;
  }

  static const Span& required(const std::map<std::string_view, Span>& kv, std::string_view key, const RawSection& sec) {
    const auto it = kv.find(key);
    if (it == kv.end()) fail_at(sec.name, "[" + std::string(sec.name.text) + "] is missing '" + std::string(key) + "'");
    return it->second;
  }

  void system(const RawSection& sec) {
    const auto kv = keyed(sec, {"dim"});
    const Span& v = required(kv, "dim", sec);
    const std::size_t dim = parse_count(v, kMaxSystemDim, "dim");
    if (dim == 0) fail_at(v, "dim must be positive");
    doc_.system_dim = dim;
  }

  std::size_t need_system(const Span& where) const {
    if (!doc_.system_dim) {
      if (failed("system")) fail_silently();
      fail_at(where, "requires a [system] section");
    }
    return *doc_.system_dim;
  }

  void state(const RawSection& sec) {
    const Span& name = *sec.arg;
    if (!is_identifier(name.text)) fail_at(name, "malformed state name");
    if (doc_.find_state(name.text)) fail_at(name, "duplicate state '" + std::string(name.text) + "'");
    const std::size_t dim = need_system(name);
    const auto kv = keyed(sec, {"amps"});
    const Span& v = required(kv, "amps", sec);
    CVector amps = parse_complex_list(v);
    if (static_cast<std::size_t>(amps.size()) != dim) {
      std::ostringstream msg;
      msg << "dimension mismatch: state has " << amps.size() << " amplitudes, system dim is " << dim;
      fail_at(v, msg.str());
    }
    if (amps.norm() == 0.0) fail_at(v, "state vector is zero");
    doc_.states.push_back({std::string(name.text), std::move(amps), v.pos()});
  }

  void op(const RawSection& sec) {
    const Span& name = *sec.arg;
    if (!is_identifier(name.text)) fail_at(name, "malformed operator name");
    if (doc_.find_operator(name.text)) fail_at(name, "duplicate operator '" + std::string(name.text) + "'");
    const std::size_t dim = need_system(name);
    const auto kv = keyed(sec, {"expr", "matrix"});
    if (kv.count("expr") == kv.count("matrix")) fail_at(name, "operator needs exactly one of 'expr' or 'matrix'");
    NamedOperator out;
    out.name = std::string(name.text);
    out.pos = name.pos();
    if (kv.count("expr")) {
      const Span& v = kv.at("expr");
      const ExprContext ctx{dim, &doc_.states, &doc_.operators, &failed_};
      const Value val = ExprParser(v, ctx).parse_all();
      if (!val.is_op) fail_at(v, "expression is a scalar, not an operator");
      if (val.op.dim() != dim) {
        std::ostringstream msg;
        msg << "dimension mismatch: operator is " << val.op.dim() << "x" << val.op.dim() << ", system dim is " << dim;
        fail_at(v, msg.str());
      }
      out.form = OperatorForm::expression;
      out.expression = std::string(v.text);
      out.value = val.op;
    } else {
      const Span& v = kv.at("matrix");
      const auto rows = split(v, ';');
      if (rows.size() != dim) {
        std::ostringstream msg;
        msg << "dimension mismatch: matrix has " << rows.size() << " rows, system dim is " << dim;
        fail_at(v, msg.str());
      }
      CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const CVector row = parse_complex_list(rows[r]);
        if (static_cast<std::size_t>(row.size()) != dim) {
          std::ostringstream msg;
          msg << "dimension mismatch: row has " << row.size() << " entries, system dim is " << dim;
          fail_at(rows[r], msg.str());
        }
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      out.form = OperatorForm::matrix;
      out.value = LinearOperator(std::move(m));
    }
    doc_.operators.push_back(std::move(out));
  }

  void pointer(const RawSection& sec) {
    const auto kv = keyed(sec, {"kind", "spread", "half_width", "points", "generator"});
    const Span& kind = required(kv, "kind", sec);
    PointerModel m;
    if (kind.text == "gaussian_grid") {
      if (kv.count("generator")) fail_at(kv.at("generator"), "'generator' applies to qubit pointers only");
      const Span& spread = required(kv, "spread", sec);
      m = PointerModel::gaussian(parse_scalar(spread));
      if (kv.count("half_width")) m.half_width = parse_scalar(kv.at("half_width"));
      if (kv.count("points")) m.n_points = parse_count(kv.at("points"), kMaxJointDim, "points");
    } else if (kind.text == "qubit") {
      for (const char* k : {"spread", "half_width", "points"}) {
        if (kv.count(k)) fail_at(kv.at(k), std::string("'") + k + "' applies to gaussian_grid pointers only");
      }
      m = PointerModel::qubit();
      if (kv.count("generator")) {
        const Span& g = kv.at("generator");
        if (g.text == "x") {
          m.generator_axis = PauliAxis::x;
        } else if (g.text == "y") {
          m.generator_axis = PauliAxis::y;
        } else if (g.text == "z") {
          m.generator_axis = PauliAxis::z;
        } else {
          fail_at(g, "generator must be x, y or z");
        }
      }
    } else {
      fail_at(kind, "pointer kind must be gaussian_grid or qubit");
    }
    doc_.pointer = m;
    doc_.pointer_pos = sec.name.pos();
    for (const auto& [key, value] : kv) doc_.pointer_key_pos[std::string(key)] = value.pos();
  }

  void selection(const RawSection& sec) {
    const auto kv = keyed(sec, {"pre", "post"});
    SelectionRef ref;
    for (const char* key : {"pre", "post"}) {
      const Span& v = required(kv, key, sec);
      if (!is_identifier(v.text)) fail_at(v, "malformed state name");
      if (!doc_.find_state(v.text)) {
        if (failed("state", v.text)) fail_silently();
        fail_at(v, "unresolved state '" + std::string(v.text) + "'");
      }
      (std::string_view(key) == "pre" ? ref.pre : ref.post) = std::string(v.text);
      (std::string_view(key) == "pre" ? ref.pre_pos : ref.post_pos) = v.pos();
    }
    doc_.selection = ref;
  }

  void network(const RawSection& sec) {
    std::optional<std::size_t> modes;
    std::optional<std::size_t> source;
    std::optional<Span> postselect;
    std::vector<NetworkElement> elements;
    std::vector<Detector> detectors;
    std::set<std::string_view> singles;
    auto need_modes = [&](const RawEntry& e) {
      if (!modes) fail_at(e.key, "'modes' must be declared before '" + std::string(e.key.text) + "'");
      return *modes;
    };
    for (const RawEntry& e : sec.entries) {
      const std::string_view k = e.key.text;
      if (k == "modes" || k == "source" || k == "postselect") {
        if (!singles.insert(k).second) fail_at(e.key, "duplicate key '" + std::string(k) + "'");
      }
      if (k == "modes") {
        modes = parse_count(e.value, kMaxModes, "modes");
        if (*modes == 0) fail_at(e.value, "modes must be positive");
      } else if (k == "source") {
        source = parse_count(e.value, kMaxModes, "source");
        if (*source >= need_modes(e)) fail_at(e.value, "mode out of range");
      } else if (k == "bs") {
        const std::size_t n = need_modes(e);
        const auto parts = split(e.value, ',');
        if (parts.size() != 3) fail_at(e.value, "bs expects mode_a, mode_b, transmissivity");
        BeamSplitter bs{parse_count(parts[0], kMaxModes, "mode"), parse_count(parts[1], kMaxModes, "mode"),
                        parse_scalar(parts[2])};
        if (bs.mode_a >= n) fail_at(parts[0], "mode out of range");
        if (bs.mode_b >= n) fail_at(parts[1], "mode out of range");
        if (bs.mode_a == bs.mode_b) fail_at(parts[1], "beam splitter needs two distinct modes");
        if (!(bs.transmissivity > 0.0 && bs.transmissivity < 1.0)) fail_at(parts[2], "transmissivity must lie in (0, 1)");
        elements.emplace_back(bs);
      } else if (k == "phase") {
        const std::size_t n = need_modes(e);
        const auto parts = split(e.value, ',');
        if (parts.size() != 2) fail_at(e.value, "phase expects mode, radians");
        PhaseShift ps{parse_count(parts[0], kMaxModes, "mode"), parse_scalar(parts[1])};
        if (ps.mode >= n) fail_at(parts[0], "mode out of range");
        elements.emplace_back(ps);
      } else if (k == "slice") {
        const std::size_t n = need_modes(e);
        SliceMarker marker;
        std::set<std::string> labels;
        std::set<std::size_t> used;
        for (const Span& item : split(e.value, ',')) {
          auto arm = parse_labeled_mode(item, n);
          if (!labels.insert(arm.first).second) fail_at(item, "arm '" + arm.first + "' repeated within a slice");
          if (!used.insert(arm.second).second) fail_at(item, "mode labeled twice within a slice");
          marker.arms.push_back(std::move(arm));
        }
        elements.emplace_back(std::move(marker));
      } else if (k == "detector") {
        const std::size_t n = need_modes(e);
        for (const Span& item : split(e.value, ',')) {
          auto [label, mode] = parse_labeled_mode(item, n);
          for (const Detector& d : detectors) {
            if (d.label == label) fail_at(item, "detector '" + label + "' repeated");
          }
          detectors.push_back({std::move(label), mode});
        }
      } else if (k == "postselect") {
        if (!is_identifier(e.value.text)) fail_at(e.value, "malformed detector label");
        postselect = e.value;
      } else {
        fail_at(e.key, "unknown key '" + std::string(k) + "' in [network]");
      }
    }
    if (!modes) fail_at(sec.name, "[network] is missing 'modes'");
    if (!source) fail_at(sec.name, "[network] is missing 'source'");
    if (!postselect) fail_at(sec.name, "[network] is missing 'postselect'");
    const bool known = std::any_of(detectors.begin(), detectors.end(),
                                   [&](const Detector& d) { return d.label == postselect->text; });
    if (!known) fail_at(*postselect, "unresolved detector '" + std::string(postselect->text) + "'");
    try {
      doc_.network.emplace(*modes, *source, std::move(elements), std::move(detectors), std::string(postselect->text));
    } catch (const Error& ex) {
      fail_at(sec.name, ex.what());
    }
  }

  void experiment(const RawSection& sec) {
    const auto kv = keyed(sec, {"plan", "observable", "g", "spreads", "fixed_g", "fixed_spread", "metric", "arms",
                                "environment"});
    ExperimentPlan& plan = doc_.plan;
    const Span& kind = required(kv, "plan", sec);
    const std::map<std::string_view, PlanKind> kinds{{"weakvalue", PlanKind::weakvalue},
                                                     {"sweep", PlanKind::sweep},
                                                     {"trace", PlanKind::trace},
                                                     {"presence", PlanKind::presence},
                                                     {"compare_limits", PlanKind::compare_limits}};
    if (!kinds.count(kind.text)) fail_at(kind, "unknown plan '" + std::string(kind.text) + "'");
    plan.kind = kinds.at(kind.text);
    for (const auto& [key, value] : kv) plan.key_pos[std::string(key)] = value.pos();

    std::set<std::string_view> applicable{"plan", "g"};
    switch (plan.kind) {
      case PlanKind::weakvalue:
        applicable.insert("observable");
        break;
      case PlanKind::sweep:
        applicable.insert({"observable", "metric", "arms"});
        break;
      case PlanKind::trace:
      case PlanKind::presence:
        applicable.insert({"arms", "environment"});
        break;
      case PlanKind::compare_limits:
        applicable.insert({"observable", "spreads", "fixed_g", "fixed_spread"});
        break;
    }
    for (const auto& [key, value] : kv) {
      if (!applicable.count(key)) {
        fail_at(key_span(sec, key), "key '" + std::string(key) + "' does not apply to plan " + std::string(kind.text));
      }
    }

    if (kv.count("observable")) {
      for (const Span& item : parse_ident_list(kv.at("observable"), "operator")) {
        if (!doc_.find_operator(item.text)) {
          if (failed("operator", item.text)) fail_silently();
          fail_at(item, "unresolved operator '" + std::string(item.text) + "'");
        }
        plan.observables.emplace_back(item.text);
        plan.observable_pos.push_back(item.pos());
      }
    }
    if (kv.count("arms")) {
      if (!doc_.network) {
        if (failed("network")) fail_silently();
        fail_at(kv.at("arms"), "arms need a [network] section");
      }
      for (const Span& item : parse_ident_list(kv.at("arms"), "arm")) {
        if (!doc_.network->find_arm(std::string(item.text))) {
          fail_at(item, "unresolved arm '" + std::string(item.text) + "'");
        }
        plan.arms.emplace_back(item.text);
        plan.arm_pos.push_back(item.pos());
      }
    }
    if (kv.count("metric")) {
      for (const Span& item : parse_ident_list(kv.at("metric"), "metric")) {
        try {
          plan.metrics.push_back(metric_from_string(std::string(item.text)));
        } catch (const Error& ex) {
          fail_at(item, ex.what());
        }
      }
    }
    if (kv.count("g")) plan.g_schedule = parse_scalar_list(kv.at("g"), &plan.g_pos);
    if (kv.count("spreads")) plan.spreads = parse_scalar_list(kv.at("spreads"));
    if (kv.count("fixed_g")) plan.fixed_g = parse_scalar(kv.at("fixed_g"));
    if (kv.count("fixed_spread")) plan.fixed_spread = parse_scalar(kv.at("fixed_spread"));
    if (kv.count("environment")) {
      const Span& env = kv.at("environment");
      if (env.text == "isolated") {
        plan.environment = TraceEnvironment::isolated;
      } else if (env.text == "disturbed") {
        plan.environment = TraceEnvironment::disturbed;
      } else {
        fail_at(env, "environment must be isolated or disturbed");
      }
    }

    switch (plan.kind) {
      case PlanKind::weakvalue:
      case PlanKind::compare_limits:
        if (plan.observables.empty()) fail_at(sec.name, "plan " + std::string(kind.text) + " needs 'observable'");
        if (!doc_.selection) {
          if (failed("selection")) fail_silently();
          fail_at(kind, "plan " + std::string(kind.text) + " needs a [selection] section");
        }
        break;
      case PlanKind::sweep:
        if (plan.observables.empty() && !doc_.network) {
          if (failed("network")) fail_silently();
          fail_at(sec.name, "plan sweep needs 'observable' or a [network]");
        }
        if (!plan.observables.empty() && !doc_.selection) {
          if (failed("selection")) fail_silently();
          fail_at(kind, "plan sweep needs a [selection] section");
        }
        break;
      case PlanKind::trace:
      case PlanKind::presence:
        if (!doc_.network) {
          if (failed("network")) fail_silently();
          fail_at(kind, "plan " + std::string(kind.text) + " needs a [network] section");
        }
        break;
    }
  }

  std::vector<ParseDiagnostic>& diags_;
  ScenarioDoc doc_;
  std::set<std::string> failed_;
};

}  // namespace

std::string to_string(PlanKind k) {
  switch (k) {
    case PlanKind::weakvalue:
      return "weakvalue";
    case PlanKind::sweep:
      return "sweep";
    case PlanKind::trace:
      return "trace";
    case PlanKind::presence:
      return "presence";
    case PlanKind::compare_limits:
      return "compare_limits";
  }
  return "?";
}

std::string format_diagnostic(const ParseDiagnostic& d, std::string_view source_name) {
  std::ostringstream out;
  if (!source_name.empty()) out << source_name << ":";
  out << d.line << ":" << d.column << ": " << (d.severity == Severity::error ? "error" : "warning") << ": "
      << d.message;
  return out.str();
}

const NamedState* ScenarioDoc::find_state(std::string_view name) const {
  for (const NamedState& s : states) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const NamedOperator* ScenarioDoc::find_operator(std::string_view name) const {
  for (const NamedOperator& o : operators) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

ParseResult parse(std::string_view text) {
  ParseResult result;
  auto& diags = result.diagnostics;
  std::vector<Span> lines;
  {
    std::size_t start = 0;
    std::size_t number = 1;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == '\n') {
        lines.push_back({text.substr(start, i - start), number++, 1});
        start = i + 1;
      }
    }
  }
  if (trim(lines.front()).text != kScenarioMagic) {
    diags.push_back({1, 1, "expected first line '" + std::string(kScenarioMagic) + "'", Severity::error});
    return result;
  }

  std::vector<RawSection> sections;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    Span line = lines[li];
    const auto hash = line.text.find('#');
    if (hash != std::string_view::npos) line = line.sub(0, hash);
    line = trim(line);
    if (line.text.empty()) continue;
    if (line.text.front() == '[') {
      if (line.text.back() != ']') {
        diags.push_back({line.line, line.col, "malformed section header", Severity::error});
        continue;
      }
      const Span inner = trim(line.sub(1, line.text.size() - 2));
      std::size_t cut = 0;
      while (cut < inner.text.size() && !is_space(inner.text[cut])) ++cut;
      RawSection sec;
      sec.name = inner.sub(0, cut);
      if (!is_identifier(sec.name.text)) {
        diags.push_back({line.line, sec.name.text.empty() ? line.col : sec.name.col, "malformed section name",
                         Severity::error});
        continue;
      }
      const Span rest = trim(inner.sub(cut));
      if (!rest.text.empty()) sec.arg = rest;
      sections.push_back(std::move(sec));
      continue;
    }
    const auto eq = line.text.find('=');
    if (eq == std::string_view::npos) {
      diags.push_back({line.line, line.col, "expected 'key = value'", Severity::error});
      continue;
    }
    const Span key = trim(line.sub(0, eq));
    const Span value = trim(line.sub(eq + 1));
    if (!is_identifier(key.text)) {
      diags.push_back({line.line, line.col, "malformed key", Severity::error});
      continue;
    }
    if (value.text.empty()) {
      diags.push_back({line.line, line.col + eq, "missing value for '" + std::string(key.text) + "'", Severity::error});
      continue;
    }
    if (sections.empty()) {
      diags.push_back({key.line, key.col, "assignment outside of any section", Severity::error});
      continue;
    }
    sections.back().entries.push_back({key, value});
  }
  if (!diags.empty()) return result;

  DocBuilder builder(diags);
  result.doc = builder.build(sections);
  return result;
}

}  // namespace tsvf
