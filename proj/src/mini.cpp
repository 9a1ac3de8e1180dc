#include "clozefix/mini.hpp"

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <variant>

#include "clozefix/tokenizer.hpp"

namespace clozefix::mini {

namespace {

struct LexToken {
  std::string text;
  TokenKind kind;
  std::size_t line;  // 0-based
};

// ---------------------------------------------------------------- syntax tree

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

enum class ExprKind { integer, boolean, variable, array, index, call, unary, binary };

struct Expr {
  ExprKind kind;
  std::size_t line = 0;
  std::int64_t value = 0;  // integer / boolean literal
  std::string name;        // variable, callee or operator
  std::size_t slot = 0;    // resolved variable slot
  int callee = -1;         // user function index, or -1 for a builtin
  std::vector<ExprPtr> args;
};

enum class StmtKind { let, assign, expr, if_, while_, for_, return_, break_, continue_ };

struct Stmt {
  StmtKind kind;
  std::size_t line = 0;
  std::string name;  // let: variable; assign: operator
  std::size_t slot = 0;
  ExprPtr target;  // assign
  ExprPtr value;   // let / assign / expr / return / condition
  StmtPtr init, step;
  Block body, orelse;
};

struct Function {
  std::string name;
  std::vector<std::string> params;
  Block body;
  std::size_t slots = 0;
  std::size_t first_line = 0, last_line = 0;
  bool is_test = false;
};

// -------------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::vector<LexToken> toks) : toks_(std::move(toks)) {}

  std::vector<Function> program() {
    std::vector<Function> out;
    while (!at_end()) {
      if (accept("fn")) {
        out.push_back(function(false));
      } else if (accept("test")) {
        out.push_back(function(true));
      } else {
        fail("expected 'fn' or 'test'");
      }
    }
    return out;
  }

 private:
  bool at_end() const { return pos_ >= toks_.size(); }
  const LexToken& peek(std::size_t ahead = 0) const {
    static const LexToken eof{"<end of file>", TokenKind::punctuation, 0};
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : eof;
  }
  std::size_t line() const {
    if (!at_end()) return toks_[pos_].line;
    return toks_.empty() ? 0 : toks_.back().line;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw CompileError(line() + 1, what + " near '" + peek().text + "'");
  }
  bool check(std::string_view text) const {
    return !at_end() && peek().text == text && peek().kind != TokenKind::string_literal;
  }
  bool accept(std::string_view text) {
    if (!check(text)) return false;
    ++pos_;
    return true;
  }
  void expect(std::string_view text) {
    if (!accept(text)) fail("expected '" + std::string(text) + "'");
  }
  std::string identifier() {
    static const std::vector<std::string_view> reserved = {
        "fn", "test", "let", "if", "else", "while", "for", "return", "break", "continue",
        "true", "false"};
    if (at_end() || peek().kind != TokenKind::word) fail("expected a name");
    for (auto r : reserved) {
      if (peek().text == r) fail("reserved word used as a name");
    }
    return toks_[pos_++].text;
  }

  Function function(bool is_test) {
    Function f;
    f.is_test = is_test;
    f.first_line = toks_[pos_ - 1].line;
    f.name = identifier();
    if (!is_test) {
      expect("(");
      if (!check(")")) {
        do f.params.push_back(identifier());
        while (accept(","));
      }
      expect(")");
    }
    f.body = block();
    f.last_line = toks_[pos_ - 1].line;
    return f;
  }

  Block block() {
    expect("{");
    Block out;
    while (!check("}")) {
      if (at_end()) fail("unterminated block");
      out.push_back(statement());
    }
    expect("}");
    return out;
  }

  StmtPtr make(StmtKind kind) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->line = line();
    return s;
  }

  StmtPtr statement() {
    if (check("if")) return if_statement();
    if (check("while")) {
      auto s = make(StmtKind::while_);
      ++pos_;
      expect("(");
      s->value = expression();
      expect(")");
      s->body = block();
      return s;
    }
    if (check("for")) {
      auto s = make(StmtKind::for_);
      ++pos_;
      expect("(");
      s->init = simple();
      expect(";");
      s->value = expression();
      expect(";");
      s->step = simple();
      expect(")");
      s->body = block();
      return s;
    }
    if (check("return")) {
      auto s = make(StmtKind::return_);
      ++pos_;
      if (!check(";")) s->value = expression();
      expect(";");
      return s;
    }
    if (check("break") || check("continue")) {
      auto s = make(check("break") ? StmtKind::break_ : StmtKind::continue_);
      ++pos_;
      expect(";");
      return s;
    }
    auto s = simple();
    expect(";");
    return s;
  }

  StmtPtr if_statement() {
    auto s = make(StmtKind::if_);
    expect("if");
    expect("(");
    s->value = expression();
    expect(")");
    s->body = block();
    if (accept("else")) {
      if (check("if")) s->orelse.push_back(if_statement());
      else s->orelse = block();
    }
    return s;
  }

  StmtPtr simple() {
    if (accept("let")) {
      auto s = make(StmtKind::let);
      s->name = identifier();
      expect("=");
      s->value = expression();
      return s;
    }
    const std::size_t start_line = line();
    ExprPtr e = expression();
    for (std::string_view op : {"=", "+=", "-=", "*="}) {
      if (check(op)) {
        if (e->kind != ExprKind::variable && e->kind != ExprKind::index) {
          fail("cannot assign to this expression");
        }
        auto s = make(StmtKind::assign);
        s->line = start_line;
        s->name = std::string(op);
        ++pos_;
        s->target = std::move(e);
        s->value = expression();
        return s;
      }
    }
    if (e->kind != ExprKind::call) fail("expression statement must be a call");
    auto s = make(StmtKind::expr);
    s->line = start_line;
    s->value = std::move(e);
    return s;
  }

  ExprPtr node(ExprKind kind) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->line = line();
    return e;
  }

  ExprPtr binary_level(int level) {
    static const std::vector<std::vector<std::string_view>> levels = {
        {"||"}, {"&&"}, {"==", "!="}, {"<", "<=", ">", ">="}, {"+", "-"}, {"*", "/", "%"}};
    if (level == static_cast<int>(levels.size())) return unary();
    ExprPtr lhs = binary_level(level + 1);
    while (true) {
      std::optional<std::string_view> op;
      for (auto candidate : levels[static_cast<std::size_t>(level)]) {
        if (check(candidate)) op = candidate;
      }
      if (!op) return lhs;
      auto e = node(ExprKind::binary);
      ++pos_;
      e->name = std::string(*op);
      e->args.push_back(std::move(lhs));
      e->args.push_back(binary_level(level + 1));
      lhs = std::move(e);
    }
  }

  ExprPtr expression() { return binary_level(0); }

  ExprPtr unary() {
    if (check("!") || check("-")) {
      auto e = node(ExprKind::unary);
      e->name = toks_[pos_++].text;
      e->args.push_back(unary());
      return e;
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (check("[")) {
      auto idx = node(ExprKind::index);
      ++pos_;
      idx->args.push_back(std::move(e));
      idx->args.push_back(expression());
      expect("]");
      e = std::move(idx);
    }
    return e;
  }

  ExprPtr primary() {
    if (at_end()) fail("unexpected end of file");
    const LexToken& t = peek();
    if (accept("(")) {
      ExprPtr e = expression();
      expect(")");
      return e;
    }
    if (check("[")) {
      auto e = node(ExprKind::array);
      ++pos_;
      if (!check("]")) {
        do e->args.push_back(expression());
        while (accept(","));
      }
      expect("]");
      return e;
    }
    if (t.kind == TokenKind::number) {
      auto e = node(ExprKind::integer);
      const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), e->value);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size()) fail("bad integer literal");
      ++pos_;
      return e;
    }
    if (check("true") || check("false")) {
      auto e = node(ExprKind::boolean);
      e->value = check("true") ? 1 : 0;
      ++pos_;
      return e;
    }
    if (t.kind == TokenKind::word) {
      const bool call = peek(1).text == "(";
      auto e = node(call ? ExprKind::call : ExprKind::variable);
      e->name = identifier();
      if (call) {
        expect("(");
        if (!check(")")) {
          do e->args.push_back(expression());
          while (accept(","));
        }
        expect(")");
      }
      return e;
    }
    fail("unexpected token");
  }

  std::vector<LexToken> toks_;
  std::size_t pos_ = 0;
};

// ------------------------------------------------------------------- checker

const std::map<std::string, std::size_t, std::less<>>& builtins() {
  static const std::map<std::string, std::size_t, std::less<>> table = {
      {"len", 1}, {"push", 2}, {"check", 1}, {"array", 2}, {"min", 2}, {"max", 2}, {"abs", 1}};
  return table;
}

class Checker {
 public:
  explicit Checker(std::vector<Function>& fns) : fns_(fns) {
    for (std::size_t i = 0; i < fns_.size(); ++i) {
      const Function& f = fns_[i];
      auto& names = f.is_test ? tests_ : index_;
      if (names.count(f.name) || (!f.is_test && builtins().count(f.name))) {
        throw CompileError(f.first_line + 1, "duplicate definition of '" + f.name + "'");
      }
      names[f.name] = static_cast<int>(i);
    }
  }

  void run() {
    for (Function& f : fns_) {
      scopes_.assign(1, {});
      next_slot_ = 0;
      loops_ = 0;
      for (const std::string& p : f.params) declare(p, f.first_line);
      block(f.body);
      f.slots = next_slot_;
    }
  }

 private:
  std::size_t declare(const std::string& name, std::size_t line) {
    auto& scope = scopes_.back();
    if (scope.count(name)) throw CompileError(line + 1, "'" + name + "' is already declared");
    scope[name] = next_slot_;
    return next_slot_++;
  }

  std::size_t lookup(const std::string& name, std::size_t line) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto found = it->find(name); found != it->end()) return found->second;
    }
    throw CompileError(line + 1, "undeclared variable '" + name + "'");
  }

  void block(Block& b) {
    scopes_.emplace_back();
    for (StmtPtr& s : b) statement(*s);
    scopes_.pop_back();
  }

  void statement(Stmt& s) {
    switch (s.kind) {
      case StmtKind::let:
        expr(*s.value);
        s.slot = declare(s.name, s.line);
        break;
      case StmtKind::assign:
        expr(*s.target);
        expr(*s.value);
        break;
      case StmtKind::expr:
      case StmtKind::return_:
        if (s.value) expr(*s.value);
        break;
      case StmtKind::if_:
        expr(*s.value);
        block(s.body);
        block(s.orelse);
        break;
      case StmtKind::while_:
        expr(*s.value);
        ++loops_;
        block(s.body);
        --loops_;
        break;
      case StmtKind::for_:
        scopes_.emplace_back();
        statement(*s.init);
        expr(*s.value);
        statement(*s.step);
        ++loops_;
        block(s.body);
        --loops_;
        scopes_.pop_back();
        break;
      case StmtKind::break_:
      case StmtKind::continue_:
        if (loops_ == 0) throw CompileError(s.line + 1, "break or continue outside a loop");
        break;
    }
  }

  void expr(Expr& e) {
    for (ExprPtr& a : e.args) expr(*a);
    if (e.kind == ExprKind::variable) {
      e.slot = lookup(e.name, e.line);
    } else if (e.kind == ExprKind::call) {
      std::size_t arity;
      if (auto b = builtins().find(e.name); b != builtins().end()) {
        arity = b->second;
      } else if (auto u = index_.find(e.name); u != index_.end()) {
        e.callee = u->second;
        arity = fns_[static_cast<std::size_t>(u->second)].params.size();
      } else {
        throw CompileError(e.line + 1, "unknown function '" + e.name + "'");
      }
      if (arity != e.args.size()) {
        throw CompileError(e.line + 1, "'" + e.name + "' takes " + std::to_string(arity) +
                                           " argument(s), got " + std::to_string(e.args.size()));
      }
    }
  }

  std::vector<Function>& fns_;
  std::map<std::string, int> index_, tests_;
  std::vector<std::map<std::string, std::size_t>> scopes_;
  std::size_t next_slot_ = 0;
  int loops_ = 0;
};

// --------------------------------------------------------------- interpreter

struct Value;
using Array = std::shared_ptr<std::vector<Value>>;
struct Value {
  std::variant<std::int64_t, bool, Array> v;
};

struct RuntimeError {
  std::string message;
};

struct ReturnSignal {
  Value value;
};
enum class Flow { normal, broke, continued };

class Interpreter {
 public:
  Interpreter(const std::vector<Function>& fns, std::size_t step_limit)
      : fns_(fns), step_limit_(step_limit) {}

  Value call(const Function& f, std::vector<Value> args) {
    if (++depth_ > 200) throw RuntimeError{"recursion too deep"};
    std::vector<Value> frame(std::max<std::size_t>(f.slots, 1));
    for (std::size_t i = 0; i < args.size(); ++i) frame[i] = std::move(args[i]);
    Value result{std::int64_t{0}};
    try {
      run_block(f.body, frame);
    } catch (ReturnSignal& r) {
      result = std::move(r.value);
    }
    --depth_;
    return result;
  }

 private:
  void tick(std::size_t line) {
    if (++steps_ > step_limit_) {
      throw RuntimeError{"step limit exceeded at line " + std::to_string(line + 1)};
    }
  }

  static std::int64_t as_int(const Value& v, std::size_t line) {
    if (auto p = std::get_if<std::int64_t>(&v.v)) return *p;
    throw RuntimeError{"integer expected at line " + std::to_string(line + 1)};
  }
  static bool as_bool(const Value& v, std::size_t line) {
    if (auto p = std::get_if<bool>(&v.v)) return *p;
    throw RuntimeError{"boolean expected at line " + std::to_string(line + 1)};
  }
  static const Array& as_array(const Value& v, std::size_t line) {
    if (auto p = std::get_if<Array>(&v.v)) return *p;
    throw RuntimeError{"array expected at line " + std::to_string(line + 1)};
  }
  static std::size_t checked_index(const Array& a, std::int64_t i, std::size_t line) {
    if (i < 0 || static_cast<std::size_t>(i) >= a->size()) {
      throw RuntimeError{"index " + std::to_string(i) + " out of range at line " +
                         std::to_string(line + 1)};
    }
    return static_cast<std::size_t>(i);
  }
  static std::int64_t wrap(std::uint64_t x) { return static_cast<std::int64_t>(x); }

  static bool equal(const Value& a, const Value& b) {
    if (a.v.index() != b.v.index()) return false;
    if (auto p = std::get_if<Array>(&a.v)) {
      const auto& x = **p;
      const auto& y = *std::get<Array>(b.v);
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!equal(x[i], y[i])) return false;
      }
      return true;
    }
    return a.v == b.v;
  }

  std::int64_t arith(const std::string& op, std::int64_t a, std::int64_t b, std::size_t line) {
    const auto ua = static_cast<std::uint64_t>(a), ub = static_cast<std::uint64_t>(b);
    if (op == "+" || op == "+=") return wrap(ua + ub);
    if (op == "-" || op == "-=") return wrap(ua - ub);
    if (op == "*" || op == "*=") return wrap(ua * ub);
    if (b == 0) throw RuntimeError{"division by zero at line " + std::to_string(line + 1)};
    if (a == INT64_MIN && b == -1) return op == "/" ? a : 0;
    return op == "/" ? a / b : a % b;
  }

  Value eval(const Expr& e, std::vector<Value>& frame) {
    switch (e.kind) {
      case ExprKind::integer: return {e.value};
      case ExprKind::boolean: return {e.value != 0};
      case ExprKind::variable: return frame[e.slot];
      case ExprKind::array: {
        auto a = std::make_shared<std::vector<Value>>();
        for (const auto& x : e.args) a->push_back(eval(*x, frame));
        return {a};
      }
      case ExprKind::index: {
        const Value base = eval(*e.args[0], frame);
        const Array& a = as_array(base, e.line);
        return (*a)[checked_index(a, as_int(eval(*e.args[1], frame), e.line), e.line)];
      }
      case ExprKind::unary: {
        const Value x = eval(*e.args[0], frame);
        if (e.name == "!") return {!as_bool(x, e.line)};
        return {wrap(0 - static_cast<std::uint64_t>(as_int(x, e.line)))};
      }
      case ExprKind::binary: return binary(e, frame);
      case ExprKind::call: return call_expr(e, frame);
    }
    return {};
  }

  Value binary(const Expr& e, std::vector<Value>& frame) {
    const std::string& op = e.name;
    if (op == "&&" || op == "||") {
      const bool lhs = as_bool(eval(*e.args[0], frame), e.line);
      if (op == "&&" && !lhs) return {false};
      if (op == "||" && lhs) return {true};
      return {as_bool(eval(*e.args[1], frame), e.line)};
    }
    const Value a = eval(*e.args[0], frame);
    const Value b = eval(*e.args[1], frame);
    if (op == "==") return {equal(a, b)};
    if (op == "!=") return {!equal(a, b)};
    const std::int64_t x = as_int(a, e.line), y = as_int(b, e.line);
    if (op == "<") return {x < y};
    if (op == "<=") return {x <= y};
    if (op == ">") return {x > y};
    if (op == ">=") return {x >= y};
    return {arith(op, x, y, e.line)};
  }

  Value call_expr(const Expr& e, std::vector<Value>& frame) {
    std::vector<Value> args;
    args.reserve(e.args.size());
    for (const auto& a : e.args) args.push_back(eval(*a, frame));
    if (e.callee >= 0) return call(fns_[static_cast<std::size_t>(e.callee)], std::move(args));
    const std::string& n = e.name;
    if (n == "len") return {static_cast<std::int64_t>(as_array(args[0], e.line)->size())};
    if (n == "push") {
      as_array(args[0], e.line)->push_back(args[1]);
      return {std::int64_t{0}};
    }
    if (n == "check") {
      if (!as_bool(args[0], e.line)) {
        throw RuntimeError{"check failed at line " + std::to_string(e.line + 1)};
      }
      return {true};
    }
    if (n == "array") {
      const std::int64_t size = as_int(args[0], e.line);
      if (size < 0 || size > 100000) throw RuntimeError{"bad array size"};
      return {std::make_shared<std::vector<Value>>(static_cast<std::size_t>(size), args[1])};
    }
    if (n == "abs") {
      const std::int64_t x = as_int(args[0], e.line);
      return {x < 0 ? wrap(0 - static_cast<std::uint64_t>(x)) : x};
    }
    const std::int64_t x = as_int(args[0], e.line), y = as_int(args[1], e.line);
    return {n == "min" ? std::min(x, y) : std::max(x, y)};
  }

  void assign(const Stmt& s, std::vector<Value>& frame) {
    Value rhs = eval(*s.value, frame);
    Value* slot;
    Value container;  // keeps an indexed array alive
    if (s.target->kind == ExprKind::variable) {
      slot = &frame[s.target->slot];
    } else {
      container = eval(*s.target->args[0], frame);
      const Array& a = as_array(container, s.line);
      slot = &(*a)[checked_index(a, as_int(eval(*s.target->args[1], frame), s.line), s.line)];
    }
    if (s.name == "=") *slot = std::move(rhs);
    else *slot = {arith(s.name, as_int(*slot, s.line), as_int(rhs, s.line), s.line)};
  }

  Flow run_block(const Block& b, std::vector<Value>& frame) {
    for (const StmtPtr& s : b) {
      const Flow f = run(*s, frame);
      if (f != Flow::normal) return f;
    }
    return Flow::normal;
  }

  Flow run(const Stmt& s, std::vector<Value>& frame) {
    tick(s.line);
    switch (s.kind) {
      case StmtKind::let: frame[s.slot] = eval(*s.value, frame); return Flow::normal;
      case StmtKind::assign: assign(s, frame); return Flow::normal;
      case StmtKind::expr: eval(*s.value, frame); return Flow::normal;
      case StmtKind::return_:
        throw ReturnSignal{s.value ? eval(*s.value, frame) : Value{std::int64_t{0}}};
      case StmtKind::break_: return Flow::broke;
      case StmtKind::continue_: return Flow::continued;
      case StmtKind::if_:
        return as_bool(eval(*s.value, frame), s.line) ? run_block(s.body, frame)
                                                       : run_block(s.orelse, frame);
      case StmtKind::while_:
        while (as_bool(eval(*s.value, frame), s.line)) {
          tick(s.line);
          if (run_block(s.body, frame) == Flow::broke) break;
        }
        return Flow::normal;
      case StmtKind::for_:
        run(*s.init, frame);
        while (as_bool(eval(*s.value, frame), s.line)) {
          tick(s.line);
          if (run_block(s.body, frame) == Flow::broke) break;
          run(*s.step, frame);
        }
        return Flow::normal;
    }
    return Flow::normal;
  }

  const std::vector<Function>& fns_;
  std::size_t step_limit_;
  std::size_t steps_ = 0;
  int depth_ = 0;
};

std::vector<LexToken> lex(std::string_view source) {
  std::vector<LexToken> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    auto nl = source.find('\n', pos);
    if (nl == std::string_view::npos) nl = source.size();
    for (Token& t : tokenize(source.substr(pos, nl - pos), TokenizerConfig{})) {
      if (t.kind == TokenKind::comment_delim) {
        if (t.text == "//") break;
        throw CompileError(line_no + 1, "block comments are not supported");
      }
      if (t.kind == TokenKind::string_literal || t.kind == TokenKind::mask_sentinel) {
        throw CompileError(line_no + 1, "unexpected '" + t.text + "'");
      }
      out.push_back({std::move(t.text), t.kind, line_no});
    }
    pos = nl + 1;
    ++line_no;
  }
  return out;
}

}  // namespace

class Program {
 public:
  std::vector<Function> fns;
};

std::shared_ptr<const Program> compile(std::string_view source) {
  auto program = std::make_shared<Program>();
  program->fns = Parser(lex(source)).program();
  Checker(program->fns).run();
  return program;
}

std::vector<FunctionInfo> functions(const Program& program) {
  std::vector<FunctionInfo> out;
  for (const Function& f : program.fns) {
    if (!f.is_test) out.push_back({f.name, f.params.size(), f.first_line, f.last_line});
  }
  return out;
}

std::vector<FunctionInfo> tests(const Program& program) {
  std::vector<FunctionInfo> out;
  for (const Function& f : program.fns) {
    if (f.is_test) out.push_back({f.name, 0, f.first_line, f.last_line});
  }
  return out;
}

std::vector<TestResult> run_tests(const Program& program, std::size_t step_limit) {
  std::vector<TestResult> out;
  for (const Function& f : program.fns) {
    if (!f.is_test) continue;
    TestResult r{f.name, true, {}};
    try {
      Interpreter(program.fns, step_limit).call(f, {});
    } catch (const RuntimeError& e) {
      r.passed = false;
      r.reason = e.message;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_results(const std::vector<TestResult>& results) {
  std::string out;
  for (const TestResult& r : results) {
    out += r.passed ? "PASS " + r.name + "\n" : "FAIL " + r.name + ": " + r.reason + "\n";
  }
  return out;
}

}  // namespace clozefix::mini
