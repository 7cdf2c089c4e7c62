#include "lsr/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace lsr::expr {

namespace {

constexpr double kKinkTol = 1e-12;

struct FunctionInfo {
  std::string_view name;
  int arity;
  UnaryOp unary;
  BinaryOp binary;
};

constexpr FunctionInfo kFunctions[] = {
    {"tanh", 1, UnaryOp::Tanh, BinaryOp::Add}, {"sech", 1, UnaryOp::Sech, BinaryOp::Add},
    {"sin", 1, UnaryOp::Sin, BinaryOp::Add},   {"cos", 1, UnaryOp::Cos, BinaryOp::Add},
    {"exp", 1, UnaryOp::Exp, BinaryOp::Add},   {"log", 1, UnaryOp::Log, BinaryOp::Add},
    {"sqrt", 1, UnaryOp::Sqrt, BinaryOp::Add}, {"abs", 1, UnaryOp::Abs, BinaryOp::Add},
    {"min", 2, UnaryOp::Neg, BinaryOp::Min},   {"max", 2, UnaryOp::Neg, BinaryOp::Max},
};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

std::string_view unary_name(UnaryOp op) {
  for (const auto& f : kFunctions)
    if (f.arity == 1 && f.unary == op) return f.name;
  return "-";
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Semi, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) return t;

    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number(t);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    t.text = std::string(1, c);
    switch (c) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case ',': t.kind = Tok::Comma; break;
      case ';': t.kind = Tok::Semi; break;
      default:
        throw ParseFailure(t.line, t.column, {}, "unexpected character '" + t.text + "'");
    }
    advance();
    return t;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token lex_number(Token t) {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save_pos = pos_;
      const int save_col = column_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save_pos;
        column_ = save_col;
      }
    }
    t.kind = Tok::Number;
    t.text = std::string(src_.substr(start, pos_ - start));
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, t.number);
    if (ec != std::errc() || ptr != last || !std::isfinite(t.number))
      throw ParseFailure(t.line, t.column, {"number"}, "malformed number '" + t.text + "'");
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, const Variables& vars) : lexer_(src), vars_(vars) { bump(); }

  std::vector<Ast> parse_list() {
    std::vector<Ast> out;
    if (cur_.kind == Tok::End) fail_expected({"expression"});
    for (;;) {
      out.push_back(parse_component());
      if (cur_.kind == Tok::Semi) {
        bump();
        if (cur_.kind == Tok::End) break;
        continue;
      }
      if (cur_.kind == Tok::End) break;
      fail_expected({"+", "-", "*", "/", "^", ";", "end of input"});
    }
    return out;
  }

  Ast parse_one() {
    if (cur_.kind == Tok::End) fail_expected({"expression"});
    Ast a = parse_component();
    if (cur_.kind != Tok::End) fail_expected({"+", "-", "*", "/", "^", "end of input"});
    return a;
  }

 private:
  Ast parse_component() {
    nodes_.clear();
    parse_expr();
    return Ast(std::move(nodes_));
  }

  void bump() { cur_ = lexer_.next(); }

  [[noreturn]] void fail_expected(std::vector<std::string> expected) {
    std::ostringstream msg;
    msg << "line " << cur_.line << ", column " << cur_.column << ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? ", " : "") << expected[i];
    msg << "; found " << describe(cur_);
    throw ParseFailure(cur_.line, cur_.column, std::move(expected), msg.str());
  }

  int push(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int push_binary(BinaryOp op, int lhs, int rhs, double value = 0.0) {
    Node n;
    n.kind = NodeKind::Binary;
    n.binary = op;
    n.lhs = lhs;
    n.rhs = rhs;
    n.value = value;
    return push(n);
  }

  int push_unary(UnaryOp op, int child) {
    Node n;
    n.kind = NodeKind::Unary;
    n.unary = op;
    n.lhs = child;
    return push(n);
  }

  int parse_expr() {
    int lhs = parse_term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const BinaryOp op = cur_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      bump();
      const int rhs = parse_term();
      lhs = push_binary(op, lhs, rhs);
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_unary();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const BinaryOp op = cur_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      bump();
      const int rhs = parse_unary();
      lhs = push_binary(op, lhs, rhs);
    }
    return lhs;
  }

  int parse_unary() {
    if (cur_.kind == Tok::Minus) {
      bump();
      const int child = parse_unary();
      return push_unary(UnaryOp::Neg, child);
    }
    if (cur_.kind == Tok::Plus) {
      bump();
      return parse_unary();
    }
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (cur_.kind != Tok::Caret) return base;
    bump();
    if (cur_.kind != Tok::Number || cur_.number != std::floor(cur_.number) || cur_.number > 1e6)
      fail_expected({"nonnegative integer exponent"});
    const double k = cur_.number;
    bump();
    return push_binary(BinaryOp::Pow, base, -1, k);
  }

  int parse_primary() {
    switch (cur_.kind) {
      case Tok::Number: {
        Node n;
        n.kind = NodeKind::Constant;
        n.value = cur_.number;
        bump();
        return push(n);
      }
      case Tok::LParen: {
        bump();
        const int inner = parse_expr();
        expect(Tok::RParen, ")");
        return inner;
      }
      case Tok::Ident: return parse_identifier();
      default: fail_expected({"number", "identifier", "(", "-"});
    }
  }

  int parse_identifier() {
    const Token id = cur_;
    bump();
    if (cur_.kind == Tok::LParen) {
      const FunctionInfo* f = find_function(id.text);
      if (!f)
        throw Error(ErrorCode::UnknownIdentifier,
                    "UnknownIdentifier: line " + std::to_string(id.line) + ", column " +
                        std::to_string(id.column) + ": unknown function '" + id.text + "'");
      bump();
      const int a = parse_expr();
      if (f->arity == 1) {
        expect(Tok::RParen, ")");
        return push_unary(f->unary, a);
      }
      expect(Tok::Comma, ",");
      const int b = parse_expr();
      expect(Tok::RParen, ")");
      return push_binary(f->binary, a, b);
    }
    for (int slot = 0; slot < vars_.size(); ++slot) {
      if (vars_.names[static_cast<std::size_t>(slot)] == id.text) {
        Node n;
        n.kind = NodeKind::Variable;
        n.slot = slot;
        return push(n);
      }
    }
    throw Error(ErrorCode::UnknownIdentifier,
                "UnknownIdentifier: line " + std::to_string(id.line) + ", column " +
                    std::to_string(id.column) + ": unknown identifier '" + id.text + "'");
  }

  void expect(Tok kind, const char* text) {
    if (cur_.kind != kind) fail_expected({text});
    bump();
  }

  Lexer lexer_;
  const Variables& vars_;
  Token cur_;
  std::vector<Node> nodes_;
};

void print_node(const Ast& ast, int idx, const Variables& vars, std::string& out) {
  const Node& n = ast.nodes()[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case NodeKind::Constant: {
      char buf[32];
      // Negative constants only arise from programmatic construction; they
      // print as a negation.
      if (n.value < 0.0) {
        std::snprintf(buf, sizeof buf, "(-%.17g)", -n.value);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
      }
      out += buf;
      return;
    }
    case NodeKind::Variable:
      out += vars.names.at(static_cast<std::size_t>(n.slot));
      return;
    case NodeKind::Unary:
      if (n.unary == UnaryOp::Neg) {
        out += "(-";
        print_node(ast, n.lhs, vars, out);
        out += ")";
      } else {
        out += unary_name(n.unary);
        out += "(";
        print_node(ast, n.lhs, vars, out);
        out += ")";
      }
      return;
    case NodeKind::Binary: {
      if (n.binary == BinaryOp::Min || n.binary == BinaryOp::Max) {
        out += n.binary == BinaryOp::Min ? "min(" : "max(";
        print_node(ast, n.lhs, vars, out);
        out += ", ";
        print_node(ast, n.rhs, vars, out);
        out += ")";
        return;
      }
      if (n.binary == BinaryOp::Pow) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        out += "(";
        print_node(ast, n.lhs, vars, out);
        out += "^";
        out += buf;
        out += ")";
        return;
      }
      const char* sym = n.binary == BinaryOp::Add   ? " + "
                        : n.binary == BinaryOp::Sub ? " - "
                        : n.binary == BinaryOp::Mul ? " * "
                                                    : " / ";
      out += "(";
      print_node(ast, n.lhs, vars, out);
      out += sym;
      print_node(ast, n.rhs, vars, out);
      out += ")";
      return;
    }
  }
}

std::string subexpression(const Ast& ast, int idx) {
  // Slots print as generic names; the caller's variable table is not needed
  // to locate the offending term.
  Variables generic;
  int top = -1;
  for (const auto& n : ast.nodes())
    if (n.kind == NodeKind::Variable) top = std::max(top, n.slot);
  for (int i = 0; i <= top; ++i) generic.names.push_back("v" + std::to_string(i + 1));
  std::vector<Node> prefix(ast.nodes().begin(), ast.nodes().begin() + idx + 1);
  std::string out;
  print_node(Ast(std::move(prefix)), idx, generic, out);
  return out;
}

[[noreturn]] void domain_error(const Ast& ast, int idx, const std::string& what) {
  fail(ErrorCode::DomainError, what + " in '" + subexpression(ast, idx) + "'");
}

double ipow(double base, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= base;
  return r;
}

double apply_unary(const Ast& ast, int idx, UnaryOp op, double a) {
  switch (op) {
    case UnaryOp::Neg: return -a;
    case UnaryOp::Tanh: return std::tanh(a);
    case UnaryOp::Sech: return sech(a);
    case UnaryOp::Sin: return std::sin(a);
    case UnaryOp::Cos: return std::cos(a);
    case UnaryOp::Exp: return std::exp(a);
    case UnaryOp::Log:
      if (!(a > 0.0)) domain_error(ast, idx, "log of nonpositive value");
      return std::log(a);
    case UnaryOp::Sqrt:
      if (a < 0.0) domain_error(ast, idx, "sqrt of negative value");
      return std::sqrt(a);
    case UnaryOp::Abs: return std::abs(a);
  }
  return a;
}

double apply_binary(const Ast& ast, int idx, const Node& n, double a, double b) {
  switch (n.binary) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div:
      if (b == 0.0) domain_error(ast, idx, "division by zero");
      return a / b;
    case BinaryOp::Pow: return ipow(a, static_cast<int>(n.value));
    case BinaryOp::Min: return std::min(a, b);
    case BinaryOp::Max: return std::max(a, b);
  }
  return a;
}

}  // namespace

ParseFailure::ParseFailure(int line, int column, std::vector<std::string> expected,
                           const std::string& message)
    : Error(ErrorCode::ParseError, "ParseError: " + message),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

Variables state_and_parameters(int n, int m) {
  Variables v;
  v.n_state = n;
  for (int i = 1; i <= n; ++i) v.names.push_back("x" + std::to_string(i));
  for (int j = 1; j <= m; ++j) v.names.push_back("l" + std::to_string(j));
  return v;
}

std::vector<Ast> parse(std::string_view source, int n, int m) {
  if (n < 1 || m < 0) fail(ErrorCode::InvalidArgument, "need n >= 1 and m >= 0");
  auto asts = parse_list(source, state_and_parameters(n, m));
  if (static_cast<int>(asts.size()) != n)
    fail(ErrorCode::ArityError, "expected " + std::to_string(n) + " components, found " +
                                    std::to_string(asts.size()));
  return asts;
}

std::vector<Ast> parse_list(std::string_view source, const Variables& vars) {
  Parser p(source, vars);
  return p.parse_list();
}

Ast parse_single(std::string_view source, const Variables& vars) {
  Parser p(source, vars);
  return p.parse_one();
}

std::string to_string(const Ast& ast, const Variables& vars) {
  std::string out;
  if (ast.size() > 0) print_node(ast, ast.root(), vars, out);
  return out;
}

int max_slot(const Ast& ast) noexcept {
  int top = -1;
  for (const auto& n : ast.nodes())
    if (n.kind == NodeKind::Variable) top = std::max(top, n.slot);
  return top;
}

double evaluate(const Ast& ast, std::span<const double> values) {
  const auto& nodes = ast.nodes();
  std::vector<double> v(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    const int idx = static_cast<int>(i);
    switch (n.kind) {
      case NodeKind::Constant: v[i] = n.value; break;
      case NodeKind::Variable: v[i] = values[static_cast<std::size_t>(n.slot)]; break;
      case NodeKind::Unary:
        v[i] = apply_unary(ast, idx, n.unary, v[static_cast<std::size_t>(n.lhs)]);
        break;
      case NodeKind::Binary:
        v[i] = apply_binary(ast, idx, n, v[static_cast<std::size_t>(n.lhs)],
                            n.rhs >= 0 ? v[static_cast<std::size_t>(n.rhs)] : 0.0);
        break;
    }
  }
  return v.back();
}

DualVector eval_dual(const Ast& ast, std::span<const double> values) {
  const auto& nodes = ast.nodes();
  const Eigen::Index k = static_cast<Eigen::Index>(values.size());
  std::vector<double> v(nodes.size());
  Matrix d(k, static_cast<Eigen::Index>(nodes.size()));

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    const int idx = static_cast<int>(i);
    auto col = d.col(static_cast<Eigen::Index>(i));
    switch (n.kind) {
      case NodeKind::Constant:
        v[i] = n.value;
        col.setZero();
        break;
      case NodeKind::Variable:
        v[i] = values[static_cast<std::size_t>(n.slot)];
        col.setZero();
        col(n.slot) = 1.0;
        break;
      case NodeKind::Unary: {
        const double a = v[static_cast<std::size_t>(n.lhs)];
        const auto da = d.col(n.lhs);
        v[i] = apply_unary(ast, idx, n.unary, a);
        switch (n.unary) {
          case UnaryOp::Neg: col = -da; break;
          case UnaryOp::Tanh: {
            const double s = sech(a);
            col = (s * s) * da;
            break;
          }
          case UnaryOp::Sech: col = (-v[i] * std::tanh(a)) * da; break;
          case UnaryOp::Sin: col = std::cos(a) * da; break;
          case UnaryOp::Cos: col = -std::sin(a) * da; break;
          case UnaryOp::Exp: col = v[i] * da; break;
          case UnaryOp::Log: col = da / a; break;
          case UnaryOp::Sqrt:
            if (!(a > 0.0)) domain_error(ast, idx, "sqrt is not differentiable at 0");
            col = da / (2.0 * v[i]);
            break;
          case UnaryOp::Abs:
            if (std::abs(a) <= kKinkTol) domain_error(ast, idx, "abs is not differentiable at its kink");
            col = (a > 0.0 ? 1.0 : -1.0) * da;
            break;
        }
        break;
      }
      case NodeKind::Binary: {
        const double a = v[static_cast<std::size_t>(n.lhs)];
        const auto da = d.col(n.lhs);
        const double b = n.rhs >= 0 ? v[static_cast<std::size_t>(n.rhs)] : 0.0;
        v[i] = apply_binary(ast, idx, n, a, b);
        if (n.binary == BinaryOp::Pow) {
          const int p = static_cast<int>(n.value);
          if (p == 0) {
            col.setZero();
          } else {
            col = (p * ipow(a, p - 1)) * da;
          }
          break;
        }
        const auto db = d.col(n.rhs);
        switch (n.binary) {
          case BinaryOp::Add: col = da + db; break;
          case BinaryOp::Sub: col = da - db; break;
          case BinaryOp::Mul: col = da * b + a * db; break;
          case BinaryOp::Div: col = (da * b - a * db) / (b * b); break;
          case BinaryOp::Min:
          case BinaryOp::Max: {
            if (std::abs(a - b) <= kKinkTol)
              domain_error(ast, idx, "min/max is not differentiable where its arguments meet");
            const bool take_a = (n.binary == BinaryOp::Min) == (a < b);
            col = take_a ? Vector(da) : Vector(db);
            break;
          }
          case BinaryOp::Pow: break;
        }
        break;
      }
    }
  }
  return {v.back(), d.col(static_cast<Eigen::Index>(nodes.size()) - 1)};
}

DualEvaluation eval_dual(const std::vector<Ast>& components, const Vector& x, const Vector& lambda) {
  const Eigen::Index n = x.size();
  const Eigen::Index m = lambda.size();
  if (static_cast<Eigen::Index>(components.size()) != n)
    fail(ErrorCode::DimensionMismatch, "component count differs from state dimension");
  std::vector<double> values(static_cast<std::size_t>(n + m));
  for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = x(i);
  for (Eigen::Index j = 0; j < m; ++j) values[static_cast<std::size_t>(n + j)] = lambda(j);

  DualEvaluation out{Vector(n), Matrix(n, n), Matrix(n, m)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const DualVector r = eval_dual(components[static_cast<std::size_t>(i)], values);
    out.value(i) = r.value;
    out.jac_x.row(i) = r.partials.head(n).transpose();
    out.jac_lambda.row(i) = r.partials.tail(m).transpose();
  }
  return out;
}

}  // namespace lsr::expr
