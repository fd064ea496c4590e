#include "pxlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>

namespace pxlab::expr {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

NodePtr make_node(auto&& payload) {
  return std::make_shared<const Node>(Node{std::forward<decltype(payload)>(payload)});
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += items[i];
  }
  return out;
}

struct FunctionInfo {
  std::string_view name;
  Function function;
  int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"sin", Function::Sin, 1},   {"cos", Function::Cos, 1},
    {"exp", Function::Exp, 1},   {"log", Function::Log, 1},
    {"sqrt", Function::Sqrt, 1}, {"abs", Function::Abs, 1},
    {"min", Function::Min, 2},   {"max", Function::Max, 2},
};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& info : kFunctions) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

std::string_view function_name(Function f) {
  for (const auto& info : kFunctions) {
    if (info.function == f) return info.name;
  }
  return "?";
}

// ---------------------------------------------------------------- lexer

enum class TokenKind { Number, Identifier, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  TokenKind kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i - start == 1 && c == '.') {
        throw ParseError("malformed number", start, {"digit"});
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j >= src.size() || !std::isdigit(static_cast<unsigned char>(src[j]))) {
          throw ParseError("malformed exponent in number", j, {"digit"});
        }
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        i = j;
      }
      const std::string text(src.substr(start, i - start));
      tokens.push_back({TokenKind::Number, start, src.substr(start, i - start), std::strtod(text.c_str(), nullptr)});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      tokens.push_back({TokenKind::Identifier, start, src.substr(start, i - start)});
      continue;
    }
    TokenKind kind;
    switch (c) {
      case '+': kind = TokenKind::Plus; break;
      case '-': kind = TokenKind::Minus; break;
      case '*': kind = TokenKind::Star; break;
      case '/': kind = TokenKind::Slash; break;
      case '^': kind = TokenKind::Caret; break;
      case '(': kind = TokenKind::LParen; break;
      case ')': kind = TokenKind::RParen; break;
      case ',': kind = TokenKind::Comma; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", start,
                         {"number", "identifier", "operator", "'('", "')'", "','"});
    }
    tokens.push_back({kind, start, src.substr(start, 1)});
    ++i;
  }
  tokens.push_back({TokenKind::End, src.size(), {}});
  return tokens;
}

// --------------------------------------------------------------- parser

class Parser {
 public:
  Parser(std::vector<Token> tokens, int dimension) : tokens_(std::move(tokens)), dimension_(dimension) {}

  NodePtr parse() {
    NodePtr root = parse_expr();
    if (peek().kind != TokenKind::End) {
      fail("unexpected token '" + std::string(peek().text) + "'", {"operator", "end of input"});
    }
    return root;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected) const {
    throw ParseError(message, peek().offset, std::move(expected));
  }

  static std::vector<std::string> operand_set() { return {"number", "identifier", "'('", "'-'", "'+'"}; }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus) {
      const BinaryOp op = advance().kind == TokenKind::Plus ? BinaryOp::Add : BinaryOp::Subtract;
      lhs = make_node(Binary{op, lhs, parse_term()});
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (peek().kind == TokenKind::Star || peek().kind == TokenKind::Slash) {
      const BinaryOp op = advance().kind == TokenKind::Star ? BinaryOp::Multiply : BinaryOp::Divide;
      lhs = make_node(Binary{op, lhs, parse_unary()});
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (peek().kind == TokenKind::Minus) {
      advance();
      return make_node(Negate{parse_unary()});
    }
    if (peek().kind == TokenKind::Plus) {
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (peek().kind == TokenKind::Caret) {
      advance();
      return make_node(Binary{BinaryOp::Power, base, parse_unary()});
    }
    return base;
  }

  NodePtr parse_primary() {
    const Token& tok = peek();
    switch (tok.kind) {
      case TokenKind::Number:
        advance();
        return make_node(Number{tok.number});
      case TokenKind::LParen: {
        advance();
        NodePtr inner = parse_expr();
        if (peek().kind != TokenKind::RParen) fail("expected ')'", {"')'", "operator"});
        advance();
        return inner;
      }
      case TokenKind::Identifier:
        return parse_identifier();
      default:
        fail(tok.kind == TokenKind::End ? "unexpected end of input"
                                        : "unexpected token '" + std::string(tok.text) + "'",
             operand_set());
    }
  }

  NodePtr parse_identifier() {
    const Token tok = advance();
    const std::string_view name = tok.text;
    if (const FunctionInfo* info = find_function(name)) {
      if (peek().kind != TokenKind::LParen) fail("expected '(' after function name", {"'('"});
      advance();
      std::vector<NodePtr> args;
      args.push_back(parse_expr());
      while (peek().kind == TokenKind::Comma) {
        advance();
        args.push_back(parse_expr());
      }
      if (peek().kind != TokenKind::RParen) fail("expected ')' or ','", {"')'", "','", "operator"});
      advance();
      if (static_cast<int>(args.size()) != info->arity) {
        throw ParseError(std::string(name) + " expects " + std::to_string(info->arity) + " argument(s), got " +
                             std::to_string(args.size()),
                         tok.offset);
      }
      return make_node(Call{info->function, std::move(args)});
    }
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t k = 1; k < name.size(); ++k) digits = digits && std::isdigit(static_cast<unsigned char>(name[k]));
      if (digits && name[1] != '0') {
        const int index = std::atoi(std::string(name.substr(1)).c_str());
        if (index > dimension_) {
          throw ParseError("variable " + std::string(name) + " exceeds dimension " + std::to_string(dimension_),
                           tok.offset);
        }
        return make_node(Variable{index - 1});
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", tok.offset);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int dimension_;
};

// -------------------------------------------------------------- printer

// Binding strength used for parenthesization.
constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecUnary = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int precedence(const Node& n) {
  return std::visit(Overloaded{
                        [](const Number& num) { return num.value < 0 ? kPrecUnary : kPrecAtom; },
                        [](const Variable&) { return kPrecAtom; },
                        [](const Negate&) { return kPrecUnary; },
                        [](const Binary& b) {
                          switch (b.op) {
                            case BinaryOp::Add:
                            case BinaryOp::Subtract: return kPrecAdd;
                            case BinaryOp::Multiply:
                            case BinaryOp::Divide: return kPrecMul;
                            case BinaryOp::Power: return kPrecPow;
                          }
                          return kPrecAtom;
                        },
                        [](const Call&) { return kPrecAtom; },
                    },
                    n.data);
}

void print(const Node& n, std::string& out);

void print_wrapped(const Node& n, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(n, out);
  if (wrap) out += ')';
}

void print(const Node& n, std::string& out) {
  std::visit(Overloaded{
                 [&](const Number& num) { out += format_number(num.value); },
                 [&](const Variable& v) { out += "x" + std::to_string(v.index + 1); },
                 [&](const Negate& neg) {
                   out += '-';
                   print_wrapped(*neg.operand, precedence(*neg.operand) < kPrecUnary, out);
                 },
                 [&](const Binary& b) {
                   const int own = precedence(n);
                   const int lp = precedence(*b.lhs);
                   const int rp = precedence(*b.rhs);
                   if (b.op == BinaryOp::Power) {
                     print_wrapped(*b.lhs, lp <= kPrecPow, out);
                     out += '^';
                     print_wrapped(*b.rhs, rp < kPrecAtom, out);
                     return;
                   }
                   print_wrapped(*b.lhs, lp < own, out);
                   switch (b.op) {
                     case BinaryOp::Add: out += " + "; break;
                     case BinaryOp::Subtract: out += " - "; break;
                     case BinaryOp::Multiply: out += '*'; break;
                     case BinaryOp::Divide: out += '/'; break;
                     case BinaryOp::Power: break;
                   }
                   // Left-associative: an equal-precedence right operand needs parentheses.
                   print_wrapped(*b.rhs, rp <= own, out);
                 },
                 [&](const Call& c) {
                   out += function_name(c.function);
                   out += '(';
                   for (std::size_t i = 0; i < c.args.size(); ++i) {
                     if (i > 0) out += ", ";
                     print(*c.args[i], out);
                   }
                   out += ')';
                 },
             },
             n.data);
}

std::string node_text(const Node& n) {
  std::string s;
  print(n, s);
  return s;
}

// ------------------------------------------------------------ evaluator

double checked(double value, const Node& n, const char* what) {
  if (!std::isfinite(value)) throw DomainError(std::string(what) + " produced a non-finite value", node_text(n));
  return value;
}

double eval(const Node& n, std::span<const double> x) {
  return std::visit(
      Overloaded{
          [&](const Number& num) { return num.value; },
          [&](const Variable& v) { return x[static_cast<std::size_t>(v.index)]; },
          [&](const Negate& neg) { return -eval(*neg.operand, x); },
          [&](const Binary& b) {
            const double l = eval(*b.lhs, x);
            const double r = eval(*b.rhs, x);
            switch (b.op) {
              case BinaryOp::Add: return checked(l + r, n, "addition");
              case BinaryOp::Subtract: return checked(l - r, n, "subtraction");
              case BinaryOp::Multiply: return checked(l * r, n, "multiplication");
              case BinaryOp::Divide:
                if (r == 0.0) throw DomainError("division by zero", node_text(n));
                return checked(l / r, n, "division");
              case BinaryOp::Power: return checked(std::pow(l, r), n, "power");
            }
            return 0.0;
          },
          [&](const Call& c) {
            const double a = eval(*c.args[0], x);
            switch (c.function) {
              case Function::Sin: return std::sin(a);
              case Function::Cos: return std::cos(a);
              case Function::Exp: return checked(std::exp(a), n, "exp");
              case Function::Log:
                if (a <= 0.0) throw DomainError("log of a nonpositive value", node_text(n));
                return std::log(a);
              case Function::Sqrt:
                if (a < 0.0) throw DomainError("sqrt of a negative value", node_text(n));
                return std::sqrt(a);
              case Function::Abs: return std::abs(a);
              case Function::Min: return std::min(a, eval(*c.args[1], x));
              case Function::Max: return std::max(a, eval(*c.args[1], x));
            }
            return 0.0;
          },
      },
      n.data);
}

// ------------------------------------------------------------- builders

std::optional<double> literal(const NodePtr& n) {
  if (const auto* num = std::get_if<Number>(&n->data)) return num->value;
  return std::nullopt;
}

bool is_literal(const NodePtr& n, double v) {
  const auto lit = literal(n);
  return lit && *lit == v;
}

NodePtr number(double v) { return make_node(Number{v}); }

NodePtr fold_or(NodePtr candidate) {
  // Fold when every operand is a literal and the value is finite.
  bool all_literal = std::visit(Overloaded{
                                    [](const Number&) { return false; },
                                    [](const Variable&) { return false; },
                                    [](const Negate& g) { return literal(g.operand).has_value(); },
                                    [](const Binary& b) { return literal(b.lhs) && literal(b.rhs); },
                                    [](const Call& c) {
                                      for (const auto& a : c.args)
                                        if (!literal(a)) return false;
                                      return true;
                                    },
                                },
                                candidate->data);
  if (!all_literal) return candidate;
  try {
    const double v = eval(*candidate, {});
    if (std::isfinite(v)) return number(v);
  } catch (const DomainError&) {
  }
  return candidate;
}

NodePtr add(NodePtr a, NodePtr b) {
  if (is_literal(a, 0.0)) return b;
  if (is_literal(b, 0.0)) return a;
  return fold_or(make_node(Binary{BinaryOp::Add, std::move(a), std::move(b)}));
}

NodePtr negate(NodePtr a) {
  if (const auto lit = literal(a)) return number(-*lit);
  if (const auto* neg = std::get_if<Negate>(&a->data)) return neg->operand;
  return make_node(Negate{std::move(a)});
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_literal(b, 0.0)) return a;
  if (is_literal(a, 0.0)) return negate(std::move(b));
  return fold_or(make_node(Binary{BinaryOp::Subtract, std::move(a), std::move(b)}));
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_literal(a, 0.0) || is_literal(b, 0.0)) return number(0.0);
  if (is_literal(a, 1.0)) return b;
  if (is_literal(b, 1.0)) return a;
  if (is_literal(a, -1.0)) return negate(std::move(b));
  if (is_literal(b, -1.0)) return negate(std::move(a));
  return fold_or(make_node(Binary{BinaryOp::Multiply, std::move(a), std::move(b)}));
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_literal(b, 1.0)) return a;
  if (is_literal(a, 0.0) && !is_literal(b, 0.0)) return number(0.0);
  return fold_or(make_node(Binary{BinaryOp::Divide, std::move(a), std::move(b)}));
}

NodePtr power(NodePtr a, NodePtr b) {
  if (is_literal(b, 1.0)) return a;
  if (is_literal(b, 0.0)) return number(1.0);
  return fold_or(make_node(Binary{BinaryOp::Power, std::move(a), std::move(b)}));
}

NodePtr call(Function f, NodePtr a) { return fold_or(make_node(Call{f, {std::move(a)}})); }

bool depends_on(const Node& n, int var) {
  return std::visit(Overloaded{
                        [](const Number&) { return false; },
                        [&](const Variable& v) { return v.index == var; },
                        [&](const Negate& g) { return depends_on(*g.operand, var); },
                        [&](const Binary& b) { return depends_on(*b.lhs, var) || depends_on(*b.rhs, var); },
                        [&](const Call& c) {
                          for (const auto& a : c.args)
                            if (depends_on(*a, var)) return true;
                          return false;
                        },
                    },
                    n.data);
}

const Call* find_nondifferentiable(const Node& n) {
  return std::visit(Overloaded{
                        [](const Number&) -> const Call* { return nullptr; },
                        [](const Variable&) -> const Call* { return nullptr; },
                        [](const Negate& g) { return find_nondifferentiable(*g.operand); },
                        [](const Binary& b) {
                          const Call* c = find_nondifferentiable(*b.lhs);
                          return c ? c : find_nondifferentiable(*b.rhs);
                        },
                        [](const Call& c) -> const Call* {
                          if (c.function == Function::Abs || c.function == Function::Min ||
                              c.function == Function::Max)
                            return &c;
                          for (const auto& a : c.args)
                            if (const Call* inner = find_nondifferentiable(*a)) return inner;
                          return nullptr;
                        },
                    },
                    n.data);
}

NodePtr derive(const NodePtr& node, int var) {
  if (!depends_on(*node, var)) return number(0.0);
  return std::visit(
      Overloaded{
          [](const Number&) { return number(0.0); },
          [&](const Variable& v) { return number(v.index == var ? 1.0 : 0.0); },
          [&](const Negate& g) { return negate(derive(g.operand, var)); },
          [&](const Binary& b) {
            const NodePtr& u = b.lhs;
            const NodePtr& w = b.rhs;
            switch (b.op) {
              case BinaryOp::Add: return add(derive(u, var), derive(w, var));
              case BinaryOp::Subtract: return sub(derive(u, var), derive(w, var));
              case BinaryOp::Multiply: return add(mul(derive(u, var), w), mul(u, derive(w, var)));
              case BinaryOp::Divide:
                return sub(div(derive(u, var), w), div(mul(u, derive(w, var)), power(w, number(2.0))));
              case BinaryOp::Power:
                if (!depends_on(*w, var)) {
                  // d(u^c) = c u^(c-1) du
                  return mul(mul(w, power(u, sub(w, number(1.0)))), derive(u, var));
                }
                if (!depends_on(*u, var)) {
                  return mul(mul(node, call(Function::Log, u)), derive(w, var));
                }
                return mul(node, add(mul(derive(w, var), call(Function::Log, u)),
                                     div(mul(w, derive(u, var)), u)));
            }
            return number(0.0);
          },
          [&](const Call& c) {
            const NodePtr& a = c.args[0];
            const NodePtr da = derive(a, var);
            switch (c.function) {
              case Function::Sin: return mul(call(Function::Cos, a), da);
              case Function::Cos: return negate(mul(call(Function::Sin, a), da));
              case Function::Exp: return mul(node, da);
              case Function::Log: return div(da, a);
              case Function::Sqrt: return div(da, mul(number(2.0), node));
              case Function::Abs:
              case Function::Min:
              case Function::Max: break;
            }
            throw NotDifferentiable("non-differentiable function " + std::string(function_name(c.function)));
          },
      },
      node->data);
}

void check_same_dimension(const Expression& a, const Expression& b) {
  if (a.dimension() != b.dimension()) throw PreconditionError("expressions of different dimensions combined");
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t offset, std::vector<std::string> expected)
    : Error("parse error at offset " + std::to_string(offset) + ": " + message +
            (expected.empty() ? std::string() : " (expected " + join(expected) + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

DomainError::DomainError(const std::string& message, std::string subexpression)
    : Error("domain error: " + message + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

Expression::Expression(NodePtr root, int dimension) : root_(std::move(root)), dimension_(dimension) {
  if (!root_) throw PreconditionError("expression root is null");
  if (dimension_ < 1 || dimension_ > 3) throw PreconditionError("expression dimension must be 1..3");
}

Expression Expression::constant(double value, int dimension) { return {number(value), dimension}; }

Expression Expression::variable(int index, int dimension) {
  if (index < 0 || index >= dimension) throw PreconditionError("variable index outside dimension");
  return {make_node(Variable{index}), dimension};
}

bool Expression::is_constant(double* value) const {
  const auto lit = literal(root_);
  if (lit && value) *value = *lit;
  return lit.has_value();
}

Expression parse_expression(std::string_view source, int dimension) {
  if (dimension != 2 && dimension != 3) throw PreconditionError("expression dimension must be 2 or 3");
  bool blank = true;
  for (char c : source) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) throw ParseError("empty expression", 0, {"number", "identifier", "'('", "'-'"});
  Parser parser(tokenize(source), dimension);
  return {parser.parse(), dimension};
}

double evaluate(const Expression& e, std::span<const double> point) {
  if (static_cast<int>(point.size()) < e.dimension()) {
    throw PreconditionError("point has " + std::to_string(point.size()) + " coordinates, expression needs " +
                            std::to_string(e.dimension()));
  }
  return eval(*e.root(), point);
}

Expression differentiate(const Expression& e, int variable_index) {
  if (variable_index < 0 || variable_index >= e.dimension()) {
    throw PreconditionError("differentiation variable outside dimension");
  }
  if (const Call* bad = find_nondifferentiable(*e.root())) {
    throw NotDifferentiable("cannot differentiate " + std::string(function_name(bad->function)));
  }
  return {derive(e.root(), variable_index), e.dimension()};
}

std::string to_string(const Expression& e) { return node_text(*e.root()); }

Expression operator+(const Expression& a, const Expression& b) {
  check_same_dimension(a, b);
  return {add(a.root(), b.root()), a.dimension()};
}
Expression operator-(const Expression& a, const Expression& b) {
  check_same_dimension(a, b);
  return {sub(a.root(), b.root()), a.dimension()};
}
Expression operator*(const Expression& a, const Expression& b) {
  check_same_dimension(a, b);
  return {mul(a.root(), b.root()), a.dimension()};
}
Expression operator/(const Expression& a, const Expression& b) {
  check_same_dimension(a, b);
  return {div(a.root(), b.root()), a.dimension()};
}
Expression operator-(const Expression& a) { return {negate(a.root()), a.dimension()}; }
Expression pow(const Expression& base, const Expression& exponent) {
  check_same_dimension(base, exponent);
  return {power(base.root(), exponent.root()), base.dimension()};
}
Expression apply(Function f, const Expression& arg) {
  if (f == Function::Min || f == Function::Max) throw PreconditionError("apply() takes one-argument functions");
  return {call(f, arg.root()), arg.dimension()};
}

}  // namespace pxlab::expr
