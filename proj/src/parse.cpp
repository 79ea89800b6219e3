#include "seqgrad/parse.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace seqgrad {

namespace {

struct Parser {
  const std::string& text;
  int arity;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at offset " + std::to_string(pos) + " in \"" + text + "\"");
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  int parse_int() {
    skip_ws();
    size_t start = pos;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) fail("expected integer");
    return std::atoi(text.substr(start, pos - start).c_str());
  }

  Expr parse_expr() {
    Expr e = parse_term();
    while (true) {
      char c = peek();
      if (c == '+') {
        ++pos;
        e = e + parse_term();
      } else if (c == '-') {
        ++pos;
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (true) {
      char c = peek();
      if (c == '*') {
        ++pos;
        e = e * parse_unary();
      } else if (c == '/') {
        ++pos;
        e = e / parse_unary();
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    char c = peek();
    if (c == '-') {
      ++pos;
      return -parse_unary();
    }
    if (c == '+') {
      ++pos;
      return parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (peek() == '^') {
      ++pos;
      return pow_i(base, parse_int());
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      Expr e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos += static_cast<size_t>(end - begin);
    return constant(v);
  }

  Expr parse_ident() {
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    std::string name = text.substr(start, pos - start);

    if (name.size() >= 2 && name[0] == 'y' &&
        std::isdigit(static_cast<unsigned char>(name[1]))) {
      int idx = std::atoi(name.c_str() + 1);
      if (idx < 1 || idx > arity)
        fail("variable " + name + " outside y1..y" + std::to_string(arity));
      return var(idx - 1);
    }
    if (name == "sin" || name == "cos" || name == "exp" || name == "sinc") {
      if (!eat('(')) fail("expected '(' after " + name);
      Expr a = parse_expr();
      if (!eat(')')) fail("expected ')'");
      if (name == "sin") return sin(a);
      if (name == "cos") return cos(a);
      if (name == "exp") return exp(a);
      return sinc(a);
    }
    if (name == "root") {
      if (!eat('(')) fail("expected '(' after root");
      Expr a = parse_expr();
      if (!eat(',')) fail("expected ',' in root(expr, k)");
      int k = parse_int();
      if (!eat(')')) fail("expected ')'");
      return root(a, k);
    }
    fail("unknown identifier '" + name + "'");
  }
};

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;  // atoms and calls
  }
}

void print(const ExprNode* n, std::string& out);

void print_child(const ExprNode* child, int parent_prec, bool is_right, std::string& out) {
  const int p = precedence(child->op);
  // Right operands at equal precedence keep parentheses so the printed form
  // reparses to the identical tree (a-(b-c), a*(b*c), ...).
  const bool parens = is_right ? (p <= parent_prec) : (p < parent_prec);
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const ExprNode* n, std::string& out) {
  switch (n->op) {
    case Op::Const:
      out += format_double(n->value);
      break;
    case Op::Var:
      out += "y" + std::to_string(n->k + 1);
      break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(n->op);
      print_child(n->a.get(), p, false, out);
      switch (n->op) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += "*"; break;
        default: out += "/"; break;
      }
      print_child(n->b.get(), p, true, out);
      break;
    }
    case Op::Neg:
      out += '-';
      print_child(n->a.get(), precedence(Op::Neg), true, out);
      break;
    case Op::Pow:
      print_child(n->a.get(), precedence(Op::Pow), true, out);
      out += "^" + std::to_string(n->k);
      break;
    case Op::Root:
      out += "root(";
      print(n->a.get(), out);
      out += ", " + std::to_string(n->k) + ")";
      break;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Sinc: {
      switch (n->op) {
        case Op::Sin: out += "sin("; break;
        case Op::Cos: out += "cos("; break;
        case Op::Exp: out += "exp("; break;
        default: out += "sinc("; break;
      }
      print(n->a.get(), out);
      out += ')';
      break;
    }
  }
}

}  // namespace

AnalyticFunction parse_function(const std::string& text, int arity) {
  Parser p{text, arity};
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return AnalyticFunction(arity, e);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string to_string(const Expr& e) {
  if (e.empty()) return "";
  std::string out;
  print(e.node().get(), out);
  return out;
}

std::string to_string(const AnalyticFunction& f) { return to_string(f.tree()); }

}  // namespace seqgrad
