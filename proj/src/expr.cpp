#include "selpde/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

namespace selpde {

namespace {

enum class Op { add, sub, mul, div, pow, neg };

enum class Fn { exp, ln, sin, cos, sqrt, abs, min, max, pow };

struct FnInfo {
  const char* name;
  Fn fn;
  int arity;
};

constexpr FnInfo kFunctions[] = {
    {"exp", Fn::exp, 1}, {"ln", Fn::ln, 1},     {"sin", Fn::sin, 1},
    {"cos", Fn::cos, 1}, {"sqrt", Fn::sqrt, 1}, {"abs", Fn::abs, 1},
    {"min", Fn::min, 2}, {"max", Fn::max, 2},   {"pow", Fn::pow, 2},
};

const FnInfo* find_function(const std::string& name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

}  // namespace

struct Expr::Node {
  enum class Kind { number, const_pi, const_e, sym_r, sym_x, binary, unary, call } kind;
  double number = 0.0;
  int coord = 0;  // sym_x: 1-based coordinate index
  Op op = Op::add;
  Fn fn = Fn::exp;
  std::size_t position = 0;  // source offset, for eval diagnostics
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Node = Expr::Node;

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr run() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      fail("unexpected trailing input", pos_);
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t at) {
    std::ostringstream os;
    os << "parse error at position " << at << ": " << msg;
    throw ParseError(os.str(), at);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (consume('+'))
        lhs = binary(Op::add, lhs, parse_term());
      else if (consume('-'))
        lhs = binary(Op::sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (consume('*'))
        lhs = binary(Op::mul, lhs, parse_factor());
      else if (consume('/'))
        lhs = binary(Op::div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  // factor := unary ('^' factor)?   right-associative exponent
  NodePtr parse_factor() {
    NodePtr base = parse_unary();
    if (consume('^')) return binary(Op::pow, base, parse_factor());
    return base;
  }

  NodePtr parse_unary() {
    if (consume('-')) {
      Node n;
      n.kind = Node::Kind::unary;
      n.op = Op::neg;
      n.position = pos_ - 1;
      n.args = {parse_unary()};
      return make_node(std::move(n));
    }
    return parse_atom();
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input", pos_);
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (!consume(')')) fail("expected ')'", pos_);
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("invalid number", start);
    pos_ += static_cast<std::size_t>(end - begin);
    Node n;
    n.kind = Node::Kind::number;
    n.number = v;
    n.position = start;
    return make_node(std::move(n));
  }

  NodePtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);

    if (const FnInfo* fn = find_function(name)) {
      if (!consume('(')) fail("expected '(' after function '" + name + "'", pos_);
      std::vector<NodePtr> args;
      args.push_back(parse_sum());
      while (consume(',')) args.push_back(parse_sum());
      if (!consume(')')) fail("expected ')'", pos_);
      if (static_cast<int>(args.size()) != fn->arity) {
        std::ostringstream os;
        os << "function '" << name << "' expects " << fn->arity << " argument(s), got "
           << args.size();
        fail(os.str(), start);
      }
      Node n;
      n.kind = Node::Kind::call;
      n.fn = fn->fn;
      n.position = start;
      n.args = std::move(args);
      return make_node(std::move(n));
    }

    Node n;
    n.position = start;
    if (name == "r") {
      n.kind = Node::Kind::sym_r;
    } else if (name == "pi") {
      n.kind = Node::Kind::const_pi;
    } else if (name == "e") {
      n.kind = Node::Kind::const_e;
    } else if (name.size() >= 2 && name[0] == 'x') {
      for (std::size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i])))
          fail("unknown symbol '" + name + "'", start);
      int k = std::atoi(name.c_str() + 1);
      if (k < 1) fail("coordinate index in '" + name + "' must be >= 1", start);
      n.kind = Node::Kind::sym_x;
      n.coord = k;
    } else {
      fail("unknown symbol '" + name + "'", start);
    }
    return make_node(std::move(n));
  }

  NodePtr binary(Op op, NodePtr lhs, NodePtr rhs) {
    Node n;
    n.kind = Node::Kind::binary;
    n.op = op;
    n.position = lhs->position;
    n.args = {std::move(lhs), std::move(rhs)};
    return make_node(std::move(n));
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& n, const EvalPoint& p) {
  switch (n.kind) {
    case Node::Kind::number:
      return n.number;
    case Node::Kind::const_pi:
      return 3.14159265358979323846;
    case Node::Kind::const_e:
      return 2.71828182845904523536;
    case Node::Kind::sym_r:
      return p.r;
    case Node::Kind::sym_x:
      if (p.x == nullptr || n.coord > p.dim) {
        std::ostringstream os;
        os << "coordinate x" << n.coord << " is not available at this evaluation point";
        throw std::runtime_error(os.str());
      }
      return p.x[n.coord - 1];
    case Node::Kind::unary:
      return -eval_node(*n.args[0], p);
    case Node::Kind::binary: {
      double a = eval_node(*n.args[0], p);
      double b = eval_node(*n.args[1], p);
      switch (n.op) {
        case Op::add: return a + b;
        case Op::sub: return a - b;
        case Op::mul: return a * b;
        case Op::div: return a / b;
        case Op::pow: return std::pow(a, b);
        default: break;
      }
      break;
    }
    case Node::Kind::call: {
      double a = eval_node(*n.args[0], p);
      switch (n.fn) {
        case Fn::exp: return std::exp(a);
        case Fn::ln: return std::log(a);
        case Fn::sin: return std::sin(a);
        case Fn::cos: return std::cos(a);
        case Fn::sqrt: return std::sqrt(a);
        case Fn::abs: return std::fabs(a);
        case Fn::min: return std::fmin(a, eval_node(*n.args[1], p));
        case Fn::max: return std::fmax(a, eval_node(*n.args[1], p));
        case Fn::pow: return std::pow(a, eval_node(*n.args[1], p));
      }
      break;
    }
  }
  throw std::logic_error("corrupt expression node");
}

void print_node(const Node& n, std::ostream& os) {
  switch (n.kind) {
    case Node::Kind::number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      os << buf;
      return;
    }
    case Node::Kind::const_pi: os << "pi"; return;
    case Node::Kind::const_e: os << "e"; return;
    case Node::Kind::sym_r: os << "r"; return;
    case Node::Kind::sym_x: os << "x" << n.coord; return;
    case Node::Kind::unary:
      os << "(-";
      print_node(*n.args[0], os);
      os << ")";
      return;
    case Node::Kind::binary: {
      const char* sym = n.op == Op::add   ? "+"
                        : n.op == Op::sub ? "-"
                        : n.op == Op::mul ? "*"
                        : n.op == Op::div ? "/"
                                          : "^";
      os << "(";
      print_node(*n.args[0], os);
      os << sym;
      print_node(*n.args[1], os);
      os << ")";
      return;
    }
    case Node::Kind::call: {
      const char* name = nullptr;
      for (const auto& f : kFunctions)
        if (f.fn == n.fn) name = f.name;
      os << name << "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << ",";
        print_node(*n.args[i], os);
      }
      os << ")";
      return;
    }
  }
}

bool node_radial(const Node& n) {
  if (n.kind == Node::Kind::sym_x) return false;
  for (const auto& a : n.args)
    if (!node_radial(*a)) return false;
  return true;
}

int node_max_coordinate(const Node& n) {
  int m = n.kind == Node::Kind::sym_x ? n.coord : 0;
  for (const auto& a : n.args) m = std::max(m, node_max_coordinate(*a));
  return m;
}

}  // namespace

Expr Expr::parse(const std::string& text) {
  Parser parser(text);
  Expr e;
  e.root_ = parser.run();
  e.source_ = text;
  return e;
}

double Expr::eval(const EvalPoint& p) const {
  if (!root_) throw std::logic_error("eval of empty expression");
  return eval_node(*root_, p);
}

bool Expr::radial() const { return root_ ? node_radial(*root_) : true; }

int Expr::max_coordinate() const { return root_ ? node_max_coordinate(*root_) : 0; }

std::string Expr::to_string() const {
  if (!root_) return "";
  std::ostringstream os;
  print_node(*root_, os);
  return os.str();
}

}  // namespace selpde
