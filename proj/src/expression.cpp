#include "hlmcf/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "hlmcf/error.hpp"

namespace hlmcf {

struct Expression::Node {
  enum class Op { Const, U, V, Add, Sub, Mul, Div, Pow, Neg, Call } op;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double u, double v) const {
    switch (op) {
      case Op::Const: return value;
      case Op::U: return u;
      case Op::V: return v;
      case Op::Add: return lhs->eval(u, v) + rhs->eval(u, v);
      case Op::Sub: return lhs->eval(u, v) - rhs->eval(u, v);
      case Op::Mul: return lhs->eval(u, v) * rhs->eval(u, v);
      case Op::Div: return lhs->eval(u, v) / rhs->eval(u, v);
      case Op::Pow: return std::pow(lhs->eval(u, v), rhs->eval(u, v));
      case Op::Neg: return -lhs->eval(u, v);
      case Op::Call: return fn(lhs->eval(u, v));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::InvalidArgument,
                "expression '" + s_ + "' at " + std::to_string(pos_) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr e = product();
    for (;;) {
      if (accept('+')) e = make(Op::Add, e, product());
      else if (accept('-')) e = make(Op::Sub, e, product());
      else return e;
    }
  }

  NodePtr product() {
    NodePtr e = unary();
    for (;;) {
      if (accept('*')) e = make(Op::Mul, e, unary());
      else if (accept('/')) e = make(Op::Div, e, unary());
      else return e;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  // right associative; binds tighter than unary minus on its left operand
  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (accept('(')) {
      NodePtr e = sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double value = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Const;
      n->value = value;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "u") return make(Op::U);
      if (name == "v") return make(Op::V);
      if (name == "pi") {
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Const;
        n->value = std::numbers::pi;
        return n;
      }
      double (*fn)(double) = nullptr;
      if (name == "sin") fn = [](double x) { return std::sin(x); };
      else if (name == "cos") fn = [](double x) { return std::cos(x); };
      else if (name == "tan") fn = [](double x) { return std::tan(x); };
      else if (name == "exp") fn = [](double x) { return std::exp(x); };
      else if (name == "log") fn = [](double x) { return std::log(x); };
      else if (name == "sqrt") fn = [](double x) { return std::sqrt(x); };
      else if (name == "abs") fn = [](double x) { return std::abs(x); };
      else fail("unknown identifier '" + name + "'");
      if (!accept('(')) fail("expected '(' after " + name);
      NodePtr arg = sum();
      if (!accept(')')) fail("expected ')'");
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Call;
      n->fn = fn;
      n->lhs = arg;
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& source) : source_(source), root_(Parser(source_).parse()) {}
Expression::~Expression() = default;
Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;

double Expression::operator()(double u, double v) const { return root_->eval(u, v); }

}  // namespace hlmcf
