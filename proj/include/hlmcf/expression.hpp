#pragma once

#include <memory>
#include <string>

namespace hlmcf {

/// Arithmetic in two variables u, v: + - * / ^, unary minus, parentheses,
/// the constant pi, and sin cos tan exp log sqrt abs.
class Expression {
 public:
  explicit Expression(const std::string& source);
  ~Expression();
  Expression(const Expression&);
  Expression& operator=(const Expression&);
  Expression(Expression&&) noexcept;
  Expression& operator=(Expression&&) noexcept;

  double operator()(double u, double v) const;
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace hlmcf
