#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace selpde {

// Scalar expression over the symbols r, x1..xN, pi, e and the function
// whitelist exp, ln, sin, cos, sqrt, abs, min, max, pow.
//
// Grammar notes pinned for cross-implementation agreement:
//   * '^' is right-associative: 2^3^2 == 2^(3^2)
//   * unary minus binds tighter than a '^' base: -r^2 == (-r)^2
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct EvalPoint {
  double r = 0.0;           // radius, always available
  const double* x = nullptr;  // coordinates x1..xdim, optional
  int dim = 0;

  static EvalPoint radius(double rv) { return EvalPoint{rv, nullptr, 0}; }
};

class Expr {
 public:
  Expr() = default;

  static Expr parse(const std::string& text);

  double eval(const EvalPoint& p) const;
  double eval_radius(double r) const { return eval(EvalPoint::radius(r)); }

  bool empty() const { return root_ == nullptr; }
  bool radial() const;          // references no x<k> symbol
  int max_coordinate() const;   // highest k among referenced x<k>, 0 if none
  std::string to_string() const;  // fully parenthesized; reparses identically
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace selpde
