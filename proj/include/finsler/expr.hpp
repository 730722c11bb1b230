#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "finsler/jet.hpp"

namespace finsler {

/// Error raised while reading an expression or a metric document. Line and
/// column are 1-based positions in the text that was being parsed; `context`
/// names the document location (a JSON pointer) when there is one.
class ParseError : public std::runtime_error {
 public:
  enum class Kind { syntax, unknown_identifier, dimension_mismatch, schema };

  ParseError(Kind kind, std::string message, int line, int column, std::string context = {});

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& context() const { return context_; }
  const std::string& detail() const { return detail_; }

  /// Same error, located inside a larger document.
  ParseError within(std::string context) const;

 private:
  Kind kind_;
  std::string detail_;
  int line_;
  int column_;
  std::string context_;
};

/// Arithmetic expression over x1..xn, y1..yn with + - * / ^ sqrt and numeric
/// literals. Immutable; copies share the tree.
class Expr {
 public:
  enum class Op { number, x_var, y_var, neg, add, sub, mul, div, pow, sqrt };

  struct Node;

  Expr();  // the literal 0
  static Expr parse(std::string_view text, int dim);
  static Expr number(double v);

  std::string to_string() const;
  Jet evaluate(std::span<const Jet> x, std::span<const Jet> y) const;
  double evaluate(std::span<const double> x, std::span<const double> y) const;

  bool depends_on_x() const;
  bool depends_on_y() const;
  Op op() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
  friend class ExprParser;
};

}  // namespace finsler
