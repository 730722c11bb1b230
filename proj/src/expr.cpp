#include "finsler/expr.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <vector>

namespace finsler {

ParseError::ParseError(Kind kind, std::string message, int line, int column, std::string context)
    : std::runtime_error([&] {
        std::string what;
        if (!context.empty()) what += context + ": ";
        what += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
        return what;
      }()),
      kind_(kind),
      detail_(std::move(message)),
      line_(line),
      column_(column),
      context_(std::move(context)) {}

ParseError ParseError::within(std::string context) const {
  return ParseError(kind_, detail_, line_, column_, std::move(context));
}

struct Expr::Node {
  Op op;
  double value = 0.0;  // literal, or the folded exponent of a pow node
  int index = 0;       // 0-based coordinate index
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0,
             int index = 0) {
  return std::make_shared<const Expr::Node>(Expr::Node{op, value, index, std::move(lhs), std::move(rhs)});
}

int precedence(const Expr::Node& n) {
  switch (n.op) {
    case Expr::Op::add:
    case Expr::Op::sub:
      return 1;
    case Expr::Op::mul:
    case Expr::Op::div:
      return 2;
    case Expr::Op::neg:
      return 3;
    case Expr::Op::pow:
      return 4;
    default:
      return 5;
  }
}

bool uses(const Expr::Node& n, Expr::Op var) {
  if (n.op == var) return true;
  return (n.lhs && uses(*n.lhs, var)) || (n.rhs && uses(*n.rhs, var));
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void print(const Expr::Node& n, std::string& out) {
  auto child = [&](const Expr::Node& c, bool parens) {
    if (parens) out += '(';
    print(c, out);
    if (parens) out += ')';
  };
  const int p = precedence(n);
  switch (n.op) {
    case Expr::Op::number:
      out += format_number(n.value);
      return;
    case Expr::Op::x_var:
      out += "x" + std::to_string(n.index + 1);
      return;
    case Expr::Op::y_var:
      out += "y" + std::to_string(n.index + 1);
      return;
    case Expr::Op::sqrt:
      out += "sqrt(";
      print(*n.lhs, out);
      out += ')';
      return;
    case Expr::Op::neg:
      out += '-';
      child(*n.lhs, precedence(*n.lhs) < 3);
      return;
    case Expr::Op::pow:
      child(*n.lhs, precedence(*n.lhs) <= 4);
      out += '^';
      child(*n.rhs, precedence(*n.rhs) < 3);
      return;
    default: {
      const char sym = n.op == Expr::Op::add   ? '+'
                       : n.op == Expr::Op::sub ? '-'
                       : n.op == Expr::Op::mul ? '*'
                                               : '/';
      child(*n.lhs, precedence(*n.lhs) < p);
      out += sym;
      child(*n.rhs, precedence(*n.rhs) <= p);
      return;
    }
  }
}

template <class S>
S eval(const Expr::Node& n, std::span<const S> x, std::span<const S> y) {
  using std::sqrt;
  switch (n.op) {
    case Expr::Op::number:
      return S(n.value);
    case Expr::Op::x_var:
      return x[n.index];
    case Expr::Op::y_var:
      return y[n.index];
    case Expr::Op::neg:
      return -eval(*n.lhs, x, y);
    case Expr::Op::add:
      return eval(*n.lhs, x, y) + eval(*n.rhs, x, y);
    case Expr::Op::sub:
      return eval(*n.lhs, x, y) - eval(*n.rhs, x, y);
    case Expr::Op::mul:
      return eval(*n.lhs, x, y) * eval(*n.rhs, x, y);
    case Expr::Op::div: {
      const S den = eval(*n.rhs, x, y);
      if (value_of(den) == 0.0) throw DomainError("division by zero in expression");
      return eval(*n.lhs, x, y) / den;
    }
    case Expr::Op::pow: {
      const S base = eval(*n.lhs, x, y);
      if constexpr (std::is_same_v<S, double>) {
        if (std::floor(n.value) != n.value && !(base > 0.0)) {
          throw DomainError("non-integer power of a non-positive value");
        }
        return std::pow(base, n.value);
      } else {
        return pow(base, n.value);
      }
    }
    case Expr::Op::sqrt: {
      const S arg = eval(*n.lhs, x, y);
      if (value_of(arg) < 0.0) throw DomainError("sqrt of a negative value");
      return sqrt(arg);
    }
  }
  throw std::logic_error("unreachable");
}

bool equal(const Expr::Node& a, const Expr::Node& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Expr::Op::number:
      return a.value == b.value;
    case Expr::Op::x_var:
    case Expr::Op::y_var:
      return a.index == b.index;
    case Expr::Op::neg:
    case Expr::Op::sqrt:
      return equal(*a.lhs, *b.lhs);
    default:
      return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
  }
}

}  // namespace

class ExprParser {
 public:
  ExprParser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= text_.size()) fail(ParseError::Kind::syntax, "empty expression");
    auto n = expression();
    skip_space();
    if (pos_ < text_.size()) fail(ParseError::Kind::syntax, unexpected());
    return n;
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(kind, msg, line, col);
  }

  std::string unexpected() const {
    if (pos_ >= text_.size()) return "unexpected end of expression";
    return std::string("unexpected '") + text_[pos_] + "'";
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Expr::Op::add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Expr::Op::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Expr::Op::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Expr::Op::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Expr::Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    skip_space();
    if (!accept('^')) return base;
    skip_space();
    const std::size_t at = pos_;
    auto exponent = unary();
    if (uses(*exponent, Expr::Op::x_var) || uses(*exponent, Expr::Op::y_var)) {
      pos_ = at;
      fail(ParseError::Kind::syntax, "exponent must be a constant");
    }
    const double folded = eval<double>(*exponent, {}, {});
    return make(Expr::Op::pow, base, exponent, folded);
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail(ParseError::Kind::syntax, unexpected());
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expression();
      if (!accept(')')) fail(ParseError::Kind::syntax, "expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(ParseError::Kind::syntax, unexpected());
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
      pos_ = start;
      fail(ParseError::Kind::syntax, "malformed number");
    }
    return make(Expr::Op::number, nullptr, nullptr, v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "sqrt") {
      if (!accept('(')) fail(ParseError::Kind::syntax, "expected '(' after sqrt");
      auto arg = expression();
      if (!accept(')')) fail(ParseError::Kind::syntax, "expected ')'");
      return make(Expr::Op::sqrt, arg);
    }
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'y')) {
      int k = 0;
      const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size() && name[1] != '0') {
        if (k < 1 || k > dim_) {
          pos_ = start;
          fail(ParseError::Kind::dimension_mismatch,
               "variable '" + std::string(name) + "' exceeds dimension " + std::to_string(dim_));
        }
        return make(name[0] == 'x' ? Expr::Op::x_var : Expr::Op::y_var, nullptr, nullptr, 0.0, k - 1);
      }
    }
    pos_ = start;
    fail(ParseError::Kind::unknown_identifier, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

Expr::Expr() : node_(make(Op::number)) {}

Expr Expr::parse(std::string_view text, int dim) { return Expr(ExprParser(text, dim).parse()); }

Expr Expr::number(double v) {
  // Literals are non-negative so that printing and re-parsing preserves the tree.
  if (v < 0.0) return Expr(make(Op::neg, make(Op::number, nullptr, nullptr, -v)));
  return Expr(make(Op::number, nullptr, nullptr, v));
}

std::string Expr::to_string() const {
  std::string out;
  print(*node_, out);
  return out;
}

Jet Expr::evaluate(std::span<const Jet> x, std::span<const Jet> y) const { return eval(*node_, x, y); }

double Expr::evaluate(std::span<const double> x, std::span<const double> y) const {
  return eval(*node_, x, y);
}

bool Expr::depends_on_x() const { return uses(*node_, Op::x_var); }
bool Expr::depends_on_y() const { return uses(*node_, Op::y_var); }
Expr::Op Expr::op() const { return node_->op; }

bool operator==(const Expr& a, const Expr& b) { return equal(*a.node_, *b.node_); }

}  // namespace finsler
