#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace finsler {

inline constexpr int kMaxDim = 6;
inline constexpr int kMaxOrderX = 1;
inline constexpr int kMaxOrderY = 4;

/// Raised when a field is evaluated outside its domain (sqrt of a negative
/// number, division by zero, L - beta <= 0, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponent vector over the 2n jet variables: slots [0, n) are x^1..x^n,
/// slots [n, 2n) are y^1..y^n.
using Exponents = std::array<std::uint8_t, 2 * kMaxDim>;

/// Monomial table of a truncated Taylor algebra in (x, y): every exponent
/// vector with |a_x| <= order_x and |a_y| <= order_y, ordered by total degree
/// (the constant term is always index 0). Shapes are interned, so two jets
/// share a shape iff they share the pointer.
class JetShape {
 public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  static std::shared_ptr<const JetShape> get(int dim, int order_x, int order_y);

  int dim() const { return dim_; }
  int order_x() const { return order_x_; }
  int order_y() const { return order_y_; }
  int max_degree() const { return order_x_ + order_y_; }
  std::size_t size() const { return terms_.size(); }

  const Exponents& exponents(std::size_t term) const { return terms_[term]; }
  /// Index of the monomial, or -1 when it lies outside the truncation.
  std::ptrdiff_t find(const Exponents& e) const;
  const std::vector<Product>& products() const { return products_; }

  JetShape(int dim, int order_x, int order_y);

 private:
  int dim_;
  int order_x_;
  int order_y_;
  std::vector<Exponents> terms_;
  std::vector<std::uint64_t> keys_;      // sorted packed exponents
  std::vector<std::uint32_t> key_term_;  // term index for keys_[i]
  std::vector<Product> products_;
};

/// Truncated multivariate Taylor polynomial of a scalar field around a
/// FiberPoint. Coefficients are stored divided by the multi-factorial; the
/// derivative() accessor returns plain partial derivatives.
///
/// A jet without a shape is a constant and combines with any shaped jet.
class Jet {
 public:
  Jet() : coeffs_{0.0} {}
  Jet(double constant) : coeffs_{constant} {}  // NOLINT(google-explicit-constructor)
  explicit Jet(std::shared_ptr<const JetShape> shape);

  /// The jet of the coordinate function `variable` (0..2n-1) with the given value.
  static Jet variable(std::shared_ptr<const JetShape> shape, int variable, double value);

  double value() const { return coeffs_[0]; }
  bool is_constant() const { return shape_ == nullptr; }
  const std::shared_ptr<const JetShape>& shape() const { return shape_; }
  std::span<const double> coefficients() const { return coeffs_; }

  /// Plain partial derivative d^|dx| / dx^dx  d^|dy| / dy^dy at the base point.
  /// `dx` and `dy` list coordinate indices (0-based, repetitions allowed).
  double derivative(std::span<const int> dx, std::span<const int> dy) const;
  double derivative(std::initializer_list<int> dx, std::initializer_list<int> dy) const {
    return derivative(std::span<const int>(dx.begin(), dx.size()),
                      std::span<const int>(dy.begin(), dy.size()));
  }

  /// Jet of the partial derivative, one order lower in the differentiated group.
  Jet diff_x(int i) const;
  Jet diff_y(int i) const;

  /// Drops every monomial beyond the new orders (which must not exceed the current ones).
  Jet truncated(int order_x, int order_y) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);

  friend Jet operator+(Jet lhs, const Jet& rhs) { return lhs += rhs; }
  friend Jet operator-(Jet lhs, const Jet& rhs) { return lhs -= rhs; }
  friend Jet operator*(const Jet& lhs, const Jet& rhs);
  friend Jet operator/(const Jet& lhs, const Jet& rhs);

 private:
  Jet diff(int variable) const;
  void promote_to(const std::shared_ptr<const JetShape>& shape);

  std::shared_ptr<const JetShape> shape_;
  std::vector<double> coeffs_;
};

Jet sqrt(const Jet& u);
Jet pow(const Jet& u, double exponent);
Jet pow(const Jet& u, int exponent);
Jet reciprocal(const Jet& u);

inline double value_of(double v) { return v; }
inline double value_of(const Jet& v) { return v.value(); }

}  // namespace finsler
