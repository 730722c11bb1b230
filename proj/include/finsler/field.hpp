#pragma once

#include <functional>
#include <span>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

/// A point (x, y) of the slit tangent bundle, 2 <= n <= 6 and y != 0.
struct FiberPoint {
  std::vector<double> x;
  std::vector<double> y;

  FiberPoint(std::vector<double> x_, std::vector<double> y_);
  int dim() const { return static_cast<int>(x.size()); }
};

/// A scalar function of (x, y), evaluated on jets of the coordinates.
class ScalarField {
 public:
  using Evaluator = std::function<Jet(std::span<const Jet> x, std::span<const Jet> y)>;

  ScalarField(int dim, Evaluator f) : dim_(dim), f_(std::move(f)) {}

  int dim() const { return dim_; }
  Jet operator()(std::span<const Jet> x, std::span<const Jet> y) const { return f_(x, y); }
  double operator()(const FiberPoint& p) const;

 private:
  int dim_;
  Evaluator f_;
};

/// Coordinate jets of `p` in the truncated algebra of the given orders:
/// the first n entries are x, the last n are y.
std::vector<Jet> coordinate_jets(const FiberPoint& p, int order_x, int order_y);

/// All mixed partials of `field` at `p` with |a_x| <= order_x, |a_y| <= order_y.
Jet jet_eval(const ScalarField& field, const FiberPoint& p, int order_x, int order_y);

/// Central-difference estimate of the same partial derivative, with one level
/// of Richardson extrapolation. Test oracle only.
double fd_derivative(const ScalarField& field, const FiberPoint& p, std::span<const int> dx,
                     std::span<const int> dy);
inline double fd_derivative(const ScalarField& field, const FiberPoint& p,
                            std::initializer_list<int> dx, std::initializer_list<int> dy) {
  return fd_derivative(field, p, std::span<const int>(dx.begin(), dx.size()),
                       std::span<const int>(dy.begin(), dy.size()));
}

}  // namespace finsler
