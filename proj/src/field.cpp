#include "finsler/field.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace finsler {

FiberPoint::FiberPoint(std::vector<double> x_, std::vector<double> y_)
    : x(std::move(x_)), y(std::move(y_)) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y must have the same length");
  if (x.size() < 2 || x.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("dimension must lie in [2, 6]");
  }
  double norm2 = 0.0;
  for (double v : y) norm2 += v * v;
  if (!(norm2 > 0.0)) throw std::invalid_argument("y must be nonzero");
}

double ScalarField::operator()(const FiberPoint& p) const {
  std::vector<Jet> x(p.x.begin(), p.x.end());
  std::vector<Jet> y(p.y.begin(), p.y.end());
  return f_(x, y).value();
}

std::vector<Jet> coordinate_jets(const FiberPoint& p, int order_x, int order_y) {
  const int n = p.dim();
  const auto shape = JetShape::get(n, order_x, order_y);
  std::vector<Jet> z;
  z.reserve(2 * n);
  for (int i = 0; i < n; ++i) z.push_back(Jet::variable(shape, i, p.x[i]));
  for (int i = 0; i < n; ++i) z.push_back(Jet::variable(shape, n + i, p.y[i]));
  return z;
}

Jet jet_eval(const ScalarField& field, const FiberPoint& p, int order_x, int order_y) {
  if (order_x < 0 || order_x > kMaxOrderX || order_y < 0 || order_y > kMaxOrderY) {
    throw std::invalid_argument("jet orders must lie within (1, 4)");
  }
  if (field.dim() != p.dim()) throw std::invalid_argument("field and point dimensions differ");
  const auto z = coordinate_jets(p, order_x, order_y);
  const std::span<const Jet> all(z);
  Jet j = field(all.first(p.dim()), all.last(p.dim()));
  if (j.is_constant()) {
    Jet shaped(JetShape::get(p.dim(), order_x, order_y));
    shaped += j;
    return shaped;
  }
  return j;
}

namespace {

// Nested central differences, one variable per recursion level.
double nested_difference(const ScalarField& field, std::vector<double>& coords,
                         std::span<const int> vars, std::span<const double> steps) {
  const int n = static_cast<int>(coords.size() / 2);
  if (vars.empty()) {
    FiberPoint q(std::vector<double>(coords.begin(), coords.begin() + n),
                 std::vector<double>(coords.begin() + n, coords.end()));
    return field(q);
  }
  const int v = vars.front();
  const double h = steps.front();
  const double saved = coords[v];
  coords[v] = saved + h;
  const double plus = nested_difference(field, coords, vars.subspan(1), steps.subspan(1));
  coords[v] = saved - h;
  const double minus = nested_difference(field, coords, vars.subspan(1), steps.subspan(1));
  coords[v] = saved;
  return (plus - minus) / (2.0 * h);
}

}  // namespace

double fd_derivative(const ScalarField& field, const FiberPoint& p, std::span<const int> dx,
                     std::span<const int> dy) {
  const int n = p.dim();
  std::vector<int> vars;
  for (int i : dx) vars.push_back(i);
  for (int i : dy) vars.push_back(n + i);
  if (vars.size() > 4) throw std::invalid_argument("finite differences limited to order 4");
  std::vector<double> coords(p.x);
  coords.insert(coords.end(), p.y.begin(), p.y.end());
  if (vars.empty()) return field(p);

  // Step balances O(h^4) Richardson truncation against eps / h^k roundoff.
  const int k = static_cast<int>(vars.size());
  const double base = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 4));
  std::vector<double> steps(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    steps[i] = base * std::max(1.0, std::abs(coords[vars[i]]));
  }
  const double coarse = nested_difference(field, coords, vars, steps);
  for (auto& h : steps) h *= 0.5;
  const double fine = nested_difference(field, coords, vars, steps);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace finsler
