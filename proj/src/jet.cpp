#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

namespace finsler {
namespace {

std::uint64_t pack(const Exponents& e) {
  std::uint64_t key = 0;
  for (std::size_t v = 0; v < e.size(); ++v) {
    key |= static_cast<std::uint64_t>(e[v]) << (4 * v);
  }
  return key;
}

// All exponent vectors over `count` slots starting at `offset` with total degree <= order.
void enumerate(int offset, int count, int order, Exponents& current, int slot,
               std::vector<Exponents>& out) {
  if (slot == count) {
    out.push_back(current);
    return;
  }
  int used = 0;
  for (int v = 0; v < slot; ++v) used += current[offset + v];
  for (int k = 0; k + used <= order; ++k) {
    current[offset + slot] = static_cast<std::uint8_t>(k);
    enumerate(offset, count, order, current, slot + 1, out);
  }
  current[offset + slot] = 0;
}

int degree(const Exponents& e, int begin, int end) {
  int d = 0;
  for (int v = begin; v < end; ++v) d += e[v];
  return d;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// f(u) from its Taylor coefficients at u0: taylor[k] = f^(k)(u0) / k!.
Jet compose(const Jet& u, const std::vector<double>& taylor) {
  Jet result(taylor[0]);
  if (u.is_constant()) return result;
  Jet delta = u - Jet(u.value());
  Jet power = delta;
  for (std::size_t k = 1; k < taylor.size(); ++k) {
    result += power * Jet(taylor[k]);
    if (k + 1 < taylor.size()) power *= delta;
  }
  return result;
}

// Generalised binomial coefficients times u0^(a-k).
std::vector<double> power_series(double u0, double a, int max_degree) {
  std::vector<double> taylor(static_cast<std::size_t>(max_degree) + 1);
  double binom = 1.0;
  for (int k = 0; k <= max_degree; ++k) {
    taylor[k] = binom * std::pow(u0, a - k);
    binom *= (a - k) / (k + 1);
  }
  return taylor;
}

}  // namespace

JetShape::JetShape(int dim, int order_x, int order_y)
    : dim_(dim), order_x_(order_x), order_y_(order_y) {
  Exponents zero{};
  std::vector<Exponents> xs;
  std::vector<Exponents> ys;
  Exponents cur = zero;
  enumerate(0, dim, order_x, cur, 0, xs);
  cur = zero;
  enumerate(dim, dim, order_y, cur, 0, ys);
  for (const auto& ex : xs) {
    for (const auto& ey : ys) {
      Exponents e{};
      for (int v = 0; v < 2 * dim; ++v) e[v] = static_cast<std::uint8_t>(ex[v] + ey[v]);
      terms_.push_back(e);
    }
  }
  std::stable_sort(terms_.begin(), terms_.end(), [&](const Exponents& a, const Exponents& b) {
    const int da = degree(a, 0, 2 * dim);
    const int db = degree(b, 0, 2 * dim);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  });

  std::vector<std::pair<std::uint64_t, std::uint32_t>> index;
  index.reserve(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    index.emplace_back(pack(terms_[t]), static_cast<std::uint32_t>(t));
  }
  std::sort(index.begin(), index.end());
  for (const auto& [k, t] : index) {
    keys_.push_back(k);
    key_term_.push_back(t);
  }

  std::vector<int> dx(terms_.size());
  std::vector<int> dy(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    dx[t] = degree(terms_[t], 0, dim);
    dy[t] = degree(terms_[t], dim, 2 * dim);
  }
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    for (std::size_t j = 0; j < terms_.size(); ++j) {
      if (dx[i] + dx[j] > order_x || dy[i] + dy[j] > order_y) continue;
      Exponents e{};
      for (int v = 0; v < 2 * dim; ++v) e[v] = static_cast<std::uint8_t>(terms_[i][v] + terms_[j][v]);
      const auto k = find(e);
      products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                           static_cast<std::uint32_t>(k)});
    }
  }
}

std::shared_ptr<const JetShape> JetShape::get(int dim, int order_x, int order_y) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("jet dimension out of range");
  if (order_x < 0 || order_y < 0 || order_x > 2 * kMaxOrderX || order_y > kMaxOrderY + 1) {
    throw std::invalid_argument("jet order out of range");
  }
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const JetShape>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, order_x, order_y}];
  if (!slot) slot = std::make_shared<const JetShape>(dim, order_x, order_y);
  return slot;
}

std::ptrdiff_t JetShape::find(const Exponents& e) const {
  const auto key = pack(e);
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return -1;
  return key_term_[static_cast<std::size_t>(it - keys_.begin())];
}

Jet::Jet(std::shared_ptr<const JetShape> shape)
    : shape_(std::move(shape)), coeffs_(shape_->size(), 0.0) {}

Jet Jet::variable(std::shared_ptr<const JetShape> shape, int variable, double value) {
  Jet j(std::move(shape));
  j.coeffs_[0] = value;
  Exponents e{};
  e[variable] = 1;
  const auto t = j.shape_->find(e);
  if (t >= 0) j.coeffs_[t] = 1.0;
  return j;
}

double Jet::derivative(std::span<const int> dx, std::span<const int> dy) const {
  if (dx.empty() && dy.empty()) return value();
  if (is_constant()) return 0.0;
  const int n = shape_->dim();
  Exponents e{};
  for (int i : dx) ++e[i];
  for (int i : dy) ++e[n + i];
  const auto t = shape_->find(e);
  if (t < 0) throw std::out_of_range("derivative order exceeds the jet truncation");
  double scale = 1.0;
  for (int v = 0; v < 2 * n; ++v) scale *= factorial(e[v]);
  return coeffs_[t] * scale;
}

Jet Jet::diff(int variable) const {
  if (is_constant()) return Jet(0.0);
  const int n = shape_->dim();
  const bool is_x = variable < n;
  const int ox = shape_->order_x() - (is_x ? 1 : 0);
  const int oy = shape_->order_y() - (is_x ? 0 : 1);
  if (ox < 0 || oy < 0) throw std::out_of_range("derivative order exceeds the jet truncation");
  Jet out(JetShape::get(n, ox, oy));
  for (std::size_t t = 0; t < out.shape_->size(); ++t) {
    Exponents e = out.shape_->exponents(t);
    ++e[variable];
    const auto src = shape_->find(e);
    out.coeffs_[t] = coeffs_[src] * e[variable];
  }
  return out;
}

Jet Jet::diff_x(int i) const { return diff(i); }

Jet Jet::diff_y(int i) const {
  if (is_constant()) return Jet(0.0);
  return diff(shape_->dim() + i);
}

Jet Jet::truncated(int order_x, int order_y) const {
  if (is_constant()) return *this;
  if (order_x > shape_->order_x() || order_y > shape_->order_y()) {
    throw std::out_of_range("truncation cannot raise the jet order");
  }
  Jet out(JetShape::get(shape_->dim(), order_x, order_y));
  for (std::size_t t = 0; t < out.shape_->size(); ++t) {
    out.coeffs_[t] = coeffs_[shape_->find(out.shape_->exponents(t))];
  }
  return out;
}

void Jet::promote_to(const std::shared_ptr<const JetShape>& shape) {
  const double c = coeffs_[0];
  shape_ = shape;
  coeffs_.assign(shape_->size(), 0.0);
  coeffs_[0] = c;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (auto& c : out.coeffs_) c = -c;
  return out;
}

Jet& Jet::operator+=(const Jet& rhs) {
  if (rhs.is_constant()) {
    coeffs_[0] += rhs.coeffs_[0];
    return *this;
  }
  if (is_constant()) promote_to(rhs.shape_);
  if (shape_ != rhs.shape_) throw std::logic_error("jet shapes differ");
  for (std::size_t t = 0; t < coeffs_.size(); ++t) coeffs_[t] += rhs.coeffs_[t];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  if (rhs.is_constant()) {
    coeffs_[0] -= rhs.coeffs_[0];
    return *this;
  }
  if (is_constant()) promote_to(rhs.shape_);
  if (shape_ != rhs.shape_) throw std::logic_error("jet shapes differ");
  for (std::size_t t = 0; t < coeffs_.size(); ++t) coeffs_[t] -= rhs.coeffs_[t];
  return *this;
}

Jet operator*(const Jet& lhs, const Jet& rhs) {
  if (rhs.is_constant()) {
    Jet out = lhs;
    for (auto& c : out.coeffs_) c *= rhs.coeffs_[0];
    return out;
  }
  if (lhs.is_constant()) {
    Jet out = rhs;
    for (auto& c : out.coeffs_) c *= lhs.coeffs_[0];
    return out;
  }
  if (lhs.shape_ != rhs.shape_) throw std::logic_error("jet shapes differ");
  Jet out(lhs.shape_);
  const double* a = lhs.coeffs_.data();
  const double* b = rhs.coeffs_.data();
  double* c = out.coeffs_.data();
  for (const auto& p : lhs.shape_->products()) c[p.out] += a[p.lhs] * b[p.rhs];
  return out;
}

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }

Jet operator/(const Jet& lhs, const Jet& rhs) {
  if (rhs.is_constant()) {
    if (rhs.value() == 0.0) throw DomainError("division by zero");
    return lhs * Jet(1.0 / rhs.value());
  }
  return lhs * reciprocal(rhs);
}

Jet& Jet::operator/=(const Jet& rhs) { return *this = *this / rhs; }

Jet reciprocal(const Jet& u) {
  if (u.value() == 0.0) throw DomainError("division by zero");
  if (u.is_constant()) return Jet(1.0 / u.value());
  return compose(u, power_series(u.value(), -1.0, u.shape()->max_degree()));
}

Jet sqrt(const Jet& u) {
  if (!(u.value() > 0.0)) {
    if (u.is_constant() && u.value() == 0.0) return Jet(0.0);
    throw DomainError("sqrt of a non-positive value");
  }
  if (u.is_constant()) return Jet(std::sqrt(u.value()));
  return compose(u, power_series(u.value(), 0.5, u.shape()->max_degree()));
}

Jet pow(const Jet& u, int exponent) {
  if (exponent < 0) return pow(reciprocal(u), -exponent);
  Jet result(1.0);
  Jet base = u;
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    exponent >>= 1;
    if (exponent > 0) base *= base;
  }
  return result;
}

Jet pow(const Jet& u, double exponent) {
  if (std::floor(exponent) == exponent && std::abs(exponent) <= 64.0) {
    return pow(u, static_cast<int>(exponent));
  }
  if (!(u.value() > 0.0)) throw DomainError("non-integer power of a non-positive value");
  if (u.is_constant()) return Jet(std::pow(u.value(), exponent));
  return compose(u, power_series(u.value(), exponent, u.shape()->max_degree()));
}

}  // namespace finsler
