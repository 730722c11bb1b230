#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

/// Raised when a metric (or any matrix we must invert) is numerically singular.
class SingularMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense n x n x ... x n array over a scalar type S (double or Jet).
/// Index order is row-major: t(i, j, k) has i slowest.
template <class S>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank, const S& fill = S(0.0))
      : dim_(dim), rank_(rank), data_(count(dim, rank), fill) {}

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }

  template <class... I>
  S& operator()(I... idx) {
    return data_[flat(static_cast<int>(idx)...)];
  }
  template <class... I>
  const S& operator()(I... idx) const {
    return data_[flat(static_cast<int>(idx)...)];
  }

  S& at(std::span<const int> idx) { return data_[flat_span(idx)]; }
  const S& at(std::span<const int> idx) const { return data_[flat_span(idx)]; }

  S& operator[](std::size_t k) { return data_[k]; }
  const S& operator[](std::size_t k) const { return data_[k]; }

  std::span<S> data() { return data_; }
  std::span<const S> data() const { return data_; }

  Tensor& operator+=(const Tensor& rhs) {
    check_same(rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
  }
  Tensor& operator-=(const Tensor& rhs) {
    check_same(rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
  }
  Tensor& operator*=(const S& s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, const S& s) { return a *= s; }
  friend Tensor operator*(const S& s, Tensor a) { return a *= s; }

 private:
  static std::size_t count(int dim, int rank) {
    std::size_t c = 1;
    for (int r = 0; r < rank; ++r) c *= static_cast<std::size_t>(dim);
    return c;
  }
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t k = 0;
    ((k = k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx)), ...);
    return k;
  }
  std::size_t flat_span(std::span<const int> idx) const {
    std::size_t k = 0;
    for (int i : idx) k = k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    return k;
  }
  void check_same(const Tensor& rhs) const {
    if (rhs.dim_ != dim_ || rhs.rank_ != rank_) throw std::logic_error("tensor shapes differ");
  }

  int dim_ = 0;
  int rank_ = 0;
  std::vector<S> data_;
};

template <class S>
Tensor<S> vector_from(std::span<const double> v) {
  Tensor<S> t(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = S(v[i]);
  return t;
}

/// A full (x, y) jet seen as a quantity of type S: its value for double, or
/// its y-only truncation of order `fiber_order` for Jet.
template <class S>
S lift(const Jet& j, int fiber_order) {
  if constexpr (std::is_same_v<S, double>) {
    return j.value();
  } else {
    return j.truncated(0, fiber_order);
  }
}

/// Value part of a jet-valued tensor.
inline Tensor<double> values(const Tensor<Jet>& t) {
  Tensor<double> out(t.dim(), t.rank());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = t[k].value();
  return out;
}
inline const Tensor<double>& values(const Tensor<double>& t) { return t; }

/// Componentwise partial derivative d/dy^j of a jet-valued tensor, as values.
inline Tensor<double> fiber_derivative(const Tensor<Jet>& t, int j) {
  Tensor<double> out(t.dim(), t.rank());
  const int dy[1] = {j};
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = t[k].derivative({}, dy);
  return out;
}

/// Inverse (and determinant) by Gauss-Jordan elimination with partial
/// pivoting on the value part. Throws SingularMetricError when a pivot falls
/// below `rel_tol` times the largest entry.
template <class S>
Tensor<S> inverse(const Tensor<S>& m, S* determinant = nullptr, double rel_tol = 1e-12) {
  const int n = m.dim();
  Tensor<S> a = m;
  Tensor<S> inv(n, 2);
  for (int i = 0; i < n; ++i) inv(i, i) = S(1.0);
  double scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) scale = std::max(scale, std::abs(value_of(a[k])));
  S det(1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(value_of(a(r, col))) > std::abs(value_of(a(piv, col)))) piv = r;
    }
    if (!(std::abs(value_of(a(piv, col))) > rel_tol * scale)) {
      throw SingularMetricError("matrix is numerically singular");
    }
    if (piv != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a(piv, c), a(col, c));
        std::swap(inv(piv, c), inv(col, c));
      }
      det = -det;
    }
    const S pivot = a(col, col);
    det *= pivot;
    const S rp = S(1.0) / pivot;
    for (int c = 0; c < n; ++c) {
      a(col, c) *= rp;
      inv(col, c) *= rp;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const S f = a(r, col);
      if (value_of(f) == 0.0 && std::is_same_v<S, double>) continue;
      for (int c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  if (determinant) *determinant = det;
  return inv;
}

template <class S>
S determinant(const Tensor<S>& m) {
  S det(0.0);
  inverse(m, &det);
  return det;
}

/// Matrix-matrix and matrix-vector products.
template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  const int n = a.dim();
  if (b.rank() == 1) {
    Tensor<S> out(n, 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i) += a(i, j) * b(j);
    return out;
  }
  Tensor<S> out(n, 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) out(i, j) += a(i, k) * b(k, j);
  return out;
}

template <class S>
S dot(const Tensor<S>& a, const Tensor<S>& b) {
  S s(0.0);
  for (int i = 0; i < a.dim(); ++i) s += a(i) * b(i);
  return s;
}

template <class S>
Tensor<S> outer(const Tensor<S>& a, const Tensor<S>& b) {
  Tensor<S> out(a.dim(), 2);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) out(i, j) = a(i) * b(j);
  return out;
}

/// Contracts the last index of t with v.
template <class S>
Tensor<S> transvect_last(const Tensor<S>& t, const Tensor<S>& v) {
  const int n = t.dim();
  Tensor<S> out(n, t.rank() - 1);
  for (std::size_t k = 0; k < out.size(); ++k)
    for (int r = 0; r < n; ++r) out[k] += t[k * n + r] * v(r);
  return out;
}

/// Raises the first index: out^i... = m^{ir} t_r...
template <class S>
Tensor<S> raise_first(const Tensor<S>& m_inv, const Tensor<S>& t) {
  const int n = t.dim();
  Tensor<S> out(n, t.rank());
  const std::size_t stride = t.size() / n;
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < n; ++r)
      for (std::size_t k = 0; k < stride; ++k) out[i * stride + k] += m_inv(i, r) * t[r * stride + k];
  return out;
}

inline double max_abs(const Tensor<double>& t) {
  double m = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) m = std::max(m, std::abs(t[k]));
  return m;
}

inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double frobenius(const Tensor<double>& t) {
  double s = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) s += t[k] * t[k];
  return std::sqrt(s);
}

/// max|a - b| / max(1, max|b|): relative for large entries, absolute near zero.
inline double residual(const Tensor<double>& a, const Tensor<double>& b) {
  return max_abs_diff(a, b) / std::max(1.0, max_abs(b));
}

inline double residual(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace finsler
