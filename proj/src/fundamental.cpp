#include "finsler/fundamental.hpp"

#include <stdexcept>

namespace finsler {

namespace {

void require_fiber_order(int needed_y, const Jet& L, const char* what) {
  if (L.is_constant() || L.shape()->order_x() < 1 || L.shape()->order_y() < needed_y) {
    throw std::invalid_argument(std::string(what) + ": metric jet truncated too low");
  }
}

// All index tuples of a rank-r tensor over dimension n, row-major.
std::vector<int> unflatten(std::size_t k, int n, int rank) {
  std::vector<int> idx(static_cast<std::size_t>(rank));
  for (int a = rank - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(k % n);
    k /= n;
  }
  return idx;
}

}  // namespace

Jet metric_jet(const ScalarField& L, const FiberPoint& p) { return jet_eval(L, p, 1, 4); }

template <class S>
Tensor<S> support_vector(const FiberPoint& p, int fiber_order) {
  const int n = p.dim();
  Tensor<S> y(n, 1);
  if constexpr (std::is_same_v<S, double>) {
    for (int i = 0; i < n; ++i) y(i) = p.y[i];
  } else {
    const auto shape = JetShape::get(n, 0, fiber_order);
    for (int i = 0; i < n; ++i) y(i) = Jet::variable(shape, n + i, p.y[i]);
  }
  return y;
}

template <class S>
BaseTensorsT<S> base_tensors_from(const Jet& L, const FiberPoint& p, int K) {
  require_fiber_order(K + 3, L, "base_tensors");
  const int n = p.dim();
  if (!(L.value() > 0.0)) throw DomainError("L must be positive");
  BaseTensorsT<S> out;
  out.L = lift<S>(L, K);
  out.y = support_vector<S>(p, K);
  out.l = Tensor<S>(n, 1);
  out.g = Tensor<S>(n, 2);
  out.C = Tensor<S>(n, 3);
  const Jet L2 = L * L;
  for (int i = 0; i < n; ++i) {
    const Jet li = L.diff_y(i);
    out.l(i) = lift<S>(li, K);
    const Jet L2i = L2.diff_y(i);
    for (int j = 0; j <= i; ++j) {
      const Jet gij = 0.5 * L2i.diff_y(j);
      out.g(i, j) = out.g(j, i) = lift<S>(gij, K);
      for (int k = 0; k <= j; ++k) {
        const S c = lift<S>(0.5 * gij.diff_y(k), K);
        out.C(i, j, k) = out.C(i, k, j) = out.C(j, i, k) = c;
        out.C(j, k, i) = out.C(k, i, j) = out.C(k, j, i) = c;
      }
    }
  }
  out.g_inv = inverse(out.g, &out.det_g);
  out.h = out.g - outer(out.l, out.l);
  out.C_mixed = raise_first(out.g_inv, out.C);
  return out;
}

template <class S>
ConnectionDataT<S> connection_from(const Jet& L, const FiberPoint& p, const BaseTensorsT<S>& base, int K,
                                   bool with_berwald) {
  // gamma is needed one fiber order above N, two above the Berwald coefficients.
  const int KG = K + 1 + (with_berwald ? 1 : 0);
  require_fiber_order(KG + 2, L, "connection_data");
  const int n = p.dim();
  const Jet L2 = L * L;
  Tensor<Jet> g(n, 2);
  Tensor<Jet> dg(n, 3);  // dg(k, i, j) = d_k g_ij
  for (int i = 0; i < n; ++i) {
    const Jet L2i = L2.diff_y(i);
    for (int j = 0; j <= i; ++j) {
      const Jet gij = 0.5 * L2i.diff_y(j);
      g(i, j) = g(j, i) = gij.truncated(0, KG);
      for (int k = 0; k < n; ++k) dg(k, i, j) = dg(k, j, i) = gij.diff_x(k).truncated(0, KG);
    }
  }
  const Tensor<Jet> g_inv = inverse(g);
  Tensor<Jet> gamma_lower(n, 3);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) gamma_lower(r, j, k) = 0.5 * (dg(j, r, k) + dg(k, r, j) - dg(r, j, k));
  const Tensor<Jet> gamma = raise_first(g_inv, gamma_lower);
  const Tensor<Jet> y = support_vector<Jet>(p, KG);

  ConnectionDataT<S> out;
  out.gamma = Tensor<S>(n, 3);
  out.G = Tensor<S>(n, 1);
  out.N = Tensor<S>(n, 2);
  if (with_berwald) out.berwald = Tensor<S>(n, 3);
  for (int i = 0; i < n; ++i) {
    Jet Gi(0.0);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Gi += 0.5 * gamma(i, j, k) * y(j) * y(k);
        out.gamma(i, j, k) = lift<S>(gamma(i, j, k), K);
      }
    out.G(i) = lift<S>(Gi, K);
    for (int j = 0; j < n; ++j) {
      const Jet Nij = Gi.diff_y(j);
      out.N(i, j) = lift<S>(Nij, K);
      if (with_berwald) {
        for (int k = 0; k < n; ++k) out.berwald(i, j, k) = lift<S>(Nij.diff_y(k), K);
      }
    }
  }

  // F^i_jk = gamma^i_jk + g^is (C_jkr N^r_s - C_skr N^r_j - C_jsr N^r_k)
  Tensor<S> CN(n, 3);  // CN(a, b, c) = C_abr N^r_c
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) CN(a, b, c) += base.C(a, b, r) * out.N(r, c);
  Tensor<S> lower(n, 3);
  for (int s = 0; s < n; ++s)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) lower(s, j, k) = CN(j, k, s) - CN(s, k, j) - CN(j, s, k);
  out.F = out.gamma + raise_first(base.g_inv, lower);
  return out;
}

template Tensor<double> support_vector<double>(const FiberPoint&, int);
template Tensor<Jet> support_vector<Jet>(const FiberPoint&, int);
template BaseTensorsT<double> base_tensors_from<double>(const Jet&, const FiberPoint&, int);
template BaseTensorsT<Jet> base_tensors_from<Jet>(const Jet&, const FiberPoint&, int);
template ConnectionDataT<double> connection_from<double>(const Jet&, const FiberPoint&,
                                                         const BaseTensorsT<double>&, int, bool);
template ConnectionDataT<Jet> connection_from<Jet>(const Jet&, const FiberPoint&, const BaseTensorsT<Jet>&,
                                                   int, bool);

BaseTensors base_tensors(const ScalarField& L, const FiberPoint& p) {
  return base_tensors_from<double>(metric_jet(L, p), p);
}

ConnectionData connection_data(const ScalarField& L, const FiberPoint& p) {
  const Jet Lj = metric_jet(L, p);
  return connection_from<double>(Lj, p, base_tensors_from<double>(Lj, p));
}

TensorField scalar_tensor_field(const ScalarField& f) {
  return {f.dim(), {}, [f](const FiberPoint& p, int ox, int oy) {
            Tensor<Jet> t(p.dim(), 0);
            t[0] = jet_eval(f, p, ox, oy);
            return t;
          }};
}

TensorField support_tensor_field(int dim) {
  return {dim, {true}, [](const FiberPoint& p, int ox, int oy) {
            const auto z = coordinate_jets(p, ox, oy);
            Tensor<Jet> t(p.dim(), 1);
            for (int i = 0; i < p.dim(); ++i) t(i) = z[p.dim() + i];
            return t;
          }};
}

TensorField supporting_element_field(const ScalarField& L) {
  return {L.dim(), {false}, [L](const FiberPoint& p, int ox, int oy) {
            const Jet Lj = jet_eval(L, p, ox, oy + 1);
            Tensor<Jet> t(p.dim(), 1);
            for (int i = 0; i < p.dim(); ++i) t(i) = Lj.diff_y(i);
            return t;
          }};
}

TensorField metric_tensor_field(const ScalarField& L) {
  return {L.dim(), {false, false}, [L](const FiberPoint& p, int ox, int oy) {
            const Jet Lj = jet_eval(L, p, ox, oy + 2);
            const Jet L2 = Lj * Lj;
            Tensor<Jet> t(p.dim(), 2);
            for (int i = 0; i < p.dim(); ++i)
              for (int j = 0; j < p.dim(); ++j) t(i, j) = 0.5 * L2.diff_y(i).diff_y(j);
            return t;
          }};
}

namespace {

// Shared body of the two covariant derivatives. `partial(t, k)` is the
// derivative part, `conn(i, r, k)` the connection coefficient.
template <class Partial, class Coeff>
Tensor<double> covariant(const TensorField& T, const Tensor<Jet>& jets, int n, Partial partial, Coeff conn) {
  const int rank = T.rank();
  Tensor<double> out(n, rank + 1);
  for (std::size_t flat = 0; flat < jets.size(); ++flat) {
    std::vector<int> idx = unflatten(flat, n, rank);
    for (int k = 0; k < n; ++k) {
      double v = partial(jets[flat], k);
      for (int a = 0; a < rank; ++a) {
        const int i = idx[a];
        for (int r = 0; r < n; ++r) {
          idx[a] = r;
          const double t = jets.at(idx).value();
          v += T.upper[a] ? t * conn(i, r, k) : -t * conn(r, i, k);
        }
        idx[a] = i;
      }
      out[flat * n + k] = v;
    }
  }
  return out;
}

}  // namespace

Tensor<double> h_cov_deriv(const TensorField& T, const ConnectionData& conn, const FiberPoint& p) {
  const int n = p.dim();
  const Tensor<Jet> jets = T.eval(p, 1, 1);
  auto delta = [&](const Jet& t, int k) {
    const int dk[1] = {k};
    double v = t.derivative(dk, {});
    for (int r = 0; r < n; ++r) {
      const int dr[1] = {r};
      v -= conn.N(r, k) * t.derivative({}, dr);
    }
    return v;
  };
  return covariant(T, jets, n, delta, [&](int i, int r, int k) { return conn.F(i, r, k); });
}

Tensor<double> v_cov_deriv(const TensorField& T, const BaseTensors& base, const FiberPoint& p) {
  const int n = p.dim();
  const Tensor<Jet> jets = T.eval(p, 0, 1);
  auto dot = [](const Jet& t, int k) {
    const int dk[1] = {k};
    return t.derivative({}, dk);
  };
  return covariant(T, jets, n, dot, [&](int i, int r, int k) { return base.C_mixed(i, r, k); });
}

}  // namespace finsler
