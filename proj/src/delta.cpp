#include "finsler/delta.hpp"

#include <limits>

#include "finsler/random.hpp"

namespace finsler {

template <class S>
void complete_ingredients(DeltaIngredientsT<S>& ing, const BaseTensorsT<S>& base, const HVectorDataT<S>& h,
                          const ChangeScalarsT<S>& sc) {
  const int n = base.g.dim();
  const Tensor<S>& bd = ing.b_h_deriv;
  ing.E = Tensor<S>(n, 2);
  ing.Fskew = Tensor<S>(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ing.E(i, j) = 0.5 * (bd(i, j) + bd(j, i));
      ing.Fskew(i, j) = 0.5 * (bd(i, j) - bd(j, i));
    }
  ing.Q = base.l * sc.p2 + h.m * sc.p3;
  ing.B = base.h * sc.K1 + outer(h.m, h.m) * sc.K2;
  ing.beta_k = Tensor<S>(n, 1);
  ing.E_oj = Tensor<S>(n, 1);
  ing.F_so = Tensor<S>(n, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      ing.beta_k(j) += base.y(i) * bd(i, j);
      ing.E_oj(j) += base.y(i) * ing.E(i, j);
      ing.F_so(j) += ing.Fskew(j, i) * base.y(i);
    }
  ing.E_oo = dot(ing.E_oj, base.y);
  ing.rho_k = h.rho_k;
}

template <class S>
DeltaIngredientsT<S> delta_ingredients(const BaseTensorsT<S>& base, const ConnectionDataT<S>& conn,
                                       const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc, int K) {
  const int n = base.g.dim();
  DeltaIngredientsT<S> ing;
  ing.b_h_deriv = Tensor<S>(n, 2);
  for (int i = 0; i < n; ++i) {
    std::vector<S> dy(n);
    for (int r = 0; r < n; ++r) dy[r] = lift<S>(h.b_jet[i].diff_y(r), K);
    for (int j = 0; j < n; ++j) {
      S v = lift<S>(h.b_jet[i].diff_x(j), K);
      for (int r = 0; r < n; ++r) v -= conn.N(r, j) * dy[r] + h.b(r) * conn.F(r, i, j);
      ing.b_h_deriv(i, j) = v;
    }
  }
  complete_ingredients(ing, base, h, sc);
  return ing;
}

template <class S>
Tensor<S> spray_delta(const DeltaIngredientsT<S>& ing, const Tensor<S>& g_bar_inv, const ChangeScalarsT<S>& sc) {
  const int n = ing.Q.dim();
  Tensor<S> low(n, 1);
  for (int s = 0; s < n; ++s) low(s) = 0.5 * (ing.Q(s) * ing.E_oo + 2.0 * sc.p2 * sc.L * ing.F_so(s));
  return matmul(g_bar_inv, low);
}

namespace {

template <class S>
Tensor<S> weighted_cartan(const BaseTensorsT<S>& base, const ChangeScalarsT<S>& sc, const Tensor<S>& V) {
  return base.C * sc.p + V;
}

}  // namespace

template <class S>
Tensor<S> nonlinear_delta(const DeltaIngredientsT<S>& ing, const Tensor<S>& g_bar_inv, const BaseTensorsT<S>& base,
                          const ChangeScalarsT<S>& sc, const Tensor<S>& V, const Tensor<S>& D_i) {
  const int n = base.g.dim();
  const Tensor<S> W = weighted_cartan(base, sc, V);
  S rho_o(0.0);
  for (int k = 0; k < n; ++k) rho_o += ing.rho_k(k) * base.y(k);
  Tensor<S> F_ro(n, 1);
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < n; ++i) F_ro(r) += ing.Fskew(r, i) * base.y(i);
  Tensor<S> low(n, 2);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < n; ++j) {
      S v(0.0);
      for (int m = 0; m < n; ++m) v -= 2.0 * D_i(m) * W(m, r, j);
      v += ing.Q(r) * ing.E_oj(j) + ing.E_oo * ing.B(r, j) + sc.p2 * sc.L * ing.Fskew(r, j) +
           ing.Q(j) * F_ro(r) + 0.5 * sc.p2 * rho_o * base.h(r, j);
      low(r, j) = v;
    }
  return raise_first(g_bar_inv, low);
}

template <class S>
Tensor<S> cartan_delta(const DeltaIngredientsT<S>& ing, const Tensor<S>& g_bar_inv, const BaseTensorsT<S>& base,
                       const ChangeScalarsT<S>& sc, const Tensor<S>& V, const Tensor<S>& D_ij, Variant variant) {
  const int n = base.g.dim();
  const Tensor<S> W = weighted_cartan(base, sc, V);
  // WD(a, b, c) = (p C + V)_abr D^r_c
  Tensor<S> WD(n, 3);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) WD(a, b, c) += W(a, b, r) * D_ij(r, c);
  auto U = [&](int a, int b, int c) {
    return 0.5 * sc.p2 * ing.rho_k(c) * base.h(a, b) + ing.beta_k(c) * ing.B(a, b) - WD(a, b, c);
  };
  Tensor<S> low(n, 3);
  for (int s = 0; s < n; ++s)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        S sigma = variant == Variant::corrected ? U(s, j, k) + U(s, k, j) - U(j, k, s)
                                                : U(j, s, k) - U(s, k, j) + U(k, j, s);
        low(s, j, k) = sigma + ing.Q(j) * ing.Fskew(s, k) + ing.Q(k) * ing.Fskew(s, j) + ing.Q(s) * ing.E(j, k);
      }
  return raise_first(g_bar_inv, low);
}

#define FINSLER_INSTANTIATE(S)                                                                                  \
  template void complete_ingredients<S>(DeltaIngredientsT<S>&, const BaseTensorsT<S>&, const HVectorDataT<S>&, \
                                        const ChangeScalarsT<S>&);                                              \
  template DeltaIngredientsT<S> delta_ingredients<S>(const BaseTensorsT<S>&, const ConnectionDataT<S>&,        \
                                                     const HVectorDataT<S>&, const ChangeScalarsT<S>&, int);    \
  template Tensor<S> spray_delta<S>(const DeltaIngredientsT<S>&, const Tensor<S>&, const ChangeScalarsT<S>&);   \
  template Tensor<S> nonlinear_delta<S>(const DeltaIngredientsT<S>&, const Tensor<S>&, const BaseTensorsT<S>&,  \
                                        const ChangeScalarsT<S>&, const Tensor<S>&, const Tensor<S>&);          \
  template Tensor<S> cartan_delta<S>(const DeltaIngredientsT<S>&, const Tensor<S>&, const BaseTensorsT<S>&,     \
                                     const ChangeScalarsT<S>&, const Tensor<S>&, const Tensor<S>&, Variant);

FINSLER_INSTANTIATE(double)
FINSLER_INSTANTIATE(Jet)
#undef FINSLER_INSTANTIATE

Tensor<double> berwald_delta(const Tensor<Jet>& D_ij) {
  const int n = D_ij.dim();
  Tensor<double> out(n, 3);
  for (int k = 0; k < n; ++k) {
    const Tensor<double> dk = fiber_derivative(D_ij, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j, k) = dk(i, j);
  }
  return out;
}

std::vector<IdentityResult> delta_transvection_checks(const Tensor<double>& y, const Tensor<double>& D_i,
                                           const Tensor<double>& D_ij, const Tensor<double>& D_ijk,
                                           double tolerance) {
  return {{"D.cartan_transvected", residual(transvect_last(D_ijk, y), D_ij), tolerance},
          {"D.nonlinear_transvected", residual(transvect_last(D_ij, y), D_i * 2.0), tolerance}};
}

std::vector<IdentityResult> delta_fiber_checks(const Tensor<Jet>& D_i, const Tensor<Jet>& D_ij,
                                               const Tensor<double>& y) {
  const int n = D_i.dim();
  Tensor<double> dD(n, 2);
  for (int j = 0; j < n; ++j) {
    const Tensor<double> col = fiber_derivative(D_i, j);
    for (int i = 0; i < n; ++i) dD(i, j) = col(i);
  }
  const Tensor<double> D_ij0 = values(D_ij);
  // y^j dot-d_k D^i_j = D^i_k
  const Tensor<double> bw = berwald_delta(D_ij);
  Tensor<double> yb(n, 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) yb(i, k) += y(j) * bw(i, j, k);
  return {{"D.spray_fiber_derivative", residual(dD, D_ij0), 1e-6},
          {"D.berwald_transvected", residual(yb, D_ij0), 1e-6}};
}

SandboxCase sandbox_generate(std::uint64_t seed, int n, const SandboxOptions& options) {
  if (n < 2 || n > 6) throw std::invalid_argument("sandbox dimension must be in 2..6");
  Rng rng(seed);
  SandboxCase out;
  BaseTensors& base = out.base;
  bool use_E = options.E, use_F = options.Fskew, use_rho = options.rho_k;
  if (options.random_mask) {
    use_E = use_E && rng.uniform() < 0.5;
    use_F = use_F && rng.uniform() < 0.5;
    use_rho = use_rho && rng.uniform() < 0.5;
  }

  Tensor<double> A(n, 2);
  for (std::size_t k = 0; k < A.size(); ++k) A[k] = rng.normal();
  base.g = Tensor<double>(n, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) base.g(i, j) += A(i, r) * A(j, r);
    base.g(i, i) += n;
  }
  base.g_inv = inverse(base.g, &base.det_g);
  base.y = Tensor<double>(n, 1);
  for (int i = 0; i < n; ++i) base.y(i) = rng.normal();
  const Tensor<double> gy = matmul(base.g, base.y);
  base.L = std::sqrt(dot(gy, base.y));
  base.l = gy * (1.0 / base.L);
  base.h = base.g - outer(base.l, base.l);

  // P(i, a) = delta - l_i y^a / L removes the y-component of a lower slot.
  Tensor<double> P(n, 2);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) P(i, a) = (i == a ? 1.0 : 0.0) - base.l(i) * base.y(a) / base.L;
  Tensor<double> raw(n, 3);
  for (std::size_t k = 0; k < raw.size(); ++k) raw[k] = 0.3 * rng.normal();
  Tensor<double> sym(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        sym(i, j, k) = (raw(i, j, k) + raw(i, k, j) + raw(j, i, k) + raw(j, k, i) + raw(k, i, j) + raw(k, j, i)) / 6.0;
  base.C = Tensor<double>(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) v += P(i, a) * P(j, b) * P(k, c) * sym(a, b, c);
        base.C(i, j, k) = v;
      }
  base.C_mixed = raise_first(base.g_inv, base.C);

  HVectorData& h = out.h;
  h.rho_k = Tensor<double>(n, 1);
  for (int attempt = 0;; ++attempt) {
    if (attempt > 1000) throw std::runtime_error("sandbox: no admissible draw");
    Tensor<double> m_raw(n, 1);
    for (int i = 0; i < n; ++i) m_raw(i) = 0.5 * rng.normal();
    h.m = matmul(P, m_raw);
    h.s = rng.uniform(-0.3, 0.3);
    h.rho = rng.uniform(-0.3, 0.3);
    h.beta = h.s * base.L;
    h.tau = h.beta == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / h.s;
    h.b = h.m + base.l * h.s;
    h.m2 = dot(h.m, matmul(base.g_inv, h.m));
    h.b2 = dot(h.b, matmul(base.g_inv, h.b));
    try {
      out.sc = change_scalars(base.L, h.beta, h.rho, h.m2);
      break;
    } catch (const RegularityError&) {
    }
  }
  out.g_bar_inv = barred_metric_inverse(base, h, out.sc, Variant::corrected);
  out.V = barred_cartan(base, h, out.sc).second;

  Tensor<double> E(n, 2), F(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double e = rng.normal();
      const double f = i == j ? 0.0 : rng.normal();
      E(i, j) = E(j, i) = use_E ? e : 0.0;
      F(i, j) = use_F ? f : 0.0;
      F(j, i) = -F(i, j);
    }
  for (int k = 0; k < n; ++k) {
    const double r = rng.normal();
    h.rho_k(k) = use_rho ? r : 0.0;
  }
  out.ing.b_h_deriv = E + F;
  complete_ingredients(out.ing, base, h, out.sc);

  out.D_i = spray_delta(out.ing, out.g_bar_inv, out.sc);
  out.D_ij = nonlinear_delta(out.ing, out.g_bar_inv, base, out.sc, out.V, out.D_i);
  out.D_ijk = cartan_delta(out.ing, out.g_bar_inv, base, out.sc, out.V, out.D_ij);
  return out;
}

}  // namespace finsler
