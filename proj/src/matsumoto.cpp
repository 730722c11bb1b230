#include "finsler/matsumoto.hpp"

#include <cmath>
#include <tuple>

namespace finsler {

template <class S>
ChangeScalarsT<S> change_scalars_t(const S& L, const S& beta, const S& rho, const S& m2, bool gate) {
  ChangeScalarsT<S> c;
  c.L = L;
  c.s = beta / L;
  c.rho = rho;
  c.m2 = m2;
  if (gate && !(std::abs(value_of(c.s)) < 0.5)) throw RegularityError("|beta / L| must be below 1/2");
  const S u = S(1.0) - c.s;
  const S u3 = u * u * u;
  const S u4 = u3 * u;
  c.p = (S(1.0) + rho - 2.0 * c.s) / u3;
  c.p1 = (c.s - rho) / u3;
  c.p2 = S(1.0) / u3;
  c.p3 = 3.0 / u4;
  c.K1 = (S(1.0) + 3.0 * rho - 4.0 * c.s) / (2.0 * L * u4);
  c.K2 = 6.0 / (L * u4 * u);
  if (gate && !(value_of(c.p) > 0.0)) throw RegularityError("p must be positive");

  const S d = (c.p1 + c.p) * c.p3 - c.p2 * c.p2;
  const S e = 3.0 * c.p + 2.0 * c.p3 * m2;
  if (gate && (value_of(d) == 0.0 || value_of(e) == 0.0)) throw RegularityError("inverse metric denominators vanish");
  c.q = S(1.0) / c.p;
  c.q1 = -0.5 * ((c.p1 * c.p3 - c.p2 * c.p2) / d + 2.0 * c.p * c.p * c.p2 * c.p2 * c.p3 / (e * d * d));
  c.q2 = -2.0 * c.p2 * c.p3 / (e * d);
  c.q3 = -2.0 * c.p3 / (c.p * e);
  c.q1_corrected = 2.0 / c.p * c.q1;
  return c;
}

template ChangeScalarsT<double> change_scalars_t<double>(const double&, const double&, const double&, const double&,
                                                         bool);
template ChangeScalarsT<Jet> change_scalars_t<Jet>(const Jet&, const Jet&, const Jet&, const Jet&, bool);

TauScalars change_scalars_tau(double tau, double rho, double L) {
  const double t1 = tau - 1.0;
  const double beta = L / tau;
  TauScalars t;
  t.p = tau * tau * (tau + rho * tau - 2.0) / std::pow(t1, 3);
  t.p1 = tau * tau * (1.0 - rho * tau) / std::pow(t1, 3);
  t.p2 = std::pow(tau, 3) / std::pow(t1, 3);
  t.p3 = 3.0 * std::pow(tau, 4) / std::pow(t1, 4);
  t.K1 = std::pow(tau, 3) * (tau + 3.0 * rho * tau - 4.0) / (2.0 * L * std::pow(t1, 4));
  t.K2 = 6.0 * std::pow(tau, 4) / (beta * std::pow(t1, 5));
  return t;
}

template <class S>
Tensor<S> barred_l(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc) {
  const S u = S(1.0) - sc.s;
  return base.l * (S(1.0) / u) + h.m * (S(1.0) / (u * u));
}

template <class S>
Tensor<S> barred_angular(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc) {
  return base.h * sc.p + outer(h.m, h.m) * (sc.p3 * (2.0 / 3.0));
}

template <class S>
Tensor<S> barred_metric(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc) {
  const Tensor<S> ml = outer(h.m, base.l);
  const Tensor<S> lm = outer(base.l, h.m);
  return base.g * sc.p + outer(base.l, base.l) * sc.p1 + (ml + lm) * sc.p2 + outer(h.m, h.m) * sc.p3;
}

template <class S>
Tensor<S> barred_metric_expanded(const BaseTensorsT<S>& base, const HVectorDataT<S>& h,
                                 const ChangeScalarsT<S>& sc) {
  const Tensor<S> lb = barred_l(base, h, sc);
  return barred_angular(base, h, sc) + outer(lb, lb);
}

RankOneResult rank_one_inverse(const Tensor<double>& m_inv, double m_det, const Tensor<double>& n, double w) {
  const Tensor<double> n_up = matmul(m_inv, n);
  const double denom = 1.0 + w * dot(n, n_up);
  if (std::abs(denom) < 1e-300) throw DomainError("1 + n_k n^k vanishes");
  return {m_inv - outer(n_up, n_up) * (w / denom), denom * m_det};
}

RankOneResult rank_one_inverse(const Tensor<double>& m, const Tensor<double>& n) {
  double det = 0.0;
  const Tensor<double> m_inv = inverse(m, &det);
  return rank_one_inverse(m_inv, det, n, 1.0);
}

RankOneResult barred_metric_inverse_chain(const BaseTensors& base, const HVectorData& h, const ChangeScalars& sc) {
  // g_bar = p g + (p1 - p2^2/p3) l l + p3 u u,  u = m + (p2/p3) l
  const int n = base.g.dim();
  RankOneResult step{base.g_inv * (1.0 / sc.p), std::pow(sc.p, n) * base.det_g};
  step = rank_one_inverse(step.inverse, step.determinant, base.l, sc.p1 - sc.p2 * sc.p2 / sc.p3);
  const Tensor<double> u = h.m + base.l * (sc.p2 / sc.p3);
  return rank_one_inverse(step.inverse, step.determinant, u, sc.p3);
}

template <class S>
Tensor<S> barred_metric_inverse(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc,
                                Variant variant) {
  const Tensor<S> l_up = matmul(base.g_inv, base.l);
  const Tensor<S> m_up = matmul(base.g_inv, h.m);
  const S& q1 = variant == Variant::literal ? sc.q1 : sc.q1_corrected;
  return base.g_inv * sc.q + outer(l_up, l_up) * q1 + (outer(l_up, m_up) + outer(m_up, l_up)) * sc.q2 +
         outer(m_up, m_up) * sc.q3;
}

template <class S>
std::pair<Tensor<S>, Tensor<S>> barred_cartan(const BaseTensorsT<S>& base, const HVectorDataT<S>& h,
                                              const ChangeScalarsT<S>& sc) {
  const int n = base.g.dim();
  Tensor<S> V(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        V(i, j, k) = sc.K1 * (base.h(i, j) * h.m(k) + base.h(j, k) * h.m(i) + base.h(k, i) * h.m(j)) +
                     sc.K2 * h.m(i) * h.m(j) * h.m(k);
      }
  return {base.C * sc.p + V, V};
}

template <class S>
std::pair<Tensor<S>, Tensor<S>> barred_torsion_mixed(const BaseTensorsT<S>& base, const HVectorDataT<S>& h,
                                                     const ChangeScalarsT<S>& sc) {
  const int n = base.g.dim();
  const Tensor<S> l_up = matmul(base.g_inv, base.l);
  const Tensor<S> m_up = matmul(base.g_inv, h.m);
  const Tensor<S> h_up = matmul(base.g_inv, base.h);
  Tensor<S> M(n, 3);
  for (int i = 0; i < n; ++i) {
    const S w = sc.q2 * l_up(i) + sc.q3 * m_up(i);
    const S z = sc.q * m_up(i) + w * h.m2;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        M(i, j, k) = sc.q * sc.K1 * (h.m(k) * h_up(i, j) + h.m(j) * h_up(i, k)) +
                     w * (2.0 * sc.K1 * h.m(j) * h.m(k) + sc.p / base.L * h.rho * base.h(j, k)) +
                     z * (sc.K2 * h.m(j) * h.m(k) + sc.K1 * base.h(j, k));
      }
  }
  return {base.C_mixed + M, M};
}

template <class S>
BarredTensorsT<S> barred_tensors(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc,
                                 Variant inverse_variant) {
  BarredTensorsT<S> out;
  out.L_bar = base.L / (S(1.0) - sc.s);
  out.l_bar = barred_l(base, h, sc);
  out.h_bar = barred_angular(base, h, sc);
  out.g_bar = barred_metric(base, h, sc);
  out.g_bar_inv = barred_metric_inverse(base, h, sc, inverse_variant);
  std::tie(out.C_bar, out.V) = barred_cartan(base, h, sc);
  std::tie(out.C_bar_mixed, out.M) = barred_torsion_mixed(base, h, sc);
  return out;
}

Tensor<double> mixed_torsion_defect_term(const BaseTensors& base, const HVectorData& h, const ChangeScalars& sc) {
  const int n = base.g.dim();
  const Tensor<double> l_up = matmul(base.g_inv, base.l);
  const Tensor<double> m_up = matmul(base.g_inv, h.m);
  Tensor<double> out(n, 3);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double cb = 0.0;
      for (int r = 0; r < n; ++r) cb += base.C_mixed(r, j, k) * h.b(r);
      const double delta = (base.L * cb - h.rho * base.h(j, k)) / base.L;
      for (int i = 0; i < n; ++i) out(i, j, k) = -sc.p * (sc.q2 * l_up(i) + sc.q3 * m_up(i)) * delta;
    }
  return out;
}

#define FINSLER_INSTANTIATE(S)                                                                                   \
  template Tensor<S> barred_l<S>(const BaseTensorsT<S>&, const HVectorDataT<S>&, const ChangeScalarsT<S>&);      \
  template Tensor<S> barred_angular<S>(const BaseTensorsT<S>&, const HVectorDataT<S>&, const ChangeScalarsT<S>&); \
  template Tensor<S> barred_metric<S>(const BaseTensorsT<S>&, const HVectorDataT<S>&, const ChangeScalarsT<S>&);  \
  template Tensor<S> barred_metric_expanded<S>(const BaseTensorsT<S>&, const HVectorDataT<S>&,                  \
                                               const ChangeScalarsT<S>&);                                        \
  template Tensor<S> barred_metric_inverse<S>(const BaseTensorsT<S>&, const HVectorDataT<S>&,                   \
                                              const ChangeScalarsT<S>&, Variant);                                \
  template std::pair<Tensor<S>, Tensor<S>> barred_cartan<S>(const BaseTensorsT<S>&, const HVectorDataT<S>&,     \
                                                            const ChangeScalarsT<S>&);                           \
  template std::pair<Tensor<S>, Tensor<S>> barred_torsion_mixed<S>(const BaseTensorsT<S>&, const HVectorDataT<S>&, \
                                                                   const ChangeScalarsT<S>&);                    \
  template BarredTensorsT<S> barred_tensors<S>(const BaseTensorsT<S>&, const HVectorDataT<S>&,                  \
                                               const ChangeScalarsT<S>&, Variant);

FINSLER_INSTANTIATE(double)
FINSLER_INSTANTIATE(Jet)
#undef FINSLER_INSTANTIATE

namespace {

// Fourth-order central difference.
template <class F>
double derivative(F f, double t, double h) {
  return (8.0 * (f(t + h) - f(t - h)) - (f(t + 2.0 * h) - f(t - 2.0 * h))) / (12.0 * h);
}

double scaled(double a, double scale) { return std::abs(a) / std::max(1.0, std::abs(scale)); }

}  // namespace

std::vector<IdentityResult> change_identity_suite(const BaseTensorsT<Jet>& base, const HVectorDataT<Jet>& h,
                                                  const ChangeScalarsT<Jet>& sc) {
  const BaseTensors b0{base.L.value(),      base.det_g.value(), values(base.y), values(base.l),
                       values(base.g),      values(base.g_inv), values(base.h), values(base.C),
                       values(base.C_mixed)};
  const int n = b0.g.dim();
  const Tensor<double> m = values(h.m);
  const double L = b0.L;
  const double s = sc.s.value();
  const double rho = sc.rho.value();
  const double p1 = sc.p1.value(), p2 = sc.p2.value(), p3 = sc.p3.value();
  const double K1 = sc.K1.value(), K2 = sc.K2.value();
  std::vector<IdentityResult> out;

  const Tensor<double> m_up = matmul(b0.g_inv, m);
  out.push_back({"m.raised", residual(matmul(b0.g, m_up), m), 1e-9});
  out.push_back({"m.squared", residual(h.m2.value(), h.b2.value() - s * s), 1e-12});
  out.push_back({"m.indicatory", scaled(dot(m, b0.y), max_abs(m) * frobenius(b0.y)), 1e-12});

  out.push_back({"scalars.p1", scaled(p1 + p2 * (rho - s), p1), 1e-12});
  out.push_back({"scalars.K1", residual(K1, (p2 + p3 * (rho - s)) / (2.0 * L)), 1e-12});
  if (s != 0.0) {
    const double tau = 1.0 / s;
    const double step = 1e-3 * std::abs(tau);
    const double dp = derivative([&](double t) { return change_scalars_tau(t, rho, L).p; }, tau, step);
    const double dp3 = derivative([&](double t) { return change_scalars_tau(t, rho, L).p3; }, tau, step);
    out.push_back({"scalars.dp_dtau", residual(dp, -2.0 * L / (tau * tau) * K1), 1e-6});
    out.push_back({"scalars.dp3_dtau", residual(dp3, -2.0 * L / (tau * tau) * K2), 1e-6});
  } else {
    // tau is infinite; the same identities read dp/ds = 2 L K1, dp3/ds = 2 L K2.
    auto p_of = [&](double t) { return (1.0 + rho - 2.0 * t) / std::pow(1.0 - t, 3); };
    auto p3_of = [&](double t) { return 3.0 / std::pow(1.0 - t, 4); };
    out.push_back({"scalars.dp_dtau", residual(derivative(p_of, 0.0, 1e-3), 2.0 * L * K1), 1e-6});
    out.push_back({"scalars.dp3_dtau", residual(derivative(p3_of, 0.0, 1e-3), 2.0 * L * K2), 1e-6});
  }

  const Tensor<Jet> Q = base.l * sc.p2 + h.m * sc.p3;
  Tensor<double> B(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = K1 * b0.h(i, j) + K2 * m(i) * m(j);
  Tensor<double> dQ(n, 2);
  for (int j = 0; j < n; ++j) {
    const Tensor<double> col = fiber_derivative(Q, j);
    for (int i = 0; i < n; ++i) dQ(i, j) = col(i);
  }
  out.push_back({"Q.derivative_is_B", residual(dQ, B), 1e-9});
  out.push_back({"Q.derivative_is_2B", residual(dQ, B * 2.0), 1e-9});
  Tensor<double> Bt(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Bt(i, j) = B(j, i);
  out.push_back({"B.symmetric", residual(B, Bt), 1e-12});
  Tensor<double> By(n, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) By(j) += B(i, j) * b0.y(i);
  out.push_back({"B.indicatory", max_abs(By) / std::max(1.0, max_abs(B) * frobenius(b0.y)), 1e-12});
  return out;
}

}  // namespace finsler
