#include "finsler/geometry.hpp"

#include <algorithm>

namespace finsler {

ChangeGeometry change_geometry(const ScalarField& L, const HVectorSpec& spec, const FiberPoint& p,
                               const GeometryOptions& options) {
  ChangeGeometry out;
  const Jet Lj = metric_jet(L, p);
  out.base = base_tensors_from<double>(Lj, p);
  if (!(out.base.det_g > 0.0)) throw RegularityError("det g is not positive");
  out.h = h_vector_from<double>(spec, Lj, p, out.base);
  out.sc = change_scalars(out.base.L, out.h.beta, out.h.rho, out.h.m2);
  out.chain = barred_metric_inverse_chain(out.base, out.h, out.sc);
  if (!(out.chain.determinant > 0.0)) throw RegularityError("det g_bar is not positive");

  out.conn = connection_from<double>(Lj, p, out.base);
  out.barred = barred_tensors(out.base, out.h, out.sc, Variant::corrected);
  out.g_bar_inv_literal = barred_metric_inverse(out.base, out.h, out.sc, Variant::literal);
  out.defect = h_vector_defect(out.base, out.h);

  out.ing = delta_ingredients(out.base, out.conn, out.h, out.sc);
  DeltaTensors& d = out.delta;
  d.D_i = spray_delta(out.ing, out.barred.g_bar_inv, out.sc);
  d.D_ij = nonlinear_delta(out.ing, out.barred.g_bar_inv, out.base, out.sc, out.barred.V, d.D_i);
  d.D_ijk = cartan_delta(out.ing, out.barred.g_bar_inv, out.base, out.sc, out.barred.V, d.D_ij, options.cyclic);
  out.D_ijk_literal = options.cyclic == Variant::literal
                          ? d.D_ijk
                          : cartan_delta(out.ing, out.barred.g_bar_inv, out.base, out.sc, out.barred.V, d.D_ij,
                                         Variant::literal);
  d.barred_G = out.conn.G + d.D_i;
  d.barred_N = out.conn.N + d.D_ij;
  d.barred_F = out.conn.F + d.D_ijk;

  out.identities = delta_transvection_checks(out.base.y, d.D_i, d.D_ij, d.D_ijk, 1e-9);
  if (options.fiber_jets) {
    const auto base1 = base_tensors_from<Jet>(Lj, p, 1);
    const auto conn1 = connection_from<Jet>(Lj, p, base1, 1, false);
    const auto h1 = h_vector_from<Jet>(spec, Lj, p, base1, 1);
    const auto sc1 = change_scalars_t<Jet>(base1.L, h1.beta, h1.rho, h1.m2, false);
    const auto g_bar_inv1 = barred_metric_inverse(base1, h1, sc1, Variant::corrected);
    const auto V1 = barred_cartan(base1, h1, sc1).second;
    const auto ing1 = delta_ingredients(base1, conn1, h1, sc1, 1);
    out.D_i_jet = spray_delta(ing1, g_bar_inv1, sc1);
    out.D_ij_jet = nonlinear_delta(ing1, g_bar_inv1, base1, sc1, V1, out.D_i_jet);
    d.D_berwald = berwald_delta(out.D_ij_jet);
    d.barred_G_berwald = out.conn.berwald + d.D_berwald;

    auto more = change_identity_suite(base1, h1, sc1);
    auto jet5 = delta_fiber_checks(out.D_i_jet, out.D_ij_jet, out.base.y);
    more.insert(more.end(), out.identities.begin(), out.identities.end());
    more.insert(more.end(), jet5.begin(), jet5.end());
    out.identities = std::move(more);
  }

  if (options.direct) {
    const Jet Lbar = metric_jet(matsumoto_field(L, spec), p);
    out.direct_base = base_tensors_from<double>(Lbar, p);
    out.direct_conn = connection_from<double>(Lbar, p, out.direct_base);
    out.has_direct = true;
  }
  return out;
}

ParallelCertificate parallel_b_certificate(std::span<const ChangeGeometry> samples, double tolerance) {
  ParallelCertificate c;
  for (const auto& g : samples) {
    const double b = frobenius(g.ing.b_h_deriv);
    const double d = std::max({frobenius(g.delta.D_ijk), frobenius(g.delta.D_ij), frobenius(g.delta.D_i)});
    if (c.samples == 0) {
      c.min_b_deriv = b;
      c.min_delta = d;
    }
    ++c.samples;
    c.max_b_deriv = std::max(c.max_b_deriv, b);
    c.min_b_deriv = std::min(c.min_b_deriv, b);
    c.max_delta = std::max(c.max_delta, d);
    c.min_delta = std::min(c.min_delta, d);
    const bool parallel = b <= tolerance;
    const bool zero = d <= tolerance;
    c.parallel_samples += parallel;
    c.zero_delta_samples += zero;
    c.forward_violations += parallel && !zero;
    c.converse_violations += zero && !parallel;
  }
  return c;
}

}  // namespace finsler
