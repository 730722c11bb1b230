#pragma once

#include <string>
#include <utility>
#include <vector>

#include "finsler/h_vector.hpp"

namespace finsler {

/// Raised when a point falls outside the accepted domain of the change.
class RegularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Which form of a formula to use where the printed one is known to be
/// inconsistent: `literal` transcribes it, `corrected` is the form that
/// closes against the direct computation.
enum class Variant { literal, corrected };

template <class S>
struct ChangeScalarsT {
  S L, s, rho, m2;
  S p, p1, p2, p3;
  S q, q1, q2, q3;
  S q1_corrected;  // (2 / p) q1
  S K1, K2;
};

using ChangeScalars = ChangeScalarsT<double>;

/// Coefficients of the change as functions of s = beta / L. With `gate`,
/// throws RegularityError unless |s| < 1/2, p > 0 and the two inverse
/// denominators are nonzero.
template <class S>
ChangeScalarsT<S> change_scalars_t(const S& L, const S& beta, const S& rho, const S& m2, bool gate = true);

inline ChangeScalars change_scalars(double L, double beta, double rho, double m2, bool gate = true) {
  return change_scalars_t<double>(L, beta, rho, m2, gate);
}

/// The coefficients written in tau = L / beta, transcribed as printed.
struct TauScalars {
  double p, p1, p2, p3, K1, K2;
};
TauScalars change_scalars_tau(double tau, double rho, double L);

template <class S>
Tensor<S> barred_l(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc);
template <class S>
Tensor<S> barred_angular(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc);
/// p g + p1 l l + p2 (m l + l m) + p3 m m
template <class S>
Tensor<S> barred_metric(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc);
/// h_bar + l_bar l_bar, assembled from the two forms above.
template <class S>
Tensor<S> barred_metric_expanded(const BaseTensorsT<S>& base, const HVectorDataT<S>& h,
                                 const ChangeScalarsT<S>& sc);

/// Inverse and determinant of m_ij + w n_i n_j from those of m_ij.
struct RankOneResult {
  Tensor<double> inverse;
  double determinant;
};
RankOneResult rank_one_inverse(const Tensor<double>& m_inv, double m_det, const Tensor<double>& n, double w = 1.0);
/// Convenience form that inverts m by elimination first.
RankOneResult rank_one_inverse(const Tensor<double>& m, const Tensor<double>& n);

/// g_bar^-1 and det g_bar through two rank-one updates of p g.
RankOneResult barred_metric_inverse_chain(const BaseTensors& base, const HVectorData& h, const ChangeScalars& sc);

/// q g^ij + q1 l^i l^j + q2 (l^i m^j + m^i l^j) + q3 m^i m^j.
template <class S>
Tensor<S> barred_metric_inverse(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc,
                                Variant variant = Variant::literal);

/// (C_bar, V) with C_bar = p C + V.
template <class S>
std::pair<Tensor<S>, Tensor<S>> barred_cartan(const BaseTensorsT<S>& base, const HVectorDataT<S>& h,
                                              const ChangeScalarsT<S>& sc);

/// (C_bar^i_jk, M^i_jk) with C_bar^i_jk = C^i_jk + M^i_jk as printed.
template <class S>
std::pair<Tensor<S>, Tensor<S>> barred_torsion_mixed(const BaseTensorsT<S>& base, const HVectorDataT<S>& h,
                                                     const ChangeScalarsT<S>& sc);

/// What the printed C_bar^i_jk carries beyond g_bar^ir C_bar_rjk when b is
/// not an exact h-vector: -p (q2 l^i + q3 m^i) Delta_jk / L with
/// Delta = L C^h_jk b_h - rho h_jk.
Tensor<double> mixed_torsion_defect_term(const BaseTensors& base, const HVectorData& h, const ChangeScalars& sc);

template <class S>
struct BarredTensorsT {
  S L_bar;
  Tensor<S> l_bar, h_bar, g_bar, g_bar_inv, C_bar, C_bar_mixed, V, M;
};
using BarredTensors = BarredTensorsT<double>;

/// Every closed form at once. g_bar_inv uses `inverse_variant`; C_bar_mixed
/// is the printed C + M.
template <class S>
BarredTensorsT<S> barred_tensors(const BaseTensorsT<S>& base, const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc,
                                 Variant inverse_variant = Variant::literal);

struct IdentityResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed() const { return residual <= tolerance; }
};

/// Identities of the change on quantities that carry one fiber order, so that
/// dot-d_j Q_i is available.
std::vector<IdentityResult> change_identity_suite(const BaseTensorsT<Jet>& base, const HVectorDataT<Jet>& h,
                                                  const ChangeScalarsT<Jet>& sc);

}  // namespace finsler
