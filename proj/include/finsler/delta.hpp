#pragma once

#include <cstdint>
#include <vector>

#include "finsler/matsumoto.hpp"

namespace finsler {

/// Covariant-derivative data of the h-vector, all with respect to the base
/// Cartan connection. Subscript o is transvection by y.
template <class S>
struct DeltaIngredientsT {
  Tensor<S> b_h_deriv;  // b_i|j
  Tensor<S> E;          // (b_i|j + b_j|i) / 2
  Tensor<S> Fskew;      // (b_i|j - b_j|i) / 2
  Tensor<S> Q;          // p2 l_i + p3 m_i
  Tensor<S> B;          // K1 h_ij + K2 m_i m_j
  Tensor<S> beta_k;     // y^j b_j|k
  Tensor<double> rho_k;
  S E_oo;
  Tensor<S> E_oj;
  Tensor<S> F_so;  // F_si y^i
};
using DeltaIngredients = DeltaIngredientsT<double>;

template <class S>
DeltaIngredientsT<S> delta_ingredients(const BaseTensorsT<S>& base, const ConnectionDataT<S>& conn,
                                       const HVectorDataT<S>& h, const ChangeScalarsT<S>& sc, int fiber_order = 0);

/// Fills E, Fskew, beta_k and the transvected forms from b_i|j (Q, B from the scalars).
template <class S>
void complete_ingredients(DeltaIngredientsT<S>& ing, const BaseTensorsT<S>& base, const HVectorDataT<S>& h,
                          const ChangeScalarsT<S>& sc);

/// D^i = 1/2 g_bar^is (Q_s E_oo + 2 p2 L F_so)
template <class S>
Tensor<S> spray_delta(const DeltaIngredientsT<S>& ing, const Tensor<S>& g_bar_inv, const ChangeScalarsT<S>& sc);

/// D^i_j = g_bar^ir {-2 D^m (p C + V)_mrj + Q_r E_oj + E_oo B_rj + p2 L F_rj + Q_j F_ro + (p2/2) rho_o h_rj}
template <class S>
Tensor<S> nonlinear_delta(const DeltaIngredientsT<S>& ing, const Tensor<S>& g_bar_inv, const BaseTensorsT<S>& base,
                          const ChangeScalarsT<S>& sc, const Tensor<S>& V, const Tensor<S>& D_i);

/// D^i_jk = g_bar^is {Sigma + Q_j F_sk + Q_k F_sj + Q_s E_jk} with
/// U(a, b, c) = (p2/2) rho_c h_ab + beta_c B_ab - (p C + V)_abr D^r_c.
/// corrected: Sigma = U(s,j,k) + U(s,k,j) - U(j,k,s), the signed cyclic sum
/// taken with s in the slot of the lowered index. literal: U(j,s,k) - U(s,k,j) + U(k,j,s).
template <class S>
Tensor<S> cartan_delta(const DeltaIngredientsT<S>& ing, const Tensor<S>& g_bar_inv, const BaseTensorsT<S>& base,
                       const ChangeScalarsT<S>& sc, const Tensor<S>& V, const Tensor<S>& D_ij,
                       Variant variant = Variant::corrected);

/// dot-d_k D^i_j from fiber jets of D^i_j, laid out (i, j, k).
Tensor<double> berwald_delta(const Tensor<Jet>& D_ij);

struct DeltaTensors {
  Tensor<double> D_i, D_ij, D_ijk;
  Tensor<double> barred_G, barred_N, barred_F;
  Tensor<double> D_berwald, barred_G_berwald;  // empty without fiber jets
};

/// Identities of the three deltas (transvections, and with jets dot-d_j D^i = D^i_j).
std::vector<IdentityResult> delta_transvection_checks(const Tensor<double>& y, const Tensor<double>& D_i,
                                           const Tensor<double>& D_ij, const Tensor<double>& D_ijk,
                                           double tolerance);
std::vector<IdentityResult> delta_fiber_checks(const Tensor<Jet>& D_i, const Tensor<Jet>& D_ij,
                                               const Tensor<double>& y);

/// Synthetic ingredient set obeying exactly the structural identities the
/// delta formulas consume, independent of any metric.
struct SandboxOptions {
  bool E = true;
  bool Fskew = true;
  bool rho_k = true;
  bool random_mask = false;  // each enabled ingredient kept with probability 1/2
};

struct SandboxCase {
  BaseTensors base;
  HVectorData h;
  ChangeScalars sc;
  Tensor<double> g_bar_inv;
  Tensor<double> V;
  DeltaIngredients ing;
  Tensor<double> D_i, D_ij, D_ijk;
};

SandboxCase sandbox_generate(std::uint64_t seed, int n, const SandboxOptions& options = {});

}  // namespace finsler
