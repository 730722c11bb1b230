#pragma once

#include <vector>

#include "finsler/fundamental.hpp"
#include "finsler/metric_defs.hpp"

namespace finsler {

/// The h-vector b_i = c_i(x) + rho(x) l_i at one point and the scalars built on it.
template <class S>
struct HVectorDataT {
  Tensor<S> b;
  S beta;
  double tau = 0.0;  // L / beta; infinite when beta = 0
  S s;               // beta / L
  S rho;
  Tensor<S> m;       // m_i = b_i - s l_i
  S m2;              // m^i m_i
  S b2;              // b^i b_i
  Tensor<double> rho_k;   // d_k rho
  std::vector<Jet> b_jet;  // b_i as (x, y) jets of orders (1, 3)
};

using HVectorData = HVectorDataT<double>;

HVectorData make_h_vector(const HVectorSpec& spec, const ScalarField& L, const FiberPoint& p);

/// From a precomputed metric jet and base tensors of the same type and fiber order.
template <class S>
HVectorDataT<S> h_vector_from(const HVectorSpec& spec, const Jet& L, const FiberPoint& p,
                              const BaseTensorsT<S>& base, int fiber_order = 0);

/// Frobenius norm of L C^h_ij b_h - rho h_ij; zero iff b is an exact h-vector at p.
double h_vector_defect(const ScalarField& L, const HVectorData& b, const FiberPoint& p);
double h_vector_defect(const BaseTensors& base, const HVectorData& b);

/// b_i as a tensor field, for covariant differentiation.
TensorField h_vector_field(const HVectorSpec& spec, const ScalarField& L);

}  // namespace finsler
