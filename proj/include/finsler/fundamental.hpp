#pragma once

#include <functional>
#include <vector>

#include "finsler/field.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

/// Fundamental tensors of a Finsler space at one point. With S = Jet every
/// component is a jet in y alone (x frozen) of the requested fiber order, so
/// that y-derivatives of derived quantities stay available.
template <class S>
struct BaseTensorsT {
  S L;
  S det_g;
  Tensor<S> y;        // support element y^i
  Tensor<S> l;        // l_i
  Tensor<S> g;        // g_ij
  Tensor<S> g_inv;    // g^ij
  Tensor<S> h;        // h_ij
  Tensor<S> C;        // C_ijk
  Tensor<S> C_mixed;  // C^i_jk
};

template <class S>
struct ConnectionDataT {
  Tensor<S> gamma;    // gamma^i_jk
  Tensor<S> G;        // spray G^i
  Tensor<S> N;        // N^i_j
  Tensor<S> F;        // F^i_jk
  Tensor<S> berwald;  // G^i_jk, left empty unless requested
};

using BaseTensors = BaseTensorsT<double>;
using ConnectionData = ConnectionDataT<double>;

/// Jet of L at orders (1, 4): the single input of every derived quantity.
Jet metric_jet(const ScalarField& L, const FiberPoint& p);

/// Throws SingularMetricError when g is numerically singular.
BaseTensors base_tensors(const ScalarField& L, const FiberPoint& p);
ConnectionData connection_data(const ScalarField& L, const FiberPoint& p);

/// Same, from a precomputed metric_jet. For S = Jet the results are fiber
/// jets of order `fiber_order`: base tensors allow fiber_order <= 1,
/// connections allow fiber_order <= 1 without Berwald coefficients and 0 with.
template <class S>
BaseTensorsT<S> base_tensors_from(const Jet& L, const FiberPoint& p, int fiber_order = 0);
template <class S>
ConnectionDataT<S> connection_from(const Jet& L, const FiberPoint& p, const BaseTensorsT<S>& base,
                                   int fiber_order = 0, bool with_berwald = true);

/// y^i as a quantity of type S.
template <class S>
Tensor<S> support_vector(const FiberPoint& p, int fiber_order);

/// Tensor field over (x, y), evaluated as jets. `upper[a]` tells whether
/// slot a is contravariant.
struct TensorField {
  using Evaluator = std::function<Tensor<Jet>(const FiberPoint& p, int order_x, int order_y)>;
  int dim = 2;
  std::vector<bool> upper;
  Evaluator eval;

  int rank() const { return static_cast<int>(upper.size()); }
};

TensorField scalar_tensor_field(const ScalarField& f);
TensorField support_tensor_field(int dim);                // y^i
TensorField supporting_element_field(const ScalarField& L);  // l_i
TensorField metric_tensor_field(const ScalarField& L);    // g_ij

/// T|_k = delta_k T + sum over upper slots T^..r.. F^i_rk - sum over lower slots T_..r.. F^r_jk,
/// with delta_k = d_k - N^r_k dot-d_r. The derivative index is appended last.
Tensor<double> h_cov_deriv(const TensorField& T, const ConnectionData& conn, const FiberPoint& p);

/// Same with dot-d_k and C^i_jk in place of delta_k and F^i_jk.
Tensor<double> v_cov_deriv(const TensorField& T, const BaseTensors& base, const FiberPoint& p);

}  // namespace finsler
