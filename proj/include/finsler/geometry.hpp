#pragma once

#include <span>
#include <vector>

#include "finsler/delta.hpp"

namespace finsler {

struct GeometryOptions {
  bool fiber_jets = true;  // fiber-order-1 pass: dot-d of the deltas, identities of the change
  bool direct = true;      // base tensors and connection of L_bar itself
  Variant cyclic = Variant::corrected;
};

/// Everything the change produces at one point, by the closed forms and
/// (optionally) by differentiating L_bar directly.
struct ChangeGeometry {
  BaseTensors base;
  ConnectionData conn;
  HVectorData h;
  ChangeScalars sc;
  BarredTensors barred;  // g_bar_inv with the closing q1
  Tensor<double> g_bar_inv_literal;
  RankOneResult chain;
  DeltaIngredients ing;
  DeltaTensors delta;
  Tensor<double> D_ijk_literal;
  double defect = 0.0;

  Tensor<Jet> D_i_jet, D_ij_jet;
  std::vector<IdentityResult> identities;

  bool has_direct = false;
  BaseTensors direct_base;
  ConnectionData direct_conn;
};

/// Throws RegularityError outside the accepted domain (|s| < 1/2, p > 0,
/// det g > 0, det g_bar > 0) and SingularMetricError for a singular base.
ChangeGeometry change_geometry(const ScalarField& L, const HVectorSpec& h, const FiberPoint& p,
                               const GeometryOptions& options = {});

/// Both directions of "b parallel iff the deltas vanish" on a sample set.
/// The converse is only empirical: a sample with vanishing D^i_jk and a
/// non-parallel b is counted as a violation.
struct ParallelCertificate {
  int samples = 0;
  int parallel_samples = 0;    // |b_i|j| <= tolerance
  int zero_delta_samples = 0;  // |D^i_jk| <= tolerance
  int forward_violations = 0;
  int converse_violations = 0;
  double max_b_deriv = 0.0, min_b_deriv = 0.0;
  double max_delta = 0.0, min_delta = 0.0;

  bool forward_holds() const { return forward_violations == 0; }
  bool converse_holds() const { return converse_violations == 0; }
};

ParallelCertificate parallel_b_certificate(std::span<const ChangeGeometry> samples, double tolerance = 1e-10);

}  // namespace finsler
