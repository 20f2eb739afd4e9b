#pragma once

#include "spikereg/linear_dynamics.hpp"
#include "spikereg/types.hpp"

namespace spikereg {

struct FilterState {
  Vec xhat;
  Mat P;
  double t = 0.0;
};

enum class EstimatorVariant { kalman, msif };

struct MsifConfig {
  double delta = 0.005;  // saturation width of the sliding boundary layer
};

// Euler step of the continuous Riccati equation
//   P' = P + dt (A P + P A^T + Q - P C^T R^{-1} C P)
// symmetrized after the update. Uses the design model's matrices.
Mat kf_riccati_step(const Mat& P, const LtiModel& design, double dt);

// C P C^T + R
Mat innovation_covariance(const Mat& P, const Mat& C, const Mat& R);

// Kalman gain P C^T R^{-1}.
Mat kf_gain(const Mat& P, const Mat& C, const Mat& R);

// Elementwise min(v_i, 1). Throws config_error on negative entries.
Vec saturate(const Vec& v);

// Robust gain C^+ diag(sat(diag(P_zz) / delta)). Falls back to the
// saturated Kalman structure of the sliding innovation filter.
Mat msif_gain(const Mat& P_zz, const Mat& C, double delta);

// Moore-Penrose pseudoinverse via a complete orthogonal decomposition.
Mat pseudo_inverse(const Mat& M);

// One estimator step
//   xhat' = xhat + dt (A xhat + B u + K (z - C xhat))
// with K per the chosen variant, computed from the incoming P; P is then
// propagated with kf_riccati_step. Both variants share the same P.
FilterState estimator_step(const FilterState& fs, const LtiModel& design,
                           const Vec& u, const Vec& z,
                           EstimatorVariant variant, const MsifConfig& cfg,
                           double dt);

}  // namespace spikereg
