#include "spikereg/filters.hpp"

#include "spikereg/errors.hpp"

namespace spikereg {

Mat kf_riccati_step(const Mat& P, const LtiModel& design, double dt) {
  const auto n = design.A.rows();
  if (P.rows() != n || P.cols() != n) {
    throw config_error("P must match the state dimension");
  }
  Eigen::FullPivLU<Mat> r_lu(design.R);
  if (!r_lu.isInvertible()) throw config_error("R must be invertible");
  const Mat drift = design.A * P + P * design.A.transpose() + design.Q -
                    P * design.C.transpose() * r_lu.solve(design.C * P);
  Mat next = P + dt * drift;
  return 0.5 * (next + next.transpose());
}

Mat innovation_covariance(const Mat& P, const Mat& C, const Mat& R) {
  if (C.cols() != P.rows()) throw config_error("C must match P");
  if (R.rows() != C.rows()) throw config_error("R must match C");
  return C * P * C.transpose() + R;
}

Mat kf_gain(const Mat& P, const Mat& C, const Mat& R) {
  if (C.cols() != P.rows()) throw config_error("C must match P");
  Eigen::FullPivLU<Mat> r_lu(R);
  if (!r_lu.isInvertible()) throw config_error("R must be invertible");
  return r_lu.solve(C * P).transpose();
}

Vec saturate(const Vec& v) {
  if ((v.array() < 0.0).any()) {
    throw config_error("saturation input must be nonnegative");
  }
  return v.cwiseMin(1.0);
}

Mat msif_gain(const Mat& P_zz, const Mat& C, double delta) {
  if (!(delta > 0.0)) throw config_error("delta must be positive");
  if (P_zz.rows() != C.rows()) throw config_error("P_zz must match C");
  const Vec sat = saturate(Vec(P_zz.diagonal() / delta));
  return pseudo_inverse(C) * sat.asDiagonal();
}

Mat pseudo_inverse(const Mat& M) {
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(M);
  return cod.pseudoInverse();
}

FilterState estimator_step(const FilterState& fs, const LtiModel& design,
                           const Vec& u, const Vec& z,
                           EstimatorVariant variant, const MsifConfig& cfg,
                           double dt) {
  if (fs.xhat.size() != design.A.rows()) {
    throw config_error("estimate dimension does not match the model");
  }
  if (z.size() != design.C.rows()) {
    throw config_error("measurement dimension does not match the model");
  }
  Mat K;
  if (variant == EstimatorVariant::kalman) {
    K = kf_gain(fs.P, design.C, design.R);
  } else {
    const Mat P_zz = innovation_covariance(fs.P, design.C, design.R);
    K = msif_gain(P_zz, design.C, cfg.delta);
  }
  FilterState out;
  out.xhat = fs.xhat + dt * (design.A * fs.xhat + design.B * u +
                             K * (z - design.C * fs.xhat));
  out.P = kf_riccati_step(fs.P, design, dt);
  out.t = fs.t + dt;
  return out;
}

}  // namespace spikereg
