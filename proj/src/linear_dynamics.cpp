#include "spikereg/linear_dynamics.hpp"

#include <cmath>

#include "spikereg/errors.hpp"

namespace spikereg {

namespace {

void check_psd(const Mat& M, const char* name, bool strict) {
  if (M.rows() != M.cols()) {
    throw config_error(std::string(name) + " must be square");
  }
  if (!M.isApprox(M.transpose(), 1e-12)) {
    throw config_error(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(M);
  const double floor = strict ? 1e-300 : -1e-12 * (1.0 + M.norm());
  if (eig.eigenvalues().minCoeff() < floor) {
    throw config_error(std::string(name) + (strict
                           ? " must be positive definite"
                           : " must be positive semidefinite"));
  }
}

}  // namespace

void validate_model(const LtiModel& m) {
  const auto n = m.A.rows();
  if (m.A.cols() != n) throw config_error("A must be square");
  if (m.B.rows() != n) throw config_error("B row count must match A");
  if (m.C.cols() != n) throw config_error("C column count must match A");
  if (m.Q.rows() != n) throw config_error("Q must match the state dimension");
  if (m.R.rows() != m.C.rows()) {
    throw config_error("R must match the measurement dimension");
  }
  check_psd(m.Q, "Q", false);
  check_psd(m.R, "R", true);
  if (!(m.dt > 0.0)) throw config_error("dt must be positive");
}

LtiModel build_workbench(WorkbenchForm form) {
  LtiModel m;
  m.A = Mat::Zero(2, 2);
  if (form == WorkbenchForm::double_integrator) {
    m.A(0, 1) = 1.0;
  } else {
    m.A(1, 1) = 1.0;
  }
  m.B = Mat::Zero(2, 1);
  m.B(1, 0) = 1.0;
  m.C = Mat::Zero(1, 2);
  m.C(0, 0) = 1.0;
  m.Q = Mat::Identity(2, 2) / 1000.0;
  m.R = Mat::Identity(1, 1) / 100.0;
  m.dt = 0.01;
  validate_model(m);
  return m;
}

double mean_motion(const CwParams& p) {
  if (!(p.mu_earth > 0.0) || !(p.orbit_radius > 0.0)) {
    throw config_error("mean motion needs positive mu and orbit radius");
  }
  return std::sqrt(p.mu_earth / std::pow(p.orbit_radius, 3));
}

LtiModel build_cw(double n, double dt, const Mat& Q, const Mat& R,
                  CwForm form) {
  if (!(n > 0.0)) throw config_error("mean motion must be positive");
  LtiModel m;
  m.A = Mat::Zero(6, 6);
  m.A.topRightCorner(3, 3) = Mat::Identity(3, 3);
  if (form == CwForm::velocity_coupled) {
    m.A(3, 5) = 2.0 * n;
    m.A(4, 4) = -n * n;
    m.A(5, 3) = -2.0 * n;
    m.A(5, 5) = 2.0 * n * n;
  } else {
    m.A(3, 5) = 2.0 * n;
    m.A(4, 1) = -n * n;
    m.A(5, 2) = 3.0 * n * n;
    m.A(5, 3) = -2.0 * n;
  }
  m.B = Mat::Zero(6, 3);
  m.B.bottomRows(3) = Mat::Identity(3, 3);
  m.C = Mat::Zero(3, 6);
  m.C.leftCols(3) = Mat::Identity(3, 3);
  m.Q = Q;
  m.R = R;
  m.dt = dt;
  validate_model(m);
  return m;
}

PlantState step_plant(const LtiModel& m, const PlantState& s, const Vec& u,
                      std::mt19937_64& gen, bool noise_on) {
  if (s.x.size() != m.A.rows()) {
    throw config_error("state dimension does not match the model");
  }
  if (u.size() != m.B.cols()) {
    throw config_error("input dimension does not match the model");
  }
  PlantState out;
  out.x = s.x + m.dt * (m.A * s.x + m.B * u);
  if (noise_on) {
    out.x += sample_gaussian(gen, m.Q * m.dt);
  }
  out.t = s.t + m.dt;
  return out;
}

Vec measure(const LtiModel& m, const Vec& x, std::mt19937_64& gen,
            bool noise_on, double outlier_scale) {
  if (x.size() != m.C.cols()) {
    throw config_error("state dimension does not match the model");
  }
  Vec z = m.C * x;
  if (noise_on) {
    z += outlier_scale * sample_gaussian(gen, m.R);
  }
  return z;
}

}  // namespace spikereg
