#pragma once

#include <random>

#include "spikereg/rng.hpp"
#include "spikereg/types.hpp"

namespace spikereg {

// Continuous-time LTI plant sampled with an explicit Euler-Maruyama scheme:
//   x_{k+1} = x_k + dt (A x_k + B u_k) + w_k,   w_k ~ N(0, Q dt)
//   z_k     = C x_k + s d_k,                    d_k ~ N(0, R)
// where s is an optional outlier scale applied to the drawn noise.
struct LtiModel {
  Mat A;  // n_x * n_x
  Mat B;  // n_x * n_u
  Mat C;  // n_z * n_x
  Mat Q;  // process noise covariance, symmetric PSD
  Mat R;  // measurement noise covariance, symmetric PD
  double dt = 0.0;

  int n_states() const { return static_cast<int>(A.rows()); }
  int n_inputs() const { return static_cast<int>(B.cols()); }
  int n_outputs() const { return static_cast<int>(C.rows()); }
};

struct PlantState {
  Vec x;
  double t = 0.0;
};

// Orbit constants for the rendezvous scenario.
struct CwParams {
  double mu_earth = 3.986004418e14;  // m^3/s^2
  double orbit_radius = 6.771e6;     // m
};

// Throws config_error if dimensions are inconsistent, Q/R are not symmetric
// PSD (R must be PD), or dt <= 0.
void validate_model(const LtiModel& m);

// Position/velocity benchmark plant with B = [0 1]^T, C = [1 0],
// Q = 1e-3 I, R = 1e-2, dt = 0.01. The default form is the controllable
// double integrator A = [[0 1],[0 0]]. The decoupled form keeps
// A = diag(0, 1), which is not controllable from this B and exists for
// side-by-side comparison only.
enum class WorkbenchForm { double_integrator, decoupled };
LtiModel build_workbench(WorkbenchForm form = WorkbenchForm::double_integrator);

// n = sqrt(mu / a^3). Throws config_error on nonpositive inputs.
double mean_motion(const CwParams& p);

// Relative-motion plant about a circular-orbit target, state
// [r_x r_y r_z v_x v_y v_z], force inputs on the velocities, position-only
// measurements C = [I3 0]. velocity_coupled reproduces the matrix used by
// the simulation studies (the cross-axis restoring terms act on
// velocities); classic is the textbook form with displacement coupling and
// a 3n^2 radial restoring term.
enum class CwForm { velocity_coupled, classic };
LtiModel build_cw(double n, double dt, const Mat& Q, const Mat& R,
                  CwForm form = CwForm::velocity_coupled);

// One Euler-Maruyama step. Process noise is skipped when noise_on is false.
PlantState step_plant(const LtiModel& m, const PlantState& s, const Vec& u,
                      std::mt19937_64& gen, bool noise_on);

// Samples z = C x + outlier_scale * d with d ~ N(0, R). Noise (and the
// outlier scale with it) is skipped when noise_on is false.
Vec measure(const LtiModel& m, const Vec& x, std::mt19937_64& gen,
            bool noise_on, double outlier_scale = 1.0);

}  // namespace spikereg
