#pragma once

#include <vector>

#include "spikereg/types.hpp"

namespace spikereg {

// Reference the controller regulates toward. Zero for both stock scenarios.
struct DesiredState {
  Vec x;
  Vec x_dot;
};

inline DesiredState zero_desired(int n_states) {
  return DesiredState{Vec::Zero(n_states), Vec::Zero(n_states)};
}

struct LqrDesign {
  Mat S;  // stabilizing solution of the algebraic Riccati equation
  Mat K;  // state-feedback gain R^{-1} B^T S
};

// Stabilizing solution of A^T S + S A - S B R^{-1} B^T S + Q = 0 via the
// Hamiltonian eigendecomposition, polished with Newton steps when needed.
// Guarantees residual <= 1e-8 * (1 + ||S||_F) or throws solver_error.
// Throws config_error for inconsistent dimensions or singular R.
Mat solve_care(const Mat& A, const Mat& B, const Mat& Q, const Mat& R);

Mat lqr_gain(const Mat& S, const Mat& B, const Mat& R);

LqrDesign design_lqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R);

// u = -K (xhat - x_desired)
Vec control_law(const Mat& K, const Vec& xhat, const Vec& x_desired);

// Discretized quadratic cost: sum_k dt (x_k^T Q x_k + u_k^T R u_k).
double lqr_cost(const std::vector<Vec>& xs, const std::vector<Vec>& us,
                const Mat& Q, const Mat& R, double dt);

}  // namespace spikereg
