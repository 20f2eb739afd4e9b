#include "spikereg/regulator.hpp"

#include <cmath>
#include <complex>

#include <unsupported/Eigen/KroneckerProduct>

#include "spikereg/errors.hpp"

namespace spikereg {

namespace {

double care_residual(const Mat& A, const Mat& G, const Mat& Q, const Mat& S) {
  return (A.transpose() * S + S * A - S * G * S + Q).norm();
}

// Solves A_cl^T X + X A_cl = -W by vectorization; A_cl must be Hurwitz.
Mat solve_lyapunov(const Mat& A_cl, const Mat& W) {
  const auto n = A_cl.rows();
  const Mat I = Mat::Identity(n, n);
  Mat lhs = Eigen::kroneckerProduct(I, A_cl.transpose()).eval() +
            Eigen::kroneckerProduct(A_cl.transpose(), I).eval();
  Eigen::Map<const Vec> w(W.data(), n * n);
  Vec x = lhs.fullPivLu().solve(-w);
  Mat X = Eigen::Map<const Mat>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

}  // namespace

Mat solve_care(const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
  const auto n = A.rows();
  if (A.cols() != n) throw config_error("A must be square");
  if (B.rows() != n) throw config_error("B row count must match A");
  if (Q.rows() != n || Q.cols() != n) {
    throw config_error("Q must match the state dimension");
  }
  if (R.rows() != R.cols() || R.rows() != B.cols()) {
    throw config_error("R must match the input dimension");
  }
  Eigen::FullPivLU<Mat> r_lu(R);
  if (!r_lu.isInvertible()) throw config_error("R must be invertible");
  const Mat G = B * r_lu.solve(B.transpose());

  // Stable invariant subspace of the Hamiltonian.
  Mat H(2 * n, 2 * n);
  H << A, -G, -Q, -A.transpose();
  Eigen::ComplexEigenSolver<Mat> eig(H);
  if (eig.info() != Eigen::Success) {
    throw solver_error("Hamiltonian eigendecomposition failed");
  }
  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index picked = 0;
  for (Eigen::Index i = 0; i < 2 * n && picked < n; ++i) {
    if (eig.eigenvalues()[i].real() < 0.0) {
      basis.col(picked++) = eig.eigenvectors().col(i);
    }
  }
  if (picked != n) {
    throw solver_error(
        "no stabilizing solution: the Hamiltonian has " +
        std::to_string(picked) + " stable eigenvalues, expected " +
        std::to_string(n) + " (is (A, B) stabilizable?)");
  }
  const Eigen::MatrixXcd X1 = basis.topRows(n);
  const Eigen::MatrixXcd X2 = basis.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> x1_lu(X1);
  if (!x1_lu.isInvertible()) {
    throw solver_error("stable subspace is degenerate");
  }
  Mat S = (X2 * x1_lu.inverse()).real();
  S = 0.5 * (S + S.transpose());

  // Newton polish: each iterate solves the closed-loop Lyapunov equation.
  const double tol = 1e-8;
  double res = care_residual(A, G, Q, S);
  for (int it = 0; it < 20 && res > 0.25 * tol * (1.0 + S.norm()); ++it) {
    const Mat A_cl = A - G * S;
    const Mat W = Q + S * G * S;
    const Mat S_next = solve_lyapunov(A_cl, W);
    const double res_next = care_residual(A, G, Q, S_next);
    if (!(res_next < res)) break;
    S = S_next;
    res = res_next;
  }
  if (res > tol * (1.0 + S.norm())) {
    throw solver_error("Riccati residual " + std::to_string(res) +
                       " exceeds tolerance");
  }

  // The stabilizing solution leaves A - G S Hurwitz.
  Eigen::EigenSolver<Mat> cl(A - G * S);
  if (cl.eigenvalues().real().maxCoeff() >= 0.0) {
    throw solver_error("closed loop is not stable");
  }
  return S;
}

Mat lqr_gain(const Mat& S, const Mat& B, const Mat& R) {
  if (B.rows() != S.rows()) throw config_error("B row count must match S");
  if (R.rows() != R.cols() || R.rows() != B.cols()) {
    throw config_error("R must match the input dimension");
  }
  Eigen::FullPivLU<Mat> r_lu(R);
  if (!r_lu.isInvertible()) throw config_error("R must be invertible");
  return r_lu.solve(B.transpose() * S);
}

LqrDesign design_lqr(const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
  LqrDesign d;
  d.S = solve_care(A, B, Q, R);
  d.K = lqr_gain(d.S, B, R);
  return d;
}

Vec control_law(const Mat& K, const Vec& xhat, const Vec& x_desired) {
  if (xhat.size() != K.cols() || x_desired.size() != K.cols()) {
    throw config_error("state dimension does not match the gain");
  }
  return -K * (xhat - x_desired);
}

double lqr_cost(const std::vector<Vec>& xs, const std::vector<Vec>& us,
                const Mat& Q, const Mat& R, double dt) {
  if (xs.size() != us.size()) {
    throw config_error("state and input series must have equal length");
  }
  double j = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    j += dt * (xs[k].dot(Q * xs[k]) + us[k].dot(R * us[k]));
  }
  return j;
}

}  // namespace spikereg
