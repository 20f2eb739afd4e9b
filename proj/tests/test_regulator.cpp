#include "spikereg/regulator.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "spikereg/errors.hpp"
#include "spikereg/linear_dynamics.hpp"

using namespace spikereg;

namespace {

Mat care_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                  const Mat& S) {
  return A.transpose() * S + S * A -
         S * B * R.inverse() * B.transpose() * S + Q;
}

bool is_hurwitz(const Mat& M) {
  return Eigen::EigenSolver<Mat>(M).eigenvalues().real().maxCoeff() < 0.0;
}

}  // namespace

TEST_CASE("scalar Riccati equation has the unit solution") {
  // a = 0, b = q = r = 1: -s^2 + 1 = 0, stabilizing root s = 1.
  const Mat A = Mat::Zero(1, 1);
  const Mat B = Mat::Identity(1, 1);
  const Mat I = Mat::Identity(1, 1);
  const Mat S = solve_care(A, B, I, I);
  CHECK(S(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lqr_gain(S, B, I)(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("double-integrator regulator matches the analytic design") {
  const LtiModel m = build_workbench();
  const Mat Qc = Mat::Identity(2, 2);
  const Mat Rc = Mat::Identity(1, 1);
  const LqrDesign d = design_lqr(m.A, m.B, Qc, Rc);

  // Hand solution: S = [[sqrt(3), 1], [1, sqrt(3)]], K = [1, sqrt(3)].
  const double s3 = std::sqrt(3.0);
  CHECK(d.S(0, 0) == doctest::Approx(s3).epsilon(1e-9));
  CHECK(d.S(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.S(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.S(1, 1) == doctest::Approx(s3).epsilon(1e-9));
  CHECK(d.K(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.K(0, 1) == doctest::Approx(s3).epsilon(1e-9));

  const double res = care_residual(m.A, m.B, Qc, Rc, d.S).norm();
  CHECK(res <= 1e-8 * (1.0 + d.S.norm()));
  CHECK(is_hurwitz(m.A - m.B * d.K));
}

TEST_CASE("orbital regulator solves its Riccati equation") {
  const LtiModel m = build_cw(1.1332e-3, 0.1, Mat::Identity(6, 6) * 1e-12,
                              Mat::Identity(3, 3) * 1e-2);
  const Mat Qc = Mat::Identity(6, 6) * 1e-6;
  const Mat Rc = Mat::Identity(3, 3);
  const LqrDesign d = design_lqr(m.A, m.B, Qc, Rc);
  CHECK(care_residual(m.A, m.B, Qc, Rc, d.S).norm() <=
        1e-8 * (1.0 + d.S.norm()));
  CHECK(d.S.isApprox(d.S.transpose(), 1e-10));
  CHECK(is_hurwitz(m.A - m.B * d.K));
}

TEST_CASE("random stabilizable systems solve within the residual bound") {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 4, m = 2;
    Mat A(n, n), B(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = nd(gen);
      for (int j = 0; j < m; ++j) B(i, j) = nd(gen);
    }
    const Mat Q = Mat::Identity(n, n);
    const Mat R = Mat::Identity(m, m);
    const Mat S = solve_care(A, B, Q, R);
    CHECK(care_residual(A, B, Q, R, S).norm() <= 1e-8 * (1.0 + S.norm()));
    CHECK(is_hurwitz(A - B * (R.inverse() * B.transpose() * S)));
    Eigen::SelfAdjointEigenSolver<Mat> eig(S);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("unstabilizable or malformed problems are rejected") {
  const Mat I = Mat::Identity(1, 1);
  SUBCASE("unstable mode with no input authority") {
    CHECK_THROWS_AS(solve_care(I, Mat::Zero(1, 1), I, I), solver_error);
  }
  SUBCASE("singular control weight") {
    const LtiModel m = build_workbench();
    CHECK_THROWS_AS(solve_care(m.A, m.B, Mat::Identity(2, 2),
                               Mat::Zero(1, 1)),
                    config_error);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(solve_care(Mat::Zero(2, 2), Mat::Zero(1, 1),
                               Mat::Identity(2, 2), I),
                    config_error);
  }
}

TEST_CASE("control law regulates toward the desired state") {
  Mat K(1, 2);
  K << 1.0, std::sqrt(3.0);
  Vec xhat(2), xd(2);
  xhat << 2.0, 0.0;
  xd << 1.0, 0.0;
  const Vec u = control_law(K, xhat, xd);
  CHECK(u(0) == doctest::Approx(-1.0));
  CHECK(control_law(K, xd, xd)(0) == doctest::Approx(0.0));
}

TEST_CASE("quadratic cost accumulates state and input terms") {
  // Two steps of constant x = [1, 0], u = [2] with unit weights and dt =
  // 0.5: cost = 2 * 0.5 * (1 + 4) = 5.
  const Vec x = (Vec(2) << 1.0, 0.0).finished();
  const Vec u = (Vec(1) << 2.0).finished();
  const std::vector<Vec> xs{x, x};
  const std::vector<Vec> us{u, u};
  const double j = lqr_cost(xs, us, Mat::Identity(2, 2), Mat::Identity(1, 1),
                            0.5);
  CHECK(j == doctest::Approx(5.0));
}
