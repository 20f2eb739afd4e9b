#include "spikereg/rng.hpp"

#include "spikereg/errors.hpp"

namespace spikereg {

Vec sample_gaussian(std::mt19937_64& gen, const Mat& cov) {
  if (cov.rows() != cov.cols()) {
    throw config_error("covariance must be square");
  }
  const auto n = cov.rows();
  std::normal_distribution<double> unit(0.0, 1.0);
  Vec xi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xi[i] = unit(gen);
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw solver_error("eigendecomposition of covariance failed");
  }
  if (eig.eigenvalues().minCoeff() < -1e-10 * (1.0 + cov.norm())) {
    throw config_error("covariance must be positive semidefinite");
  }
  const Vec sqrt_ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * sqrt_ev.asDiagonal() * xi;
}

}  // namespace spikereg
