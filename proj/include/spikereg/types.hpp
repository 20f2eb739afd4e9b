#pragma once

#include <Eigen/Dense>

namespace spikereg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

}  // namespace spikereg
