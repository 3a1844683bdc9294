#pragma once

#include <Eigen/Dense>

namespace pipgd {

// All numerics are 64-bit; entropy terms at small regularization are
// ill-conditioned in single precision.
using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace pipgd
