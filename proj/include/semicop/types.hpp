#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace semicop {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace semicop
