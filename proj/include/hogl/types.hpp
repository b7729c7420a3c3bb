#pragma once

#include <Eigen/Dense>

namespace hogl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace hogl
