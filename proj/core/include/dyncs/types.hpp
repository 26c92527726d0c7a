#pragma once

#include <Eigen/Dense>

namespace dyncs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

} // namespace dyncs
