#pragma once

#include <Eigen/Dense>

namespace qlgvi {

using Vector3 = Eigen::Vector3d;
using Vector4 = Eigen::Vector4d;
using Matrix3 = Eigen::Matrix3d;
using Matrix34 = Eigen::Matrix<double, 3, 4>;

}  // namespace qlgvi
