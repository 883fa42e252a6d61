#ifndef BILAT_TYPES_HPP_
#define BILAT_TYPES_HPP_

#include <Eigen/Dense>

namespace bilat {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

}  // namespace bilat

#endif  // BILAT_TYPES_HPP_
