#pragma once

#include <Eigen/Dense>

namespace relpose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat4 = Eigen::Matrix4d;
using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Body-frame twist, angular part first.
struct Twist {
  Vec3 omega = Vec3::Zero();
  Vec3 nu = Vec3::Zero();

  Vec6 vec() const {
    Vec6 v;
    v << omega, nu;
    return v;
  }
  static Twist from_vec(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
};

/// Momentum-side velocity error (the transported difference between measured
/// and estimated twist), angular part first.  Same storage layout as Twist but
/// kept distinct because the two live on opposite sides of the adjoint map.
struct VelocityError {
  Vec3 omega = Vec3::Zero();
  Vec3 upsilon = Vec3::Zero();

  Vec6 vec() const {
    Vec6 v;
    v << omega, upsilon;
    return v;
  }
  static VelocityError from_vec(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }
};

}  // namespace relpose
