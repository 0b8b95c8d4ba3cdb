#pragma once

#include "relpose/so3.hpp"
#include "relpose/types.hpp"

namespace relpose {

/// Rigid transform (R, b).  No silent re-orthonormalization happens anywhere;
/// use rotation_drift(P.R) to audit numerical drift of the rotation block.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 b = Vec3::Zero();

  static Pose identity() { return {}; }

  Mat4 matrix() const {
    Mat4 T = Mat4::Identity();
    T.topLeftCorner<3, 3>() = R;
    T.topRightCorner<3, 1>() = b;
    return T;
  }
};

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& g);

/// 4x4 matrix form of a twist, angular block hat3(omega), last row zero.
Mat4 wedge6(const Twist& xi);

/// Group exponential of xi * dt: rotation exp_so3(omega dt), translation
/// V(omega dt) * nu dt with V the left Jacobian of exp_so3.
Pose exp_se3(const Twist& xi, double dt);

/// Adjoint of g as a 6x6 matrix: [[R, 0], [hat3(b) R, R]].
Mat6 adjoint_matrix(const Pose& g);

/// Adjoint of the Lie algebra: ad_xi = [[hat3(omega), 0], [hat3(nu), hat3(omega)]].
Mat6 ad_matrix(const Twist& xi);

/// Coadjoint ad*_xi = ad_xi^T, acting on momentum-side vectors.
Mat6 ad_star(const Twist& xi);

/// Inverse differential of the exponential in matrix form: the Bernoulli
/// series I - ad/2 + sum_k B_2k/(2k)! ad^2k truncated at order 12, accurate to
/// machine precision for |x| well inside the series' radius 2 pi.  Used by
/// the chart-based reference integrator, where |x| = O(dt).
Mat6 dexpinv_matrix(const Vec6& x);

}  // namespace relpose
