#include "relpose/se3.hpp"

namespace relpose {

Pose compose(const Pose& a, const Pose& b) {
  return {a.R * b.R, a.R * b.b + a.b};
}

Pose inverse(const Pose& g) {
  const Mat3 Rt = g.R.transpose();
  return {Rt, -(Rt * g.b)};
}

Mat4 wedge6(const Twist& xi) {
  Mat4 X = Mat4::Zero();
  X.topLeftCorner<3, 3>() = hat3(xi.omega);
  X.topRightCorner<3, 1>() = xi.nu;
  return X;
}

Pose exp_se3(const Twist& xi, double dt) {
  const Vec3 w = dt * xi.omega;
  return {exp_so3(w), so3_left_jacobian(w) * (dt * xi.nu)};
}

Mat6 adjoint_matrix(const Pose& g) {
  Mat6 A = Mat6::Zero();
  A.topLeftCorner<3, 3>() = g.R;
  A.bottomLeftCorner<3, 3>() = hat3(g.b) * g.R;
  A.bottomRightCorner<3, 3>() = g.R;
  return A;
}

Mat6 ad_matrix(const Twist& xi) {
  Mat6 A = Mat6::Zero();
  const Mat3 W = hat3(xi.omega);
  A.topLeftCorner<3, 3>() = W;
  A.bottomLeftCorner<3, 3>() = hat3(xi.nu);
  A.bottomRightCorner<3, 3>() = W;
  return A;
}

Mat6 ad_star(const Twist& xi) { return ad_matrix(xi).transpose(); }

Mat6 dexpinv_matrix(const Vec6& x) {
  // B_k / k! for k = 1, 2, 4, ..., 12 (odd coefficients beyond 1 vanish).
  static const struct {
    int k;
    double c;
  } terms[] = {{1, -1.0 / 2.0},
               {2, 1.0 / 12.0},
               {4, -1.0 / 720.0},
               {6, 1.0 / 30240.0},
               {8, -1.0 / 1209600.0},
               {10, 1.0 / 47900160.0},
               {12, -691.0 / 1307674368000.0}};
  const Mat6 ad = ad_matrix(Twist::from_vec(x));
  Mat6 result = Mat6::Identity();
  Mat6 power = Mat6::Identity();
  int applied = 0;
  for (const auto& term : terms) {
    while (applied < term.k) {
      power = (power * ad).eval();
      ++applied;
    }
    result += term.c * power;
  }
  return result;
}

}  // namespace relpose
