#include "relpose/so3.hpp"

#include <cmath>
#include <stdexcept>

namespace relpose {

Mat3 hat3(const Vec3& w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return S;
}

Vec3 vee3(const Mat3& S, double tolerance) {
  const double sym = (S + S.transpose()).norm();
  if (!(sym < tolerance)) {
    throw std::invalid_argument("vee3: matrix is not skew-symmetric (||S + S^T|| = " +
                                std::to_string(sym) + ")");
  }
  return {0.5 * (S(2, 1) - S(1, 2)), 0.5 * (S(0, 2) - S(2, 0)),
          0.5 * (S(1, 0) - S(0, 1))};
}

Mat3 exp_so3(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = hat3(w);
  if (theta < 1e-8) {
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double s = std::sin(theta) / theta;
  const double half = std::sin(0.5 * theta);
  const double c = 2.0 * half * half / (theta * theta);  // (1 - cos)/theta^2
  return Mat3::Identity() + s * W + c * W * W;
}

Vec3 log_so3(const Mat3& R) {
  // a = vee of the antisymmetric part; ||a|| = sin(theta) for an exact rotation.
  const Vec3 a(0.5 * (R(2, 1) - R(1, 2)), 0.5 * (R(0, 2) - R(2, 0)),
               0.5 * (R(1, 0) - R(0, 1)));
  const double cos_theta =
      std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(a.norm(), cos_theta);

  if (theta < 1e-8) {
    const double t2 = theta * theta;
    return (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0) * a;
  }
  if (theta < M_PI - 1e-3) {
    return (theta / a.norm()) * a;
  }

  // Near pi the antisymmetric part vanishes; recover the axis from the
  // symmetric part, pivoting on the largest diagonal entry.
  const double one_minus_cos = 1.0 - cos_theta;
  int k = 0;
  R.diagonal().maxCoeff(&k);
  Vec3 u;
  u[k] = std::sqrt(std::max(0.0, (R(k, k) - cos_theta) / one_minus_cos));
  const Mat3 B = 0.5 * (R + R.transpose());
  for (int j = 0; j < 3; ++j) {
    if (j != k) u[j] = B(k, j) / (one_minus_cos * u[k]);
  }
  u.normalize();
  // Sign: align with the antisymmetric part when it is meaningful; at exactly
  // pi both signs are valid principal logarithms.
  if (u.dot(a) < 0.0) u = -u;
  return theta * u;
}

double principal_angle(const Mat3& Q) {
  const Vec3 a(0.5 * (Q(2, 1) - Q(1, 2)), 0.5 * (Q(0, 2) - Q(2, 0)),
               0.5 * (Q(1, 0) - Q(0, 1)));
  const double cos_theta =
      std::clamp(0.5 * (Q.trace() - 1.0), -1.0, 1.0);
  return std::atan2(a.norm(), cos_theta);
}

Mat3 so3_left_jacobian(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = hat3(w);
  double c2, c3;
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    c2 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    c3 = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    const double half = std::sin(0.5 * theta);
    c2 = 2.0 * half * half / (theta * theta);
    c3 = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Mat3::Identity() + c2 * W + c3 * W * W;
}

Mat3 so3_right_jacobian(const Vec3& w) { return so3_left_jacobian(-w); }

RotationDrift rotation_drift(const Mat3& R) {
  return {(R.transpose() * R - Mat3::Identity()).norm(),
          std::abs(R.determinant() - 1.0)};
}

}  // namespace relpose
