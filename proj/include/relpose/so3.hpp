#pragma once

#include "relpose/types.hpp"

namespace relpose {

/// Skew-symmetric matrix of w, so that hat3(a) * b = a x b.
Mat3 hat3(const Vec3& w);

/// Inverse of hat3.  Throws std::invalid_argument if the symmetric part of S
/// exceeds tolerance (Frobenius norm of S + S^T).
Vec3 vee3(const Mat3& S, double tolerance = 1e-8);

/// Rodrigues exponential.  Exact for all magnitudes; switches to a series
/// below 1e-8 rad where the closed-form coefficients lose precision.
Mat3 exp_so3(const Vec3& w);

/// Principal logarithm with |result| <= pi.  Stable near 0 (series) and near
/// pi (symmetric-part extraction with largest-diagonal pivot).
Vec3 log_so3(const Mat3& R);

/// Rotation angle of Q in [0, pi]: the magnitude of its principal logarithm,
/// i.e. arccos((trace(Q) - 1) / 2) evaluated without the arccos precision
/// floor near the endpoints.
double principal_angle(const Mat3& Q);

/// Left Jacobian of exp_so3: d/dt exp(w + t*dw) = hat3(V(w)*dw) * exp(w).
Mat3 so3_left_jacobian(const Vec3& w);

/// Right Jacobian: exp(w + dw) = exp(w) * exp(so3_right_jacobian(w) * dw)
/// to first order.  Equals the left Jacobian transposed.
Mat3 so3_right_jacobian(const Vec3& w);

/// Orthonormality and determinant drift of a nominal rotation matrix.
struct RotationDrift {
  double orthonormality;  // ||R^T R - I||_F
  double determinant;     // |det(R) - 1|
};
RotationDrift rotation_drift(const Mat3& R);

}  // namespace relpose
