#pragma once

#include <Eigen/Core>

#include <random>

namespace regpose::so3 {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Skew-symmetric operator: skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// True if R is orthogonal with det(R) = 1 within tol.
bool is_rotation(const Mat3& r, double tol = 1e-6);

/// Rodrigues formula. Angles below 1e-12 return exact identity.
Mat3 rotvec_to_matrix(const Vec3& v);

/// Matrix log. Throws std::invalid_argument if r violates the rotation
/// invariants beyond 1e-6. Handles the theta -> pi branch via the diagonal
/// of (R + I)/2.
Vec3 matrix_to_rotvec(const Mat3& r);

/// Riemannian distance on SO(3) in radians, in [0, pi].
double geodesic_distance(const Mat3& r_a, const Mat3& r_b);

struct GeodesicGrad {
  Vec3 grad;        // d distance / d v_pred
  double distance;  // radians
  bool clamped;     // arccos argument clamp or component cap triggered
};

/// Analytic gradient of geodesic_distance(rotvec_to_matrix(v_pred), r_gt)
/// with respect to v_pred. Near the theta -> {0, pi} singularities the
/// arccos argument is clamped to [-1 + 1e-7, 1 - 1e-7] and each gradient
/// component is capped at 1e3 in magnitude.
GeodesicGrad geodesic_loss_grad(const Vec3& v_pred, const Mat3& r_gt);

/// Haar-uniform rotation (Arvo's three-variable construction).
Mat3 sample_uniform_rotation(std::mt19937_64& rng);

/// Rz(c) * Ry(b) * Rx(a) with a, b, c i.i.d. uniform on [-pi/2, pi/2].
/// Covers half of SO(3); used for slice pose training.
Mat3 sample_halfspace_rotation(std::mt19937_64& rng);

Mat3 rot_x(double angle);
Mat3 rot_y(double angle);
Mat3 rot_z(double angle);

/// Canonical representative with angle <= pi. Vectors with norm > pi map to
/// the same rotation with the axis flipped and angle 2*pi - |v|.
Vec3 fold_rotvec(const Vec3& v);

}  // namespace regpose::so3
