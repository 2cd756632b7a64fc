#include "regpose/so3.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regpose::so3 {

namespace {

constexpr double kGradCap = 1e3;
constexpr double kAcosClamp = 1e-7;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

bool is_rotation(const Mat3& r, double tol) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).norm();
  return ortho < tol && std::abs(r.determinant() - 1.0) < tol;
}

Mat3 rotvec_to_matrix(const Vec3& v) {
  const double theta = v.norm();
  if (theta < 1e-12) return Mat3::Identity();
  const Mat3 k = skew(v / theta);
  return Mat3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * k * k;
}

Vec3 matrix_to_rotvec(const Mat3& r) {
  if (!is_rotation(r)) throw std::invalid_argument("matrix_to_rotvec: input is not a rotation matrix");

  const double cos_theta = clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));

  if (theta < 1e-7) return 0.5 * w;

  if (theta > kPi - 1e-6) {
    // sin(theta) vanishes; recover the axis from (R + I)/2, whose symmetric
    // part equals v v^T up to O((pi - theta)^2). The dominant diagonal picks
    // the reference component, the off-diagonal row fixes relative signs.
    const Mat3 b = 0.5 * (r + Mat3::Identity());
    int dom = 0;
    b.diagonal().maxCoeff(&dom);
    Vec3 axis = Vec3::Zero();
    axis[dom] = std::sqrt(std::max(b(dom, dom), 0.0));
    for (int i = 0; i < 3; ++i) {
      if (i != dom) axis[i] = 0.5 * (b(dom, i) + b(i, dom)) / axis[dom];
    }
    axis.normalize();
    // Off the exact half turn the skew part still carries the sign.
    if (theta < kPi && axis.dot(w) < 0.0) axis = -axis;
    return theta * axis;
  }

  // w = 2 sin(theta) * axis: take the direction from w and the magnitude from
  // the trace. Dividing w by sin(theta) instead would amplify the arccos
  // rounding near pi by 1/(pi - theta).
  return theta * w.normalized();
}

double geodesic_distance(const Mat3& r_a, const Mat3& r_b) {
  // atan2 evaluation of arccos((tr - 1)/2): same function on SO(3), but well
  // conditioned at both ends (exact 0 for identical inputs).
  const Mat3 m = r_a.transpose() * r_b;
  const Vec3 w(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  return std::atan2(0.5 * w.norm(), clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0));
}

GeodesicGrad geodesic_loss_grad(const Vec3& v_pred, const Mat3& r_gt) {
  GeodesicGrad out;
  const Mat3 r = rotvec_to_matrix(v_pred);
  const double raw = ((r.transpose() * r_gt).trace() - 1.0) / 2.0;
  out.distance = std::acos(clamp(raw, -1.0, 1.0));

  const double arg = clamp(raw, -1.0 + kAcosClamp, 1.0 - kAcosClamp);
  out.clamped = arg != raw;
  const double dacos = -1.0 / std::sqrt(1.0 - arg * arg);

  const double theta2 = v_pred.squaredNorm();
  for (int k = 0; k < 3; ++k) {
    Mat3 dr;
    if (theta2 < 1e-14) {
      dr = skew(Vec3::Unit(k));
    } else {
      // Gallego-Yezzi: dR/dv_k = (v_k [v]x + [v x (I - R) e_k]x) / |v|^2 * R.
      const Vec3 col = v_pred.cross((Mat3::Identity() - r).col(k));
      dr = ((v_pred[k] * skew(v_pred) + skew(col)) / theta2) * r;
    }
    const double darg = 0.5 * (dr.transpose() * r_gt).trace();
    double g = dacos * darg;
    if (std::abs(g) > kGradCap) {
      g = std::copysign(kGradCap, g);
      out.clamped = true;
    }
    out.grad[k] = g;
  }
  return out;
}

Mat3 sample_uniform_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double x1 = unit(rng);
  const double x2 = unit(rng);
  const double x3 = unit(rng);

  const Mat3 rz = rot_z(2.0 * kPi * x1);
  // Reflection through a random plane whose normal is drawn uniformly from
  // the upper hemisphere, then negated: -(I - 2 n n^T) Rz is a rotation.
  const Vec3 n(std::cos(2.0 * kPi * x2) * std::sqrt(x3),
               std::sin(2.0 * kPi * x2) * std::sqrt(x3),
               std::sqrt(1.0 - x3));
  const Mat3 h = Mat3::Identity() - 2.0 * n * n.transpose();
  return -h * rz;
}

Mat3 sample_halfspace_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> half(-kPi / 2.0, kPi / 2.0);
  const double ax = half(rng);
  const double ay = half(rng);
  const double az = half(rng);
  return rot_z(az) * rot_y(ay) * rot_x(ax);
}

Mat3 rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return m;
}

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, 0, s,
       0, 1, 0,
      -s, 0, c;
  return m;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return m;
}

Vec3 fold_rotvec(const Vec3& v) {
  const double theta = v.norm();
  if (theta <= kPi) return v;
  return v * (1.0 - 2.0 * kPi / theta);
}

}  // namespace regpose::so3
