#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

#include "regpose/so3.hpp"

namespace regpose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// 3D scalar grid. Physical position of voxel (i,j,k) is
/// origin + (i,j,k) .* spacing (mm); data is x-fastest.
struct Volume {
  std::array<int, 3> dims{0, 0, 0};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};
  std::vector<double> data;

  Volume() = default;
  Volume(std::array<int, 3> d, const Vec3& sp, const Vec3& org)
      : dims(d), spacing(sp), origin(org),
        data(static_cast<size_t>(d[0]) * d[1] * d[2], 0.0) {}

  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) + static_cast<size_t>(dims[0]) * (static_cast<size_t>(j) + static_cast<size_t>(dims[1]) * k);
  }
  double& at(int i, int j, int k) { return data[index(i, j, k)]; }
  double at(int i, int j, int k) const { return data[index(i, j, k)]; }

  Vec3 voxel_to_physical(double i, double j, double k) const {
    return origin + Vec3(i * spacing.x(), j * spacing.y(), k * spacing.z());
  }
  /// Geometric center of the grid; the default rotation center.
  Vec3 center() const {
    return voxel_to_physical((dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0, (dims[2] - 1) / 2.0);
  }
  size_t size() const { return data.size(); }
};

/// 2D scalar grid sharing the volume's x/y layout.
struct Slice {
  std::array<int, 2> dims{0, 0};
  Eigen::Vector2d spacing{1.0, 1.0};
  Eigen::Vector2d origin{0.0, 0.0};
  std::vector<double> data;

  Slice() = default;
  Slice(std::array<int, 2> d, const Eigen::Vector2d& sp, const Eigen::Vector2d& org)
      : dims(d), spacing(sp), origin(org), data(static_cast<size_t>(d[0]) * d[1], 0.0) {}

  size_t index(int i, int j) const { return static_cast<size_t>(i) + static_cast<size_t>(dims[0]) * j; }
  double& at(int i, int j) { return data[index(i, j)]; }
  double at(int i, int j) const { return data[index(i, j)]; }
  size_t size() const { return data.size(); }
};

/// Rigid map of physical coordinates: p -> R (p - center) + center + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 center = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * (p - center) + center + translation; }

  static RigidTransform identity(const Vec3& center = Vec3::Zero()) {
    RigidTransform t;
    t.center = center;
    return t;
  }
};

/// (t1 o t2)(p) = t1(t2(p)). Both transforms must share the center.
RigidTransform compose(const RigidTransform& t1, const RigidTransform& t2);
RigidTransform invert(const RigidTransform& t);

/// Trilinear sample at physical point p; zero outside the grid.
double sample_trilinear(const Volume& vol, const Vec3& p);

/// Output voxel at p takes the value of vol at t^-1(p). The output grid
/// equals the input grid; points mapping outside vol read as zero.
Volume resample(const Volume& vol, const RigidTransform& t);

/// resample with an extra isotropic scaling about t.center (moving image
/// magnified by `scale`); used for augmentation and size pre-correction.
Volume resample_scaled(const Volume& vol, const RigidTransform& t, double scale);

/// Axial plane of resample(vol, t) at physical height z_mm. If z_mm lies
/// outside the volume's z extent the slice is all zero and *out_of_extent
/// (when given) is set.
Slice extract_slice(const Volume& vol, const RigidTransform& t, double z_mm,
                    bool* out_of_extent = nullptr);

/// Intensity-weighted mean of voxel physical coordinates.
/// Throws std::domain_error("degenerate volume") when total intensity is 0.
Vec3 center_of_gravity(const Volume& vol);

/// Rotation whose columns are the second-moment eigenvectors about the COG,
/// ordered by descending eigenvalue, det fixed to +1. Throws
/// std::domain_error("ambiguous principal axes") when eigenvalues are
/// within 1e-6 relative of each other.
Mat3 principal_axes(const Volume& vol);

/// Separable Gaussian smoothing, sigma in voxels, replicated borders.
Volume gaussian_smooth(const Volume& vol, double sigma_voxels);
Slice gaussian_smooth(const Slice& s, double sigma_pixels);

/// Gaussian smoothing (sigma = 0.5 * factor voxels) then decimation.
/// factor must be 1, 2 or 4; spacing is multiplied by factor.
Volume downsample(const Volume& vol, int factor);
Slice downsample(const Slice& s, int factor);

}  // namespace regpose
