#include "regpose/volume.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regpose {

RigidTransform compose(const RigidTransform& t1, const RigidTransform& t2) {
  RigidTransform out;
  out.center = t1.center;
  out.rotation = t1.rotation * t2.rotation;
  out.translation = t1.rotation * t2.translation + t1.translation;
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.center = t.center;
  out.rotation = t.rotation.transpose();
  out.translation = -(t.rotation.transpose() * t.translation);
  return out;
}

double sample_trilinear(const Volume& vol, const Vec3& p) {
  const double fi = (p.x() - vol.origin.x()) / vol.spacing.x();
  const double fj = (p.y() - vol.origin.y()) / vol.spacing.y();
  const double fk = (p.z() - vol.origin.z()) / vol.spacing.z();

  const int i0 = static_cast<int>(std::floor(fi));
  const int j0 = static_cast<int>(std::floor(fj));
  const int k0 = static_cast<int>(std::floor(fk));

  const double di = fi - i0, dj = fj - j0, dk = fk - k0;

  double acc = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int i = i0 + (c & 1);
    const int j = j0 + ((c >> 1) & 1);
    const int k = k0 + ((c >> 2) & 1);
    if (i < 0 || j < 0 || k < 0 || i >= vol.dims[0] || j >= vol.dims[1] || k >= vol.dims[2]) continue;
    const double w = ((c & 1) ? di : 1.0 - di) * (((c >> 1) & 1) ? dj : 1.0 - dj) *
                     (((c >> 2) & 1) ? dk : 1.0 - dk);
    acc += w * vol.at(i, j, k);
  }
  return acc;
}

namespace {

Volume resample_linear_map(const Volume& vol, const Mat3& inv_linear, const Vec3& center,
                           const Vec3& translation) {
  Volume out(vol.dims, vol.spacing, vol.origin);
  size_t idx = 0;
  for (int k = 0; k < vol.dims[2]; ++k) {
    for (int j = 0; j < vol.dims[1]; ++j) {
      for (int i = 0; i < vol.dims[0]; ++i, ++idx) {
        const Vec3 p = vol.voxel_to_physical(i, j, k);
        const Vec3 q = inv_linear * (p - center - translation) + center;
        out.data[idx] = sample_trilinear(vol, q);
      }
    }
  }
  return out;
}

}  // namespace

Volume resample(const Volume& vol, const RigidTransform& t) {
  return resample_linear_map(vol, t.rotation.transpose(), t.center, t.translation);
}

Volume resample_scaled(const Volume& vol, const RigidTransform& t, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("resample_scaled: scale must be positive");
  return resample_linear_map(vol, t.rotation.transpose() / scale, t.center, t.translation);
}

Slice extract_slice(const Volume& vol, const RigidTransform& t, double z_mm, bool* out_of_extent) {
  Slice s({vol.dims[0], vol.dims[1]},
          {vol.spacing.x(), vol.spacing.y()},
          {vol.origin.x(), vol.origin.y()});

  const double z_lo = vol.origin.z();
  const double z_hi = vol.origin.z() + (vol.dims[2] - 1) * vol.spacing.z();
  const bool outside = z_mm < z_lo || z_mm > z_hi;
  if (out_of_extent) *out_of_extent = outside;
  if (outside) return s;

  const Mat3 rinv = t.rotation.transpose();
  size_t idx = 0;
  for (int j = 0; j < s.dims[1]; ++j) {
    for (int i = 0; i < s.dims[0]; ++i, ++idx) {
      const Vec3 p = vol.voxel_to_physical(i, j, 0.0) + Vec3(0, 0, z_mm - vol.origin.z());
      const Vec3 q = rinv * (p - t.center - t.translation) + t.center;
      s.data[idx] = sample_trilinear(vol, q);
    }
  }
  return s;
}

Vec3 center_of_gravity(const Volume& vol) {
  double total = 0.0;
  Vec3 acc = Vec3::Zero();
  size_t idx = 0;
  for (int k = 0; k < vol.dims[2]; ++k) {
    for (int j = 0; j < vol.dims[1]; ++j) {
      for (int i = 0; i < vol.dims[0]; ++i, ++idx) {
        const double w = vol.data[idx];
        if (w == 0.0) continue;
        total += w;
        acc += w * vol.voxel_to_physical(i, j, k);
      }
    }
  }
  if (total <= 0.0) throw std::domain_error("degenerate volume");
  return acc / total;
}

Mat3 principal_axes(const Volume& vol) {
  const Vec3 cog = center_of_gravity(vol);
  double total = 0.0;
  Mat3 second = Mat3::Zero();
  size_t idx = 0;
  for (int k = 0; k < vol.dims[2]; ++k) {
    for (int j = 0; j < vol.dims[1]; ++j) {
      for (int i = 0; i < vol.dims[0]; ++i, ++idx) {
        const double w = vol.data[idx];
        if (w == 0.0) continue;
        const Vec3 d = vol.voxel_to_physical(i, j, k) - cog;
        total += w;
        second += w * d * d.transpose();
      }
    }
  }
  second /= total;

  Eigen::SelfAdjointEigenSolver<Mat3> eig(second);
  // Solver returns ascending eigenvalues; we want descending.
  Vec3 evals = eig.eigenvalues().reverse();
  Mat3 axes;
  axes.col(0) = eig.eigenvectors().col(2);
  axes.col(1) = eig.eigenvectors().col(1);
  axes.col(2) = eig.eigenvectors().col(0);

  const double scale = std::max(evals.cwiseAbs().maxCoeff(), 1e-30);
  for (int c = 0; c + 1 < 3; ++c) {
    if ((evals[c] - evals[c + 1]) / scale < 1e-6) throw std::domain_error("ambiguous principal axes");
  }

  if (axes.determinant() < 0.0) axes.col(2) = -axes.col(2);
  return axes;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Convolve along one axis with replicated borders (preserves constants).
void convolve_axis(std::vector<double>& data, const std::array<int, 3>& dims, int axis,
                   const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size()) / 2;
  const int n = dims[axis];
  std::vector<double> line(n);
  const size_t stride_i = 1;
  const size_t stride_j = dims[0];
  const size_t stride_k = static_cast<size_t>(dims[0]) * dims[1];
  const size_t strides[3] = {stride_i, stride_j, stride_k};
  const size_t stride = strides[axis];

  const int o1 = (axis == 0) ? 1 : 0;
  const int o2 = (axis == 2) ? 1 : 2;
  for (int b = 0; b < dims[o2]; ++b) {
    for (int a = 0; a < dims[o1]; ++a) {
      const size_t base = strides[o1] * a + strides[o2] * b;
      for (int x = 0; x < n; ++x) line[x] = data[base + stride * x];
      for (int x = 0; x < n; ++x) {
        double acc = 0.0;
        for (int r = -radius; r <= radius; ++r) {
          const int src = std::clamp(x + r, 0, n - 1);
          acc += kernel[r + radius] * line[src];
        }
        data[base + stride * x] = acc;
      }
    }
  }
}

}  // namespace

Volume gaussian_smooth(const Volume& vol, double sigma_voxels) {
  Volume out = vol;
  if (sigma_voxels <= 0.0) return out;
  const auto kernel = gaussian_kernel(sigma_voxels);
  for (int axis = 0; axis < 3; ++axis) convolve_axis(out.data, out.dims, axis, kernel);
  return out;
}

Slice gaussian_smooth(const Slice& s, double sigma_pixels) {
  Slice out = s;
  if (sigma_pixels <= 0.0) return out;
  const auto kernel = gaussian_kernel(sigma_pixels);
  const std::array<int, 3> dims3{s.dims[0], s.dims[1], 1};
  for (int axis = 0; axis < 2; ++axis) convolve_axis(out.data, dims3, axis, kernel);
  return out;
}

Volume downsample(const Volume& vol, int factor) {
  if (factor != 1 && factor != 2 && factor != 4) {
    throw std::invalid_argument("downsample: factor must be 1, 2 or 4");
  }
  Volume smooth = gaussian_smooth(vol, 0.5 * factor);
  if (factor == 1) return smooth;

  const std::array<int, 3> d{(vol.dims[0] + factor - 1) / factor,
                             (vol.dims[1] + factor - 1) / factor,
                             (vol.dims[2] + factor - 1) / factor};
  Volume out(d, vol.spacing * factor, vol.origin);
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i)
        out.at(i, j, k) = smooth.at(i * factor, j * factor, k * factor);
  return out;
}

Slice downsample(const Slice& s, int factor) {
  if (factor != 1 && factor != 2 && factor != 4) {
    throw std::invalid_argument("downsample: factor must be 1, 2 or 4");
  }
  Slice smooth = gaussian_smooth(s, 0.5 * factor);
  if (factor == 1) return smooth;

  const std::array<int, 2> d{(s.dims[0] + factor - 1) / factor, (s.dims[1] + factor - 1) / factor};
  Slice out(d, s.spacing * factor, s.origin);
  for (int j = 0; j < d[1]; ++j)
    for (int i = 0; i < d[0]; ++i)
      out.at(i, j) = smooth.at(i * factor, j * factor);
  return out;
}

}  // namespace regpose
