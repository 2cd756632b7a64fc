#include "regpose/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace regpose {

namespace {

constexpr int kGridDim = 32;
constexpr double kSpacing = 2.0;  // mm

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Soft ellipsoid membership: 1 inside, smooth falloff over [edge, 1] in
// normalized radius, 0 outside.
double soft_mask(const Vec3& d, const Vec3& semi, double edge = 0.88) {
  const double rho = d.cwiseQuotient(semi).norm();
  return smoothstep((1.0 - rho) / (1.0 - edge));
}

struct Blob {
  Vec3 offset;   // mm, canonical scale
  Vec3 semi;     // mm
  double value;  // shade inside
};

}  // namespace

Volume generate_phantom(const PhantomSpec& spec) {
  if (spec.age_scale < 0.6 || spec.age_scale > 1.2) {
    throw std::invalid_argument("generate_phantom: age_scale out of [0.6, 1.2]");
  }
  if (spec.shape_jitter < 0.0 || spec.shape_jitter > 0.15) {
    throw std::invalid_argument("generate_phantom: shape_jitter out of [0, 0.15]");
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto jit = [&](double scale) { return 1.0 + spec.shape_jitter * scale * u(rng); };

  const double s = spec.age_scale;
  Vec3 outer(22.0 * s * jit(1.0), 17.0 * s * jit(1.0), 12.5 * s * jit(1.0));
  outer = outer.cwiseMin(29.0);

  Blob blobs[4] = {
      {Vec3(7.0, -4.0, 3.0), Vec3(5.5, 4.5, 3.5), 0.15},
      {Vec3(-8.0, 5.0, -2.5), Vec3(4.5, 3.5, 3.0), 0.95},
      {Vec3(2.5, 6.5, -6.0), Vec3(3.5, 3.0, 4.0), 0.72},
      {Vec3(-3.0, -7.0, -5.0), Vec3(3.0, 3.5, 2.5), 0.35},
  };
  for (Blob& b : blobs) {
    for (int i = 0; i < 3; ++i) b.offset[i] = b.offset[i] * s + spec.shape_jitter * 15.0 * u(rng);
    for (int i = 0; i < 3; ++i) b.semi[i] *= s * jit(0.8);
    b.value = std::clamp(b.value + spec.shape_jitter * 0.8 * u(rng), 0.12, 0.98);
  }

  const Vec3 grad_dir = Vec3(1.0, 0.6, 0.35).normalized();
  const double grad_radius = 22.0 * s;

  Volume vol({kGridDim, kGridDim, kGridDim}, Vec3::Constant(kSpacing), Vec3::Zero());
  const Vec3 c = vol.center();

  size_t idx = 0;
  for (int k = 0; k < kGridDim; ++k) {
    for (int j = 0; j < kGridDim; ++j) {
      for (int i = 0; i < kGridDim; ++i, ++idx) {
        const Vec3 d = vol.voxel_to_physical(i, j, k) - c;
        const double support = soft_mask(d, outer);
        if (support <= 0.0) continue;

        double shade = 0.45 + 0.35 * (std::clamp(d.dot(grad_dir) / grad_radius, -1.0, 1.0) + 1.0) / 2.0;
        for (const Blob& b : blobs) {
          const double m = soft_mask(d - b.offset, b.semi, 0.7);
          shade = (1.0 - m) * shade + m * b.value;
        }
        vol.data[idx] = std::clamp(support * shade, 0.0, 1.0);
      }
    }
  }

  vol = gaussian_smooth(vol, 0.5);
  if (spec.contrast == Contrast::inverted) vol = invert_contrast(vol);
  return vol;
}

Volume invert_contrast(const Volume& vol, double background_eps) {
  double vmax = 0.0;
  double vmin = std::numeric_limits<double>::infinity();
  for (double x : vol.data) {
    if (x > background_eps) {
      vmax = std::max(vmax, x);
      vmin = std::min(vmin, x);
    }
  }
  Volume out = vol;
  if (!std::isfinite(vmin)) return out;  // nothing above background
  for (double& x : out.data) {
    if (x > background_eps) x = vmax + vmin - x;
  }
  return out;
}

namespace {

void add_noise(std::vector<double>& data, double sigma, uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (double& x : data) x += n(rng);
}

}  // namespace

TrainingSample make_volume_sample_with(const Volume& vol, const Mat3& rotation, double scale,
                                       const SampleOptions& opt, uint64_t noise_seed) {
  RigidTransform t = RigidTransform::identity(vol.center());
  t.rotation = rotation;
  Volume moved = resample_scaled(vol, t, scale);
  add_noise(moved.data, opt.noise_sigma, noise_seed);

  TrainingSample sample;
  sample.input = std::move(moved);
  sample.gt_rotation = so3::matrix_to_rotvec(rotation);
  sample.derived_seed = noise_seed;
  return sample;
}

TrainingSample make_slice_sample_with(const Volume& vol, const Mat3& rotation, double z_mm,
                                      const SampleOptions& opt, uint64_t noise_seed) {
  RigidTransform t = RigidTransform::identity(vol.center());
  t.rotation = rotation;
  Slice s = extract_slice(vol, t, z_mm);
  add_noise(s.data, opt.noise_sigma, noise_seed);

  TrainingSample sample;
  sample.input = std::move(s);
  sample.gt_rotation = so3::matrix_to_rotvec(rotation);
  sample.gt_slice_z = z_mm;
  sample.derived_seed = noise_seed;
  return sample;
}

TrainingSample make_correction_sample_with(const Volume& vol, const Mat3& rotation,
                                           const Vec3& translation, const SampleOptions& opt,
                                           uint64_t noise_seed) {
  RigidTransform t = RigidTransform::identity(vol.center());
  t.rotation = rotation;
  t.translation = translation;
  Volume moved = resample(vol, t);
  add_noise(moved.data, opt.noise_sigma, noise_seed);

  TrainingSample sample;
  sample.input = std::move(moved);
  sample.gt_rotation = so3::matrix_to_rotvec(rotation);
  sample.gt_translation = translation;
  sample.derived_seed = noise_seed;
  return sample;
}

TrainingSample make_volume_sample(const Volume& vol, std::mt19937_64& rng, const SampleOptions& opt) {
  const Mat3 r = so3::sample_uniform_rotation(rng);
  std::uniform_real_distribution<double> us(0.95, 1.05);
  const double scale = us(rng);
  const uint64_t noise_seed = rng();
  return make_volume_sample_with(vol, r, scale, opt, noise_seed);
}

TrainingSample make_slice_sample(const Volume& vol, std::mt19937_64& rng, const SampleOptions& opt) {
  const Mat3 r = so3::sample_halfspace_rotation(rng);
  const auto [z_lo, z_hi] = middle_z_range(vol);
  std::uniform_real_distribution<double> uz(z_lo, z_hi);
  const double z = uz(rng);
  const uint64_t noise_seed = rng();
  return make_slice_sample_with(vol, r, z, opt, noise_seed);
}

TrainingSample make_correction_sample(const Volume& vol, std::mt19937_64& rng, const SampleOptions& opt) {
  std::uniform_real_distribution<double> ur(-so3::kPi / 6.0, so3::kPi / 6.0);
  const double ax = ur(rng), ay = ur(rng), az = ur(rng);
  const Mat3 r = so3::rot_z(az) * so3::rot_y(ay) * so3::rot_x(ax);
  std::uniform_real_distribution<double> ut(-7.0, 7.0);
  const Vec3 t(ut(rng), ut(rng), ut(rng));
  const uint64_t noise_seed = rng();
  return make_correction_sample_with(vol, r, t, opt, noise_seed);
}

std::pair<double, double> middle_z_range(const Volume& vol) {
  const double extent = (vol.dims[2] - 1) * vol.spacing.z();
  const double z_mid = vol.origin.z() + extent / 2.0;
  return {z_mid - 0.33 * extent, z_mid + 0.33 * extent};
}

PhantomSpec subject_spec(uint64_t master_seed, int subject_id, double age_lo, double age_hi,
                         Contrast contrast) {
  std::mt19937_64 rng(derive_seed(master_seed, 0xF00D, static_cast<uint64_t>(subject_id)));
  PhantomSpec spec;
  spec.seed = rng();
  std::uniform_real_distribution<double> ua(age_lo, age_hi);
  spec.age_scale = ua(rng);
  std::uniform_real_distribution<double> uj(0.03, 0.12);
  spec.shape_jitter = uj(rng);
  spec.contrast = contrast;
  return spec;
}

uint64_t derive_seed(uint64_t master_seed, uint64_t stream, uint64_t index) {
  // splitmix64 over the packed inputs: cheap, well-spread, stable.
  uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (stream + 1) + index;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace regpose
