#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "regpose/volume.hpp"

namespace regpose {

enum class Contrast { normal, inverted };

/// Parameters of one synthetic subject. Deterministic: the same spec always
/// produces the same volume, bit for bit.
struct PhantomSpec {
  uint64_t seed = 0;
  double age_scale = 1.0;        // overall size multiplier, in [0.6, 1.2]
  Contrast contrast = Contrast::normal;
  double shape_jitter = 0.08;    // per-subject variability, in [0, 0.15]
};

/// One supervised example. gt_rotation is the rotation vector applied to the
/// canonical phantom to synthesize the input (angle <= pi).
struct TrainingSample {
  std::variant<Volume, Slice> input;
  Vec3 gt_rotation = Vec3::Zero();     // radians
  Vec3 gt_translation = Vec3::Zero();  // mm, zero for pose-only samples
  double gt_slice_z = 0.0;             // mm, slice mode only
  int subject_id = 0;
  uint64_t derived_seed = 0;           // rng seed this sample was drawn with
};

/// Canonical-pose asymmetric "brain analog": outer ellipsoid with distinct
/// semi-axes, four off-center internal ellipsoids, and an oblique intensity
/// gradient. Intensities in [0, 1] on a 32^3 grid at 2 mm spacing.
Volume generate_phantom(const PhantomSpec& spec);

/// Contrast inversion that keeps the support: x -> (max + min_pos) - x for
/// x > background_eps, untouched elsewhere. An involution for eps = 0.
Volume invert_contrast(const Volume& vol, double background_eps = 0.0);

struct SampleOptions {
  double noise_sigma = 0.01;  // additive Gaussian noise after resampling
};

/// Deterministic cores: the randomized ops below draw parameters and defer
/// here. Exposed so tests can force exact transforms.
TrainingSample make_volume_sample_with(const Volume& vol, const Mat3& rotation, double scale,
                                       const SampleOptions& opt, uint64_t noise_seed);
TrainingSample make_slice_sample_with(const Volume& vol, const Mat3& rotation, double z_mm,
                                      const SampleOptions& opt, uint64_t noise_seed);
TrainingSample make_correction_sample_with(const Volume& vol, const Mat3& rotation,
                                           const Vec3& translation, const SampleOptions& opt,
                                           uint64_t noise_seed);

/// Haar-uniform rotation plus a [0.95, 1.05] scale augmentation (scale is
/// not part of the ground truth).
TrainingSample make_volume_sample(const Volume& vol, std::mt19937_64& rng,
                                  const SampleOptions& opt = {});

/// Half-space rotation; z uniform over the middle 66% of the z extent.
TrainingSample make_slice_sample(const Volume& vol, std::mt19937_64& rng,
                                 const SampleOptions& opt = {});

/// Per-axis rotations uniform in [-pi/6, pi/6] (Rz Ry Rx order), translation
/// uniform in [-7, 7] mm per axis; both recorded as ground truth.
TrainingSample make_correction_sample(const Volume& vol, std::mt19937_64& rng,
                                      const SampleOptions& opt = {});

/// [lo, hi] of the middle 66% of the volume's physical z extent.
std::pair<double, double> middle_z_range(const Volume& vol);

/// Per-subject spec derived from a master seed; subject ids double as the
/// dataset split key (train and test use disjoint id ranges).
PhantomSpec subject_spec(uint64_t master_seed, int subject_id, double age_lo, double age_hi,
                         Contrast contrast = Contrast::normal);

/// Stable per-sample seed used to keep streamed sample generation
/// reproducible and order-independent.
uint64_t derive_seed(uint64_t master_seed, uint64_t stream, uint64_t index);

}  // namespace regpose
