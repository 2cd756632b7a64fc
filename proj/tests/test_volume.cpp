#include "regpose/volume.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "regpose/phantom.hpp"
#include "regpose/volume_io.hpp"
#include "support/oracles.hpp"

using namespace regpose;
using so3::kPi;

namespace {

Volume default_grid() { return Volume({32, 32, 32}, Vec3(2, 2, 2), Vec3::Zero()); }

Volume smooth_phantom() {
  PhantomSpec spec;
  spec.seed = 5;
  return generate_phantom(spec);
}

RigidTransform rand_transform(std::mt19937_64& rng, double max_trans = 8.0) {
  std::uniform_real_distribution<double> u(-max_trans, max_trans);
  RigidTransform t;
  t.rotation = so3::sample_uniform_rotation(rng);
  t.translation = Vec3(u(rng), u(rng), u(rng));
  t.center = Vec3(31, 31, 31);
  return t;
}

double intensity_range(const Volume& v) {
  double lo = v.data[0], hi = v.data[0];
  for (double x : v.data) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return hi - lo;
}

}  // namespace

TEST_SUITE_BEGIN("volume");

TEST_CASE("physical coordinate mapping") {
  Volume v({4, 5, 6}, Vec3(2, 3, 4), Vec3(10, -5, 0));
  CHECK((v.voxel_to_physical(0, 0, 0) - Vec3(10, -5, 0)).norm() == 0.0);
  CHECK((v.voxel_to_physical(3, 0, 0) - Vec3(16, -5, 0)).norm() == 0.0);
  CHECK((v.voxel_to_physical(1, 2, 3) - Vec3(12, 1, 12)).norm() == 0.0);
  CHECK((v.center() - Vec3(13, 1, 10)).norm() == 0.0);
}

TEST_CASE("compose and invert") {
  std::mt19937_64 rng(3);
  const Vec3 c(31, 31, 31);
  SUBCASE("identity laws") {
    const RigidTransform t = rand_transform(rng);
    const RigidTransform id = RigidTransform::identity(c);
    const RigidTransform ti = compose(t, id);
    CHECK((ti.rotation - t.rotation).norm() < 1e-12);
    CHECK((ti.translation - t.translation).norm() < 1e-12);

    const RigidTransform tinv = compose(t, invert(t));
    CHECK((tinv.rotation - Mat3::Identity()).norm() < 1e-9);
    CHECK(tinv.translation.norm() < 1e-9);

    const RigidTransform tii = invert(invert(t));
    CHECK((tii.rotation - t.rotation).norm() < 1e-12);
    CHECK((tii.translation - t.translation).norm() < 1e-12);

    RigidTransform rz;
    rz.rotation = so3::rot_z(0.3);
    rz.center = c;
    CHECK((invert(rz).rotation - so3::rot_z(-0.3)).norm() < 1e-12);
  }
  SUBCASE("pointwise composition oracle") {
    for (int trial = 0; trial < 20; ++trial) {
      const RigidTransform t1 = rand_transform(rng);
      const RigidTransform t2 = rand_transform(rng);
      const RigidTransform t12 = compose(t1, t2);
      std::uniform_real_distribution<double> u(-50.0, 50.0);
      for (int i = 0; i < 100; ++i) {
        const Vec3 p(u(rng), u(rng), u(rng));
        CHECK((t12.apply(p) - t1.apply(t2.apply(p))).norm() < 1e-9);
      }
    }
  }
  SUBCASE("associativity") {
    for (int trial = 0; trial < 50; ++trial) {
      const RigidTransform a = rand_transform(rng);
      const RigidTransform b = rand_transform(rng);
      const RigidTransform c3 = rand_transform(rng);
      const RigidTransform left = compose(compose(a, b), c3);
      const RigidTransform right = compose(a, compose(b, c3));
      CHECK((left.rotation - right.rotation).norm() < 1e-9);
      CHECK((left.translation - right.translation).norm() < 1e-9);
    }
  }
}

TEST_CASE("resample identity is exact") {
  const Volume vol = smooth_phantom();
  const Volume out = resample(vol, RigidTransform::identity(vol.center()));
  for (size_t i = 0; i < vol.size(); ++i) CHECK(out.data[i] == vol.data[i]);
}

TEST_CASE("resample grid-aligned shift is exact in the interior") {
  const Volume vol = smooth_phantom();
  RigidTransform t = RigidTransform::identity(vol.center());
  t.translation = Vec3(vol.spacing.x(), 0, 0);
  const Volume out = resample(vol, t);
  for (int k = 0; k < 32; ++k)
    for (int j = 0; j < 32; ++j)
      for (int i = 1; i < 32; ++i)
        CHECK(out.at(i, j, k) == doctest::Approx(vol.at(i - 1, j, k)).epsilon(1e-12));
}

TEST_CASE("resample by R then R^-1 is close to the original") {
  const Volume vol = smooth_phantom();
  std::mt19937_64 rng(17);
  RigidTransform t = RigidTransform::identity(vol.center());
  t.rotation = so3::rotvec_to_matrix(Vec3(0.3, -0.5, 0.4));
  const Volume back = resample(resample(vol, t), invert(t));

  double mae = 0.0;
  int n = 0;
  for (int k = 2; k < 30; ++k)
    for (int j = 2; j < 30; ++j)
      for (int i = 2; i < 30; ++i) {
        mae += std::abs(back.at(i, j, k) - vol.at(i, j, k));
        ++n;
      }
  mae /= n;
  CHECK(mae < 0.02 * intensity_range(vol));
}

TEST_CASE("resample is linear in intensities") {
  std::mt19937_64 rng(23);
  Volume v1 = default_grid(), v2 = default_grid();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (size_t i = 0; i < v1.size(); ++i) {
    v1.data[i] = u(rng);
    v2.data[i] = u(rng);
  }
  const double a = 0.7, b = -1.3;
  Volume combo = default_grid();
  for (size_t i = 0; i < combo.size(); ++i) combo.data[i] = a * v1.data[i] + b * v2.data[i];

  const RigidTransform t = rand_transform(rng);
  const Volume r1 = resample(v1, t);
  const Volume r2 = resample(v2, t);
  const Volume rc = resample(combo, t);
  for (size_t i = 0; i < rc.size(); ++i) {
    CHECK(std::abs(rc.data[i] - (a * r1.data[i] + b * r2.data[i])) < 1e-9);
  }
}

TEST_CASE("extract_slice at a grid plane copies the plane") {
  const Volume vol = smooth_phantom();
  const RigidTransform id = RigidTransform::identity(vol.center());
  const double z = vol.origin.z() + 12 * vol.spacing.z();
  const Slice s = extract_slice(vol, id, z);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i)
      CHECK(s.at(i, j) == doctest::Approx(vol.at(i, j, 12)).epsilon(1e-12));
}

TEST_CASE("extract_slice between planes averages the neighbors") {
  const Volume vol = smooth_phantom();
  const RigidTransform id = RigidTransform::identity(vol.center());
  const double z = vol.origin.z() + 12.5 * vol.spacing.z();
  const Slice s = extract_slice(vol, id, z);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i)
      CHECK(s.at(i, j) == doctest::Approx(0.5 * (vol.at(i, j, 12) + vol.at(i, j, 13))).epsilon(1e-12));
}

TEST_CASE("extract_slice equals the plane of the resampled volume") {
  const Volume vol = smooth_phantom();
  RigidTransform t = RigidTransform::identity(vol.center());
  t.rotation = so3::rotvec_to_matrix(Vec3(0.4, 0.2, -0.7));
  const int k = 16;  // grid-aligned plane near the center
  const double z = vol.origin.z() + k * vol.spacing.z();
  const Slice s = extract_slice(vol, t, z);
  const Volume r = resample(vol, t);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) {
      CHECK(std::abs(s.at(i, j) - r.at(i, j, k)) < 1e-12);
    }
}

TEST_CASE("extract_slice out of extent is zero and flagged") {
  const Volume vol = smooth_phantom();
  bool flag = false;
  const Slice s = extract_slice(vol, RigidTransform::identity(vol.center()), 1e4, &flag);
  CHECK(flag);
  for (double v : s.data) CHECK(v == 0.0);
}

TEST_CASE("center_of_gravity") {
  SUBCASE("single voxel") {
    Volume v = default_grid();
    v.at(3, 7, 11) = 2.5;
    CHECK((center_of_gravity(v) - v.voxel_to_physical(3, 7, 11)).norm() < 1e-12);
  }
  SUBCASE("symmetric phantom is centered") {
    Volume v = default_grid();
    const Vec3 c = v.center();
    for (int k = 0; k < 32; ++k)
      for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 32; ++i) {
          const double r = (v.voxel_to_physical(i, j, k) - c).norm();
          v.at(i, j, k) = std::exp(-r * r / 200.0);
        }
    CHECK((center_of_gravity(v) - c).norm() < 1e-6);
  }
  SUBCASE("all-zero volume is rejected") {
    const Volume v = default_grid();
    CHECK_THROWS_AS(center_of_gravity(v), std::domain_error);
  }
  SUBCASE("translation shifts the COG") {
    const Volume vol = smooth_phantom();
    RigidTransform t = RigidTransform::identity(vol.center());
    t.translation = Vec3(5, -3, 2);
    const Volume moved = resample(vol, t);
    const Vec3 shift = center_of_gravity(moved) - center_of_gravity(vol);
    CHECK((shift - Vec3(5, -3, 2)).norm() < 1.0);  // half a voxel
  }
}

TEST_CASE("center_of_gravity equivariance under rigid transforms") {
  const Volume vol = smooth_phantom();
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    RigidTransform t = rand_transform(rng, 4.0);
    const Volume moved = resample(vol, t);
    CHECK((center_of_gravity(moved) - t.apply(center_of_gravity(vol))).norm() < 1.0);
  }
}

namespace {

Volume ellipsoid_volume(const Mat3& rot) {
  Volume v({32, 32, 32}, Vec3(2, 2, 2), Vec3::Zero());
  const Vec3 c = v.center();
  const Vec3 semi(24, 16, 10);
  for (int k = 0; k < 32; ++k)
    for (int j = 0; j < 32; ++j)
      for (int i = 0; i < 32; ++i) {
        const Vec3 d = rot.transpose() * (v.voxel_to_physical(i, j, k) - c);
        const double rho = (d.cwiseQuotient(semi)).norm();
        if (rho < 1.0) v.at(i, j, k) = 1.0;
      }
  return v;
}

}  // namespace

TEST_CASE("principal_axes") {
  SUBCASE("axis-aligned ellipsoid gives identity up to sign flips") {
    const Mat3 axes = principal_axes(ellipsoid_volume(Mat3::Identity()));
    CHECK(so3::is_rotation(axes, 1e-9));
    for (int c = 0; c < 3; ++c) CHECK(std::abs(std::abs(axes.col(c)[c]) - 1.0) < 1e-3);
  }
  SUBCASE("rotated ellipsoid is recovered within 1 degree up to flips") {
    const Mat3 rot = so3::rot_z(kPi / 4);
    const Mat3 axes = principal_axes(ellipsoid_volume(rot));
    double best = 1e9;
    const Vec3 flips[4] = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
    for (const Vec3& f : flips) {
      const Mat3 cand = axes * f.asDiagonal();
      best = std::min(best, so3::geodesic_distance(cand, rot));
    }
    CHECK(best < kPi / 180.0);
  }
  SUBCASE("sphere is degenerate") {
    Volume v = default_grid();
    const Vec3 c = v.center();
    for (int k = 0; k < 32; ++k)
      for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 32; ++i)
          if ((v.voxel_to_physical(i, j, k) - c).norm() < 20.0) v.at(i, j, k) = 1.0;
    CHECK_THROWS_AS(principal_axes(v), std::domain_error);
  }
}

TEST_CASE("downsample") {
  const Volume vol = smooth_phantom();
  SUBCASE("factor 1 keeps dims") {
    const Volume out = downsample(vol, 1);
    CHECK(out.dims == vol.dims);
    CHECK(out.spacing == vol.spacing);
  }
  SUBCASE("factor 2 halves dims and doubles spacing") {
    const Volume out = downsample(vol, 2);
    CHECK(out.dims == std::array<int, 3>{16, 16, 16});
    CHECK((out.spacing - Vec3(4, 4, 4)).norm() == 0.0);
  }
  SUBCASE("constant volume stays constant") {
    Volume v = default_grid();
    for (double& x : v.data) x = 0.42;
    for (int f : {1, 2, 4}) {
      const Volume out = downsample(v, f);
      for (double x : out.data) CHECK(x == doctest::Approx(0.42).epsilon(1e-12));
    }
  }
  SUBCASE("invalid factor") { CHECK_THROWS_AS(downsample(vol, 3), std::invalid_argument); }
}

TEST_CASE("RPV1 roundtrip is lossless") {
  const Volume vol = smooth_phantom();
  const std::string p1 = "/tmp/regpose_test_vol1.rpv";
  const std::string p2 = "/tmp/regpose_test_vol2.rpv";
  write_volume(vol, p1);
  const Volume back = read_volume(p1);
  CHECK(back.dims == vol.dims);
  CHECK((back.spacing - vol.spacing).norm() == 0.0);
  CHECK((back.origin - vol.origin).norm() == 0.0);
  // f32 quantization happens once: a second trip is byte-identical.
  write_volume(back, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  for (size_t i = 0; i < vol.size(); ++i) {
    CHECK(back.data[i] == doctest::Approx(vol.data[i]).epsilon(1e-6));
  }
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("sidecar validation") {
  const Volume vol = smooth_phantom();
  const std::string p = "/tmp/regpose_test_side.rpv";
  write_volume(vol, p);
  write_sidecar(vol, p);
  CHECK_NOTHROW(check_sidecar(vol, p));
  Volume other = vol;
  other.origin.x() += 1.0;
  CHECK_THROWS_AS(check_sidecar(other, p), std::runtime_error);
  std::filesystem::remove(p);
  std::filesystem::remove(p + ".json");
}

TEST_SUITE_END();
