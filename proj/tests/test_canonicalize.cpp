#include <doctest.h>

#include <random>

#include "canon3d/canonicalize.hpp"
#include "canon3d/metrics.hpp"
#include "test_util.hpp"

using namespace canon3d;

TEST_CASE("estimate_frame translation equivariance is exact") {
    const EncoderParams params = init_params(2);
    const PointCloud cloud = testutil::random_cloud(6, 32);
    const Vec3 shift{0.7, -0.3, 1.9};
    PointCloud shifted = cloud;
    for (Vec3& p : shifted.points) p += shift;
    const RigidTransform a = estimate_frame(params, cloud);
    const RigidTransform b = estimate_frame(params, shifted);
    CHECK((b.translation - (a.translation + shift)).norm() < 1e-12);
    CHECK((b.rotation.matrix() - a.rotation.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("estimate_frame full SE(3) equivariance") {
    const EncoderParams params = init_params(8);
    const PointCloud cloud = testutil::random_cloud(21, 48);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const RigidTransform h = random_transform(s, 2.0);
        const auto [rot_dev, trans_dev] = equivariance_deviation(params, cloud, h);
        CHECK(rot_dev < 1e-6);
        CHECK(trans_dev < 1e-6);
    }
}

TEST_CASE("estimate_frame throws on symmetric clouds, canonicalize flags them") {
    const EncoderParams params = init_params(1);
    PointCloud sym;
    sym.points = {Vec3{1, 0, 0}, Vec3{-1, 0, 0}};
    CHECK_THROWS_AS(estimate_frame(params, sym), DegenerateFrame);

    const CanonicalResult res = canonicalize(params, sym);
    CHECK(res.degenerate);
    CHECK((res.frame.rotation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
    // reconstruction still holds in the fallback
    const PointCloud back = apply_cloud(res.frame, res.canonical_cloud);
    CHECK(testutil::max_point_dev(back, sym) < 1e-9);
}

TEST_CASE("canonicalize satisfies the invariance claim") {
    const EncoderParams params = init_params(10);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const PointCloud x = testutil::random_cloud(s + 200, 48);
        const RigidTransform t = random_transform(s, 1.5);
        const CanonicalResult a = canonicalize(params, x);
        const CanonicalResult b = canonicalize(params, apply_cloud(t, x));
        REQUIRE(!a.degenerate);
        REQUIRE(!b.degenerate);
        CHECK(testutil::max_point_dev(a.canonical_cloud, b.canonical_cloud) < 1e-7);
    }
}

TEST_CASE("canonicalize reconstruction and centering invariants") {
    const EncoderParams params = init_params(3);
    const PointCloud x = testutil::random_cloud(77, 40);
    const CanonicalResult res = canonicalize(params, x);
    const PointCloud back = apply_cloud(res.frame, res.canonical_cloud);
    CHECK(testutil::max_point_dev(back, x) < 1e-9);
    CHECK(res.canonical_cloud.centroid().norm() < 1e-8);

    // canonicalizing an already canonical cloud is a near-identity
    const CanonicalResult again = canonicalize(params, res.canonical_cloud);
    CHECK(rotation_geodesic(again.frame.rotation, Rotation::identity()) < 1e-6);
    CHECK(again.frame.translation.norm() < 1e-6);
}

TEST_CASE("independent noise breaks canonical equivalence") {
    const EncoderParams params = init_params(5);
    const PointCloud x = testutil::random_cloud(31, 48);

    double clean_dev = 0.0, noisy_dev = 0.0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const RigidTransform t = random_transform(1000 + s, 1.0);
        {
            const CanonicalResult a = canonicalize(params, x);
            const CanonicalResult b = canonicalize(params, apply_cloud(t, x));
            clean_dev += testutil::max_point_dev(a.canonical_cloud, b.canonical_cloud);
        }
        std::mt19937_64 rng(500 + s);
        std::normal_distribution<double> g(0.0, 0.05);
        PointCloud xa = x, xb = apply_cloud(t, x);
        for (Vec3& p : xa.points)
            for (int i = 0; i < 3; ++i) p[i] += g(rng);
        for (Vec3& p : xb.points)
            for (int i = 0; i < 3; ++i) p[i] += g(rng);
        const CanonicalResult a = canonicalize(params, xa);
        const CanonicalResult b = canonicalize(params, xb);
        noisy_dev += testutil::max_point_dev(a.canonical_cloud, b.canonical_cloud);
    }
    CHECK(noisy_dev / seeds >= 10.0 * (clean_dev / seeds));
}

TEST_CASE("canonical deviation grows monotonically with noise") {
    const EncoderParams params = init_params(6);
    const PointCloud x = testutil::random_cloud(55, 48);
    const std::vector<double> sigmas{0.0, 0.01, 0.02, 0.05};
    std::vector<double> means;
    for (double sigma : sigmas) {
        double total = 0.0;
        for (int s = 0; s < 100; ++s) {
            const RigidTransform t = random_transform(2000 + s, 1.0);
            std::mt19937_64 rng(900 + s);
            std::normal_distribution<double> g(0.0, sigma > 0 ? sigma : 1.0);
            PointCloud xa = x, xb = apply_cloud(t, x);
            if (sigma > 0) {
                for (Vec3& p : xa.points)
                    for (int i = 0; i < 3; ++i) p[i] += g(rng);
                for (Vec3& p : xb.points)
                    for (int i = 0; i < 3; ++i) p[i] += g(rng);
            }
            total += testutil::max_point_dev(canonicalize(params, xa).canonical_cloud,
                                             canonicalize(params, xb).canonical_cloud);
        }
        means.push_back(total / 100.0);
    }
    for (std::size_t i = 0; i + 1 < means.size(); ++i) CHECK(means[i] <= means[i + 1]);
}

TEST_CASE("decanonicalize round trips") {
    const EncoderParams params = init_params(7);
    const PointCloud x = testutil::random_cloud(64, 32);
    const CanonicalResult res = canonicalize(params, x);
    CHECK(testutil::max_point_dev(decanonicalize(res.frame, res.canonical_cloud), x) < 1e-9);

    const PointCloud same = decanonicalize(RigidTransform::identity(), x);
    CHECK(testutil::max_point_dev(same, x) == 0.0);

    Pose pose;
    pose.position = Vec3{0.1, 0.2, 0.3};
    pose.gripper = 0.08;
    const Pose round = decanonicalize(res.frame, apply_pose(invert(res.frame), pose));
    CHECK((round.position - pose.position).norm() < 1e-9);
    CHECK(round.gripper == pose.gripper);
}
