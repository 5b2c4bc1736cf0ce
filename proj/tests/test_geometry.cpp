#include <doctest.h>

#include <cmath>
#include <numbers>

#include "canon3d/geometry.hpp"
#include "test_util.hpp"

using namespace canon3d;
using testutil::rot_z;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("compose and invert form a group") {
    const RigidTransform t = random_transform(7, 2.0);
    const RigidTransform id = compose(t, invert(t));
    CHECK((id.rotation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(id.translation.norm() < 1e-9);

    const RigidTransform same = compose(RigidTransform::identity(), t);
    CHECK((same.rotation.matrix() - t.rotation.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((same.translation - t.translation).norm() < 1e-12);

    const RigidTransform r90{rot_z(kPi / 2), Vec3::Zero()};
    const RigidTransform r180 = compose(r90, r90);
    CHECK((r180.rotation.matrix() - rot_z(kPi).matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("invert matches the hand-computed form") {
    const RigidTransform pure_t{Rotation::identity(), Vec3{1, 2, 3}};
    CHECK((invert(pure_t).translation - Vec3{-1, -2, -3}).norm() < 1e-15);

    const RigidTransform t{rot_z(kPi / 2), Vec3{1, 0, 0}};
    const RigidTransform ti = invert(t);
    CHECK((ti.rotation.matrix() - rot_z(-kPi / 2).matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ti.translation - Vec3{0, 1, 0}).norm() < 1e-12);

    // invert of invert is the identity map on transforms
    const RigidTransform t2 = random_transform(99, 1.0);
    const RigidTransform back = invert(invert(t2));
    CHECK((back.rotation.matrix() - t2.rotation.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.translation - t2.translation).norm() < 1e-12);
}

TEST_CASE("apply_cloud maps points and preserves order and labels") {
    PointCloud cloud;
    cloud.points = {Vec3{1, 1, 0}, Vec3{2, 2, 0}};
    cloud.labels = {0, 1};

    const PointCloud same = apply_cloud(RigidTransform::identity(), cloud);
    CHECK(testutil::max_point_dev(same, cloud) == 0.0);
    CHECK(same.labels == cloud.labels);

    PointCloud one;
    one.points = {Vec3{1, 0, 0}};
    const PointCloud rotated = apply_cloud(RigidTransform{rot_z(kPi / 2), Vec3::Zero()}, one);
    CHECK((rotated.points[0] - Vec3{0, 1, 0}).norm() < 1e-12);

    const PointCloud lifted = apply_cloud(RigidTransform{Rotation::identity(), Vec3{0, 0, 1}}, cloud);
    CHECK((lifted.points[0] - Vec3{1, 1, 1}).norm() < 1e-15);
    CHECK((lifted.points[1] - Vec3{2, 2, 1}).norm() < 1e-15);
}

TEST_CASE("apply_pose rotates position and orientation, gripper invariant") {
    Pose p;
    p.position = Vec3{1, 0, 0};
    p.gripper = 0.04;

    const Pose same = apply_pose(RigidTransform::identity(), p);
    CHECK((same.position - p.position).norm() == 0.0);
    CHECK(same.gripper == p.gripper);

    const Pose shifted = apply_pose(RigidTransform{Rotation::identity(), Vec3{0, 1, 2}}, p);
    CHECK((shifted.position - Vec3{1, 1, 2}).norm() < 1e-15);
    CHECK((shifted.orientation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);

    const Pose rotated = apply_pose(RigidTransform{rot_z(kPi / 2), Vec3::Zero()}, p);
    CHECK((rotated.position - Vec3{0, 1, 0}).norm() < 1e-12);
    CHECK((rotated.orientation.matrix() - rot_z(kPi / 2).matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rotated.gripper == p.gripper);
}

TEST_CASE("frame_from_vectors Gram-Schmidt") {
    const Rotation id = frame_from_vectors(Vec3{1, 0, 0}, Vec3{0, 1, 0});
    CHECK((id.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);

    const Rotation id2 = frame_from_vectors(Vec3{2, 0, 0}, Vec3{1, 1, 0});
    CHECK((id2.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(frame_from_vectors(Vec3{0, 0, 0}, Vec3{0, 1, 0}), DegenerateFrame);
    CHECK_THROWS_AS(frame_from_vectors(Vec3{1, 0, 0}, Vec3{2, 0, 0}), DegenerateFrame);
}

TEST_CASE("frame_from_vectors is rotation-equivariant") {
    for (std::uint64_t s = 0; s < 25; ++s) {
        const Rotation r = random_rotation(s);
        const Vec3 u1{0.3, -1.2, 0.5}, u2{-0.7, 0.2, 0.9};
        const Rotation lhs = frame_from_vectors(r * u1, r * u2);
        const Rotation rhs = r * frame_from_vectors(u1, u2);
        CHECK((lhs.matrix() - rhs.matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("random_rotation is deterministic and valid") {
    const Rotation a = random_rotation(42), b = random_rotation(42);
    CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Rotation::is_valid(a.matrix()));

    const RigidTransform t1 = random_transform(5, 3.0), t2 = random_transform(5, 3.0);
    CHECK((t1.translation - t2.translation).norm() == 0.0);
    CHECK(t1.translation.cwiseAbs().maxCoeff() <= 3.0);
}

TEST_CASE("random_rotation angle distribution matches uniform SO(3)") {
    // Mean angle of the uniform distribution is pi/2 + 2/pi (about 126.5 deg).
    double sum = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        sum += rotation_geodesic(Rotation::identity(), random_rotation(1000 + s));
    }
    const double mean_deg = (sum / n) * 180.0 / kPi;
    const double expected_deg = (kPi / 2 + 2 / kPi) * 180.0 / kPi;
    CHECK(std::abs(mean_deg - expected_deg) < 2.0);
}

TEST_CASE("rotation_geodesic") {
    const Rotation r = random_rotation(11);
    CHECK(rotation_geodesic(r, r) < 1e-12);
    CHECK(std::abs(rotation_geodesic(Rotation::identity(), rot_z(kPi / 2)) - kPi / 2) < 1e-12);
    CHECK(std::abs(rotation_geodesic(rot_z(10 * kPi / 180), rot_z(40 * kPi / 180)) -
                   30 * kPi / 180) < 1e-12);
}

TEST_CASE("compose is associative and distributes over apply_cloud") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const RigidTransform a = random_transform(3 * s), b = random_transform(3 * s + 1),
                             c = random_transform(3 * s + 2);
        const RigidTransform lhs = compose(compose(a, b), c);
        const RigidTransform rhs = compose(a, compose(b, c));
        CHECK((lhs.rotation.matrix() - rhs.rotation.matrix()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((lhs.translation - rhs.translation).norm() < 1e-9);

        const PointCloud x = testutil::random_cloud(s, 16);
        const PointCloud via_compose = apply_cloud(compose(a, b), x);
        const PointCloud via_chain = apply_cloud(a, apply_cloud(b, x));
        CHECK(testutil::max_point_dev(via_compose, via_chain) < 1e-9);
    }
}
