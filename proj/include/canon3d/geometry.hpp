#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "canon3d/errors.hpp"

namespace canon3d {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Tolerance separating genuine frame degeneracy from round-off on unit-scale data.
inline constexpr double kFrameEps = 1e-8;

/// 3x3 orthonormal matrix with det +1. Construction validates unless tagged unchecked.
class Rotation {
public:
    Rotation() : m_(Mat3::Identity()) {}
    explicit Rotation(const Mat3& m);

    struct Unchecked {};
    Rotation(const Mat3& m, Unchecked) : m_(m) {}

    const Mat3& matrix() const { return m_; }
    Rotation transpose() const { return Rotation(m_.transpose(), Unchecked{}); }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, Unchecked{}); }

    static Rotation identity() { return Rotation(); }
    static bool is_valid(const Mat3& m, double tol = 1e-9);

private:
    Mat3 m_;
};

/// Element of SE(3): x -> R x + t.
struct RigidTransform {
    Rotation rotation;
    Vec3 translation{Vec3::Zero()};

    static RigidTransform identity() { return RigidTransform{}; }
    Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<int> labels;  // empty, or one per point

    std::size_t size() const { return points.size(); }
    bool has_labels() const { return !labels.empty(); }
    Vec3 centroid() const;
};

struct Pose {
    Vec3 position{Vec3::Zero()};
    Rotation orientation;
    double gripper = 0.0;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

PointCloud apply_cloud(const RigidTransform& t, const PointCloud& x);
Pose apply_pose(const RigidTransform& t, const Pose& p);

/// Gram-Schmidt frame from two non-parallel vectors; throws DegenerateFrame.
Rotation frame_from_vectors(const Vec3& u1, const Vec3& u2);

/// Uniform rotation on SO(3) via unit-quaternion sampling; deterministic per seed.
Rotation random_rotation(std::uint64_t seed);
RigidTransform random_transform(std::uint64_t seed, double translation_scale = 1.0);

/// Geodesic angle between rotations in [0, pi].
double rotation_geodesic(const Rotation& a, const Rotation& b);

}  // namespace canon3d
