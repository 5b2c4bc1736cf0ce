#include "canon3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace canon3d {

Rotation::Rotation(const Mat3& m) : m_(m) {
    if (!is_valid(m)) {
        throw Error("matrix is not a rotation (orthonormality or det check failed)");
    }
}

bool Rotation::is_valid(const Mat3& m, double tol) {
    const Mat3 gram = m.transpose() * m;
    if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(m.determinant() - 1.0) <= tol;
}

Vec3 PointCloud::centroid() const {
    if (points.empty()) throw EmptyCloud();
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : points) c += p;
    return c / static_cast<double>(points.size());
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return RigidTransform{a.rotation * b.rotation,
                          a.rotation * b.translation + a.translation};
}

RigidTransform invert(const RigidTransform& t) {
    const Rotation rt = t.rotation.transpose();
    return RigidTransform{rt, -(rt * t.translation)};
}

PointCloud apply_cloud(const RigidTransform& t, const PointCloud& x) {
    PointCloud out;
    out.points.reserve(x.points.size());
    for (const Vec3& p : x.points) out.points.push_back(t * p);
    out.labels = x.labels;
    return out;
}

Pose apply_pose(const RigidTransform& t, const Pose& p) {
    return Pose{t * p.position, t.rotation * p.orientation, p.gripper};
}

Rotation frame_from_vectors(const Vec3& u1, const Vec3& u2) {
    const double n1 = u1.norm();
    if (n1 <= kFrameEps) throw DegenerateFrame("first frame vector is near zero");
    const Vec3 e1 = u1 / n1;
    const Vec3 v2 = u2 - u2.dot(e1) * e1;
    if (u1.cross(u2).norm() <= kFrameEps) {
        throw DegenerateFrame("frame vectors are near parallel");
    }
    const Vec3 e2 = v2.normalized();
    const Vec3 e3 = e1.cross(e2);
    Mat3 m;
    m.col(0) = e1;
    m.col(1) = e2;
    m.col(2) = e3;
    return Rotation(m, Rotation::Unchecked{});
}

Rotation random_rotation(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector4d q;
    do {
        for (int i = 0; i < 4; ++i) q[i] = gauss(rng);
    } while (q.norm() < 1e-12);
    q.normalize();
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 m;
    m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return Rotation(m, Rotation::Unchecked{});
}

RigidTransform random_transform(std::uint64_t seed, double translation_scale) {
    const Rotation r = random_rotation(seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> uni(-translation_scale, translation_scale);
    Vec3 t;
    for (int i = 0; i < 3; ++i) t[i] = uni(rng);
    return RigidTransform{r, t};
}

double rotation_geodesic(const Rotation& a, const Rotation& b) {
    const double tr = (a.matrix().transpose() * b.matrix()).trace();
    const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

}  // namespace canon3d
