#include "canon3d/canonicalize.hpp"

namespace canon3d {

namespace {

// Center + isotropic scaling by the largest point norm. The scale factor must
// be rotation-invariant (a max over coordinates is not), otherwise the frame
// estimate loses exact equivariance.
PointCloud normalized_for_encoder(const PointCloud& cloud, const Vec3& centroid) {
    PointCloud out;
    out.points.reserve(cloud.size());
    double s = 0.0;
    for (const Vec3& p : cloud.points) s = std::max(s, (p - centroid).norm());
    if (s < 1e-12) s = 1.0;
    for (const Vec3& p : cloud.points) out.points.push_back((p - centroid) / s);
    return out;
}

}  // namespace

RigidTransform estimate_frame(const EncoderParams& params, const PointCloud& cloud) {
    if (cloud.size() < 2) throw TooFewPoints("estimate_frame requires N >= 2");
    const Vec3 c = cloud.centroid();
    const EncoderOutput out = encode(params, normalized_for_encoder(cloud, c));
    const Rotation r = frame_from_vectors(out.u1, out.u2);
    return RigidTransform{r, c};
}

CanonicalResult canonicalize(const EncoderParams& params, const PointCloud& cloud) {
    CanonicalResult result;
    try {
        result.frame = estimate_frame(params, cloud);
    } catch (const DegenerateFrame&) {
        result.frame = RigidTransform{Rotation::identity(), cloud.centroid()};
        result.degenerate = true;
    }
    result.canonical_cloud = apply_cloud(invert(result.frame), cloud);
    return result;
}

PointCloud decanonicalize(const RigidTransform& frame, const PointCloud& cloud) {
    return apply_cloud(frame, cloud);
}

Pose decanonicalize(const RigidTransform& frame, const Pose& pose) {
    return apply_pose(frame, pose);
}

}  // namespace canon3d
