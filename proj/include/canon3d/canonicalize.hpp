#pragma once

#include "canon3d/encoder.hpp"
#include "canon3d/geometry.hpp"

namespace canon3d {

struct CanonicalResult {
    RigidTransform frame;       // T = Psi(X)
    PointCloud canonical_cloud; // X_hat = T^-1 X
    bool degenerate = false;
};

/// Frame whose translation is the centroid and whose rotation comes from the
/// encoder's two equivariant vectors. The cloud is centered and isotropically
/// scaled to max-abs 1 before encoding; the scale cancels out of the frame.
RigidTransform estimate_frame(const EncoderParams& params, const PointCloud& cloud);

/// Degenerate frames fall back to identity rotation plus centroid translation,
/// flagged rather than thrown.
CanonicalResult canonicalize(const EncoderParams& params, const PointCloud& cloud);

PointCloud decanonicalize(const RigidTransform& frame, const PointCloud& cloud);
Pose decanonicalize(const RigidTransform& frame, const Pose& pose);

}  // namespace canon3d
