#pragma once

#include <functional>

#include "canon3d/canonicalize.hpp"
#include "canon3d/denoise.hpp"
#include "canon3d/encoder.hpp"
#include "canon3d/geometry.hpp"

namespace canon3d {

// Label value marking target points for the toy head.
inline constexpr int kTargetLabel = 1;

struct Observation {
    PointCloud cloud;
    Pose proprio;
};

using ActionPose = Pose;

/// Deterministic mapping from a canonicalized observation to an action.
using CanonicalHead = std::function<ActionPose(const Observation&)>;

Observation transform_observation(const RigidTransform& t, const Observation& o);

/// Centroid of target-labeled points, identity orientation, gripper passthrough.
ActionPose toy_head(const Observation& o_hat);

struct ActResult {
    ActionPose action;
    bool degenerate_frame = false;
};

/// denoise -> canonicalize -> head in the canonical frame -> forward transform.
/// Pass nullptr for denoise_cfg to skip denoising.
ActResult act(const EncoderParams& params, const CanonicalHead& head, const Observation& o,
              const DenoiseConfig* denoise_cfg);

}  // namespace canon3d
