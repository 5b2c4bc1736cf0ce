#include "canon3d/policy.hpp"

namespace canon3d {

Observation transform_observation(const RigidTransform& t, const Observation& o) {
    return Observation{apply_cloud(t, o.cloud), apply_pose(t, o.proprio)};
}

ActionPose toy_head(const Observation& o_hat) {
    Vec3 sum = Vec3::Zero();
    int count = 0;
    for (std::size_t i = 0; i < o_hat.cloud.size(); ++i) {
        if (o_hat.cloud.has_labels() && o_hat.cloud.labels[i] == kTargetLabel) {
            sum += o_hat.cloud.points[i];
            ++count;
        }
    }
    if (count == 0) throw NoTarget();
    return ActionPose{sum / count, Rotation::identity(), o_hat.proprio.gripper};
}

ActResult act(const EncoderParams& params, const CanonicalHead& head, const Observation& o,
              const DenoiseConfig* denoise_cfg) {
    PointCloud cleaned = o.cloud;
    if (denoise_cfg != nullptr) {
        cleaned = progressive_denoise(o.cloud, *denoise_cfg).cloud;
    }
    const CanonicalResult canon = canonicalize(params, cleaned);
    const Observation o_hat = transform_observation(invert(canon.frame),
                                                    Observation{cleaned, o.proprio});
    const ActionPose canonical_action = head(o_hat);
    return ActResult{apply_pose(canon.frame, canonical_action), canon.degenerate};
}

}  // namespace canon3d
