#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "canon3d/geometry.hpp"

namespace canon3d {

/// 3 x C vector channels for one point.
using ChannelMat = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Per-point vector-valued features; rotates channel-wise with the input.
struct VectorFeatureMap {
    std::vector<ChannelMat> per_point;

    int channels() const { return per_point.empty() ? 0 : static_cast<int>(per_point[0].cols()); }
    std::size_t size() const { return per_point.size(); }
};

struct VnLayer {
    Eigen::MatrixXd weight;          // C_out x C_in, scalar mixing of vector channels
    Eigen::RowVectorXd relu_weight;  // 1 x C_out, direction weights for the nonlinearity
    double leak = 0.2;
};

struct EncoderArch {
    std::vector<int> channels{4, 16, 32, 32};  // lift channel count first
    double leak = 0.2;
    int embed_dim = 32;

    int out_channels() const { return channels.back(); }
    /// Invariant features: per-channel norms plus adjacent-pair inner products.
    int invariant_dim() const { return 2 * channels.back() - 1; }
};

struct EncoderParams {
    EncoderArch arch;
    std::vector<VnLayer> layers;
    Eigen::MatrixXd frame_head;      // 2 x C, rows give the two frame vectors
    Eigen::MatrixXd invariant_head;  // embed_dim x invariant_dim
    std::uint64_t seed = 0;
};

struct EncoderOutput {
    Vec3 u1, u2;          // equivariant frame vectors
    Eigen::VectorXd z;    // invariant embedding
};

VectorFeatureMap lift(const PointCloud& cloud);
VectorFeatureMap vn_linear(const Eigen::MatrixXd& weight, const VectorFeatureMap& v);
VectorFeatureMap vn_relu(const Eigen::RowVectorXd& relu_weight, const VectorFeatureMap& v,
                         double leak);
ChannelMat mean_pool(const VectorFeatureMap& v);
Eigen::VectorXd invariant_features(const ChannelMat& pooled);
Eigen::VectorXd invariant_head(const Eigen::MatrixXd& weight, const ChannelMat& pooled);

EncoderParams init_params(std::uint64_t seed, const EncoderArch& arch = {});

/// Centers the cloud, lifts, runs the layer stack, pools, applies both heads.
EncoderOutput encode(const EncoderParams& params, const PointCloud& cloud);

/// Intermediate activations kept for the reverse pass.
struct ForwardCache {
    std::vector<VectorFeatureMap> inputs;    // inputs[l] feeds layer l; inputs[0] is the lift
    std::vector<VectorFeatureMap> pre_relu;  // linear output per layer
    ChannelMat pooled;
    Eigen::VectorXd invariant_feats;
    EncoderOutput out;
};

ForwardCache encode_with_cache(const EncoderParams& params, const PointCloud& cloud);

/// Trainable parameters as one flat vector (layer weights, relu weights,
/// frame head, invariant head, in that order).
Eigen::VectorXd flatten_params(const EncoderParams& params);
void unflatten_params(EncoderParams& params, const Eigen::VectorXd& flat);
std::size_t param_count(const EncoderParams& params);

/// dL/dparams (flat layout) given dL/dz for one encoded cloud.
Eigen::VectorXd backprop_embedding(const EncoderParams& params, const ForwardCache& cache,
                                   const Eigen::VectorXd& dz);

/// Binary container: magic "EQFM", version, arch, then little-endian f64 weights.
void save_params(const EncoderParams& params, const std::string& path);
EncoderParams load_params(const std::string& path);

}  // namespace canon3d
