#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "canon3d/encoder.hpp"
#include "canon3d/geometry.hpp"

namespace canon3d {

struct AugmentationConfig {
    double jitter_sigma = 0.1;   // on normalized coordinates
    double dropout_frac = 0.1;
    double insert_frac = 0.1;
    double crop_frac = 0.1;
    std::uint64_t seed = 0;
};

struct ContrastiveBatch {
    std::vector<Eigen::VectorXd> anchors;
    std::vector<Eigen::VectorXd> positives;
};

enum class Optimizer { Sgd, AdaptiveMoment };

struct TrainConfig {
    double tau = 0.1;
    int epochs = 10;
    int batch_size = 0;  // 0 = whole dataset per step
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::AdaptiveMoment;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
};

struct NormalizedCloud {
    PointCloud cloud;
    double scale = 1.0;
    Vec3 center{Vec3::Zero()};
};

/// Center at the centroid, divide by the max absolute coordinate (isotropic).
NormalizedCloud normalize_coords(const PointCloud& cloud);

/// jitter -> dropout -> insertion -> crop, deterministic per rng state.
PointCloud augment(const PointCloud& cloud, const AugmentationConfig& cfg, std::mt19937_64& rng);

double cosine_sim(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Symmetrized InfoNCE; the softmax denominator runs over all in-batch pairs
/// including the positive.
double info_nce(const ContrastiveBatch& batch, double tau);

struct LossAndGrads {
    double loss = 0.0;
    Eigen::VectorXd grads;  // flat, matching flatten_params
};

LossAndGrads loss_and_grads(const EncoderParams& params,
                            const std::vector<std::pair<PointCloud, PointCloud>>& view_pairs,
                            double tau);

struct TrainResult {
    EncoderParams params;
    std::vector<double> loss_history;  // one entry per optimizer step
};

/// Two fresh augmentations per instance per epoch, shared-parameter encoder,
/// deterministic per seed.
TrainResult train(const EncoderParams& params, const std::vector<PointCloud>& dataset,
                  const AugmentationConfig& aug_cfg, const TrainConfig& train_cfg);

}  // namespace canon3d
