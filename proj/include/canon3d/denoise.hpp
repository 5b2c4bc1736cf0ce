#pragma once

#include <vector>

#include "canon3d/geometry.hpp"

namespace canon3d {

enum class DenoisePass { Normal, Tangent };

struct DenoiseConfig {
    int k = 16;
    std::vector<DenoisePass> passes{DenoisePass::Normal, DenoisePass::Tangent};
};

/// Per-point diagnostics of the last pass; true = neighborhood was degenerate
/// and the point passed through unchanged.
struct DenoiseResult {
    PointCloud cloud;
    std::vector<bool> degenerate;
};

/// Normal-direction surface projection: x = x_d - n n^T (x_d - mean).
DenoiseResult normal_correction(const PointCloud& x_delta, int k);

/// Tangent-plane smoothing toward the local mean: x* = x - (I - n n^T)(x - mean).
DenoiseResult tangent_correction(const PointCloud& x, int k);

/// Runs the configured passes in order, rebuilding the index between passes.
DenoiseResult progressive_denoise(const PointCloud& x_delta, const DenoiseConfig& cfg = {});

}  // namespace canon3d
