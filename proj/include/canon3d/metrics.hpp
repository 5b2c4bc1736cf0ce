#pragma once

#include <string>
#include <utility>
#include <vector>

#include "canon3d/encoder.hpp"
#include "canon3d/geometry.hpp"

namespace canon3d {

struct ConsistencyReport {
    std::vector<double> pair_chamfer;  // one value per adjacent frame pair
    double mean = 0.0;
    std::string variant;  // raw | fps | denoised
};

/// Symmetric squared-distance Chamfer: mean over X of min_y ||x-y||^2 plus
/// the mirrored term.
double chamfer(const PointCloud& x, const PointCloud& y);

ConsistencyReport temporal_consistency(const std::vector<PointCloud>& seq,
                                       const std::string& variant = "raw");

/// Gap between estimate_frame(H X) and H o estimate_frame(X):
/// rotation geodesic (radians) and translation norm.
std::pair<double, double> equivariance_deviation(const EncoderParams& params,
                                                 const PointCloud& x,
                                                 const RigidTransform& h);

}  // namespace canon3d
