#include "canon3d/denoise.hpp"

#include <string>

#include "canon3d/neighborhood.hpp"

namespace canon3d {

namespace {

// One pass of Algorithm-style correction. All reads come from the input
// snapshot; all writes go to a fresh cloud. Normals are estimated once per
// cloud point from its own self-inclusive k-neighborhood and reused wherever
// that point appears as a neighbor.
DenoiseResult correction_pass(const PointCloud& input, int k, bool tangent) {
    const int n = static_cast<int>(input.size());
    if (k < 3) throw BadK("denoise requires k >= 3, got " + std::to_string(k));
    if (n < k) {
        throw TooFewPoints("cloud has " + std::to_string(n) + " points, need at least k = " +
                           std::to_string(k));
    }
    const KnnIndex index(input);

    std::vector<Neighborhood> nbs(n);
    std::vector<Vec3> normals(n);
    std::vector<bool> normal_ok(n, false);
    for (int i = 0; i < n; ++i) {
        nbs[i] = index.knn(input.points[i], k);
        try {
            normals[i] = pca_normal(input, nbs[i]);
            normal_ok[i] = true;
        } catch (const DegenerateNeighborhood&) {
        }
    }

    DenoiseResult out;
    out.cloud.points.resize(n);
    out.cloud.labels = input.labels;
    out.degenerate.assign(n, false);
    for (int i = 0; i < n; ++i) {
        const Vec3& x = input.points[i];
        if (!normal_ok[i]) {
            out.cloud.points[i] = x;
            out.degenerate[i] = true;
            continue;
        }
        std::vector<Vec3> nb_normals;
        nb_normals.reserve(nbs[i].size());
        for (int j : nbs[i].indices) {
            if (normal_ok[j]) nb_normals.push_back(normals[j]);
        }
        Vec3 agg;
        try {
            agg = aggregate_normal(nb_normals, normals[i]);
        } catch (const Error&) {
            out.cloud.points[i] = x;
            out.degenerate[i] = true;
            continue;
        }
        const Vec3 mean = local_mean(input, nbs[i]);
        const Vec3 offset = x - mean;
        if (tangent) {
            out.cloud.points[i] = x - (offset - agg * agg.dot(offset));
        } else {
            out.cloud.points[i] = x - agg * agg.dot(offset);
        }
    }
    return out;
}

}  // namespace

DenoiseResult normal_correction(const PointCloud& x_delta, int k) {
    return correction_pass(x_delta, k, /*tangent=*/false);
}

DenoiseResult tangent_correction(const PointCloud& x, int k) {
    return correction_pass(x, k, /*tangent=*/true);
}

DenoiseResult progressive_denoise(const PointCloud& x_delta, const DenoiseConfig& cfg) {
    if (cfg.passes.empty()) throw ConfigError("denoise pass list is empty");
    DenoiseResult result;
    result.cloud = x_delta;
    result.degenerate.assign(x_delta.size(), false);
    for (DenoisePass pass : cfg.passes) {
        result = (pass == DenoisePass::Normal) ? normal_correction(result.cloud, cfg.k)
                                               : tangent_correction(result.cloud, cfg.k);
    }
    return result;
}

}  // namespace canon3d
