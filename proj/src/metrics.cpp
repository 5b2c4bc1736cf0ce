#include "canon3d/metrics.hpp"

#include "canon3d/canonicalize.hpp"
#include "canon3d/neighborhood.hpp"

namespace canon3d {

double chamfer(const PointCloud& x, const PointCloud& y) {
    if (x.points.empty() || y.points.empty()) throw EmptyCloud("chamfer over empty cloud");
    const KnnIndex ix(x), iy(y);
    double fwd = 0.0, bwd = 0.0;
    for (const Vec3& p : x.points) {
        const double d = iy.knn(p, 1).distances[0];
        fwd += d * d;
    }
    for (const Vec3& q : y.points) {
        const double d = ix.knn(q, 1).distances[0];
        bwd += d * d;
    }
    return fwd / static_cast<double>(x.size()) + bwd / static_cast<double>(y.size());
}

ConsistencyReport temporal_consistency(const std::vector<PointCloud>& seq,
                                       const std::string& variant) {
    if (seq.size() < 2) throw Error("temporal_consistency requires >= 2 frames");
    ConsistencyReport report;
    report.variant = variant;
    report.pair_chamfer.reserve(seq.size() - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const double cd = chamfer(seq[i], seq[i + 1]);
        report.pair_chamfer.push_back(cd);
        sum += cd;
    }
    report.mean = sum / static_cast<double>(report.pair_chamfer.size());
    return report;
}

std::pair<double, double> equivariance_deviation(const EncoderParams& params,
                                                 const PointCloud& x,
                                                 const RigidTransform& h) {
    const RigidTransform fx = estimate_frame(params, x);
    const RigidTransform fhx = estimate_frame(params, apply_cloud(h, x));
    const RigidTransform expected = compose(h, fx);
    const double rot_dev = rotation_geodesic(fhx.rotation, expected.rotation);
    const double trans_dev = (fhx.translation - expected.translation).norm();
    return {rot_dev, trans_dev};
}

}  // namespace canon3d
