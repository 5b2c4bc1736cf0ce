#pragma once

#include <cstdint>
#include <vector>

#include "canon3d/geometry.hpp"

namespace canon3d {

/// k nearest neighbors of a query, distances ascending. Exact ties break by
/// ascending point index, so results are covariant under rigid motion.
struct Neighborhood {
    std::vector<int> indices;
    std::vector<double> distances;

    std::size_t size() const { return indices.size(); }
};

/// Immutable kd-tree over a cloud snapshot; exact queries.
class KnnIndex {
public:
    explicit KnnIndex(const PointCloud& cloud);

    Neighborhood knn(const Vec3& query, int k) const;
    std::size_t source_size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

private:
    struct Node {
        int axis = -1;        // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf range into order_
    };

    void build(int node, int begin, int end, int depth);
    void search(int node, const Vec3& query, int k,
                std::vector<std::pair<double, int>>& heap) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

KnnIndex build_index(const PointCloud& x);
Neighborhood knn(const KnnIndex& index, const Vec3& query, int k);

Vec3 local_mean(const PointCloud& cloud, const Neighborhood& nb);

/// Smallest-eigenvalue direction of the neighborhood covariance, canonical sign
/// (largest-magnitude component positive). Throws DegenerateNeighborhood when
/// the covariance has rank < 2.
Vec3 pca_normal(const PointCloud& cloud, const Neighborhood& nb);

/// Sign-align each normal to the reference, then average and normalize.
Vec3 aggregate_normal(const std::vector<Vec3>& normals, const Vec3& reference);

/// Greedy farthest point sampling; seed point drawn from the seeded RNG,
/// ties by ascending index. Labels carried through.
PointCloud fps(const PointCloud& cloud, int m, std::uint64_t seed);

}  // namespace canon3d
