#include "canon3d/neighborhood.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace canon3d {

namespace {

constexpr int kLeafSize = 8;

// Heap order: worst candidate on top. Ties prefer keeping the lower index,
// so the higher index is "worse" and surfaces first.
struct WorseFirst {
    bool operator()(const std::pair<double, int>& a, const std::pair<double, int>& b) const {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    }
};

}  // namespace

KnnIndex::KnnIndex(const PointCloud& cloud) : points_(cloud.points) {
    if (points_.empty()) throw EmptyCloud("cannot build index over empty cloud");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    nodes_.emplace_back();
    build(0, 0, static_cast<int>(points_.size()), 0);
}

void KnnIndex::build(int node, int begin, int end, int depth) {
    if (end - begin <= kLeafSize) {
        nodes_[node].axis = -1;
        nodes_[node].begin = begin;
        nodes_[node].end = end;
        std::sort(order_.begin() + begin, order_.begin() + end);
        return;
    }
    // Split on the widest axis at the median.
    Vec3 lo = points_[order_[begin]], hi = lo;
    for (int i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         if (points_[a][axis] != points_[b][axis])
                             return points_[a][axis] < points_[b][axis];
                         return a < b;
                     });
    nodes_[node].axis = axis;
    nodes_[node].split = points_[order_[mid]][axis];
    const int left = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    nodes_[node].left = left;
    nodes_[node].right = left + 1;
    build(left, begin, mid, depth + 1);
    build(left + 1, mid, end, depth + 1);
}

void KnnIndex::search(int node, const Vec3& query, int k,
                      std::vector<std::pair<double, int>>& heap) const {
    const Node& n = nodes_[node];
    WorseFirst cmp;
    if (n.axis < 0) {
        for (int i = n.begin; i < n.end; ++i) {
            const int idx = order_[i];
            const double d = (points_[idx] - query).norm();
            const std::pair<double, int> cand{d, idx};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), cmp);
            } else if (cmp(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), cmp);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), cmp);
            }
        }
        return;
    }
    const double delta = query[n.axis] - n.split;
    const int near = delta < 0.0 ? n.left : n.right;
    const int far = delta < 0.0 ? n.right : n.left;
    search(near, query, k, heap);
    // Explore the far side on exact boundary ties too, so index tie-breaks stay exact.
    if (static_cast<int>(heap.size()) < k || std::abs(delta) <= heap.front().first) {
        search(far, query, k, heap);
    }
}

Neighborhood KnnIndex::knn(const Vec3& query, int k) const {
    const int n = static_cast<int>(points_.size());
    if (k < 1 || k > n) {
        throw BadK("k = " + std::to_string(k) + " out of range [1, " + std::to_string(n) + "]");
    }
    std::vector<std::pair<double, int>> heap;
    heap.reserve(static_cast<std::size_t>(k) + 1);
    search(0, query, k, heap);
    std::sort(heap.begin(), heap.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    Neighborhood nb;
    nb.indices.reserve(heap.size());
    nb.distances.reserve(heap.size());
    for (const auto& [d, idx] : heap) {
        nb.indices.push_back(idx);
        nb.distances.push_back(d);
    }
    return nb;
}

KnnIndex build_index(const PointCloud& x) { return KnnIndex(x); }

Neighborhood knn(const KnnIndex& index, const Vec3& query, int k) {
    return index.knn(query, k);
}

Vec3 local_mean(const PointCloud& cloud, const Neighborhood& nb) {
    if (nb.indices.empty()) throw Error("local_mean over empty neighborhood");
    Vec3 sum = Vec3::Zero();
    for (int i : nb.indices) sum += cloud.points[i];
    return sum / static_cast<double>(nb.indices.size());
}

Vec3 pca_normal(const PointCloud& cloud, const Neighborhood& nb) {
    if (nb.indices.size() < 3) throw DegenerateNeighborhood("neighborhood has fewer than 3 points");
    Vec3 mean = local_mean(cloud, nb);
    Mat3 cov = Mat3::Zero();
    for (int i : nb.indices) {
        const Vec3 d = cloud.points[i] - mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(nb.indices.size());

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 evals = eig.eigenvalues();  // ascending
    // Rank < 2: at most one nonzero spread direction (collinear or coincident points).
    const double scale = std::max(evals[2], 1e-300);
    if (evals[1] <= 1e-10 * scale || evals[2] <= 1e-24) {
        throw DegenerateNeighborhood("neighborhood covariance rank < 2");
    }
    Vec3 n = eig.eigenvectors().col(0);
    int imax = 0;
    n.cwiseAbs().maxCoeff(&imax);
    if (n[imax] < 0.0) n = -n;
    return n.normalized();
}

Vec3 aggregate_normal(const std::vector<Vec3>& normals, const Vec3& reference) {
    if (normals.empty()) throw Error("aggregate_normal over empty list");
    Vec3 sum = Vec3::Zero();
    for (const Vec3& n : normals) {
        sum += (n.dot(reference) < 0.0) ? -n : n;
    }
    sum /= static_cast<double>(normals.size());
    if (sum.norm() < 1e-12) throw ZeroAggregate();
    return sum.normalized();
}

PointCloud fps(const PointCloud& cloud, int m, std::uint64_t seed) {
    const int n = static_cast<int>(cloud.size());
    if (m < 1 || m > n) {
        throw BadM("m = " + std::to_string(m) + " out of range [1, " + std::to_string(n) + "]");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> selected;
    selected.reserve(m);
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    int cur = pick(rng);
    selected.push_back(cur);
    for (int step = 1; step < m; ++step) {
        int best = -1;
        double best_d = -1.0;
        for (int i = 0; i < n; ++i) {
            min_d[i] = std::min(min_d[i], (cloud.points[i] - cloud.points[cur]).norm());
            if (min_d[i] > best_d) {
                best_d = min_d[i];
                best = i;
            }
        }
        cur = best;
        selected.push_back(cur);
    }
    PointCloud out;
    out.points.reserve(m);
    if (cloud.has_labels()) out.labels.reserve(m);
    for (int idx : selected) {
        out.points.push_back(cloud.points[idx]);
        if (cloud.has_labels()) out.labels.push_back(cloud.labels[idx]);
    }
    return out;
}

}  // namespace canon3d
