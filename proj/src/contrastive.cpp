#include "canon3d/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace canon3d {

NormalizedCloud normalize_coords(const PointCloud& cloud) {
    if (cloud.points.empty()) throw EmptyCloud("normalize_coords over empty cloud");
    NormalizedCloud out;
    out.center = cloud.centroid();
    double s = 0.0;
    for (const Vec3& p : cloud.points) s = std::max(s, (p - out.center).cwiseAbs().maxCoeff());
    out.scale = (s < 1e-12) ? 1.0 : s;
    out.cloud.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) out.cloud.points.push_back((p - out.center) / out.scale);
    out.cloud.labels = cloud.labels;
    return out;
}

namespace {

std::vector<int> draw_distinct(std::mt19937_64& rng, int n, int m) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < m; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(m);
    return idx;
}

}  // namespace

PointCloud augment(const PointCloud& cloud, const AugmentationConfig& cfg, std::mt19937_64& rng) {
    if (cloud.size() < 4) throw TooFewPoints("augment requires N >= 4");
    PointCloud out = cloud;
    std::normal_distribution<double> jitter(0.0, cfg.jitter_sigma);
    if (cfg.jitter_sigma > 0.0) {
        for (Vec3& p : out.points) {
            for (int i = 0; i < 3; ++i) p[i] += jitter(rng);
        }
    }
    // Dropout.
    {
        const int n = static_cast<int>(out.size());
        const int m = static_cast<int>(std::floor(cfg.dropout_frac * n));
        if (m >= n) throw TooFewPoints("dropout would empty the cloud");
        if (m > 0) {
            std::vector<int> remove = draw_distinct(rng, n, m);
            std::vector<bool> drop(n, false);
            for (int i : remove) drop[i] = true;
            PointCloud kept;
            kept.points.reserve(n - m);
            if (out.has_labels()) kept.labels.reserve(n - m);
            for (int i = 0; i < n; ++i) {
                if (drop[i]) continue;
                kept.points.push_back(out.points[i]);
                if (out.has_labels()) kept.labels.push_back(out.labels[i]);
            }
            out = std::move(kept);
        }
    }
    // Insertion: jittered duplicates of surviving points.
    {
        const int n = static_cast<int>(out.size());
        const int m = static_cast<int>(std::floor(cfg.insert_frac * n));
        if (m > 0) {
            const std::vector<int> src = draw_distinct(rng, n, m);
            for (int i : src) {
                Vec3 p = out.points[i];
                for (int c = 0; c < 3; ++c) p[c] += jitter(rng);
                out.points.push_back(p);
                if (out.has_labels()) out.labels.push_back(out.labels[i]);
            }
        }
    }
    // Crop along a random half-space direction.
    {
        const int n = static_cast<int>(out.size());
        const int m = static_cast<int>(std::floor(cfg.crop_frac * n));
        if (m >= n) throw TooFewPoints("crop would empty the cloud");
        if (m > 0) {
            std::normal_distribution<double> gauss(0.0, 1.0);
            Vec3 dir;
            do {
                for (int i = 0; i < 3; ++i) dir[i] = gauss(rng);
            } while (dir.norm() < 1e-12);
            dir.normalize();
            std::vector<int> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                const double da = out.points[a].dot(dir), db = out.points[b].dot(dir);
                if (da != db) return da > db;
                return a < b;
            });
            std::vector<bool> drop(n, false);
            for (int i = 0; i < m; ++i) drop[idx[i]] = true;
            PointCloud kept;
            kept.points.reserve(n - m);
            if (out.has_labels()) kept.labels.reserve(n - m);
            for (int i = 0; i < n; ++i) {
                if (drop[i]) continue;
                kept.points.push_back(out.points[i]);
                if (out.has_labels()) kept.labels.push_back(out.labels[i]);
            }
            out = std::move(kept);
        }
    }
    if (out.points.empty()) throw TooFewPoints("augmentation emptied the cloud");
    return out;
}

double cosine_sim(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na <= 1e-12 || nb <= 1e-12) throw ZeroVector();
    return a.dot(b) / (na * nb);
}

namespace {

// Similarity matrix S(i,j) = cos(a_i, b_j).
Eigen::MatrixXd sim_matrix(const std::vector<Eigen::VectorXd>& a,
                           const std::vector<Eigen::VectorXd>& b) {
    const int n = static_cast<int>(a.size());
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(i, j) = cosine_sim(a[i], b[j]);
    return s;
}

// Mean over rows of -log softmax(S/tau) at the diagonal, log-sum-exp stabilized.
double nce_direction(const Eigen::MatrixXd& s, double tau) {
    const int n = static_cast<int>(s.rows());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double mx = s.row(i).maxCoeff();
        double denom = 0.0;
        for (int j = 0; j < n; ++j) denom += std::exp((s(i, j) - mx) / tau);
        total += -((s(i, i) - mx) / tau - std::log(denom));
    }
    return total / n;
}

// dL/dS for one direction: (softmax - identity) / (n * tau).
Eigen::MatrixXd nce_direction_grad(const Eigen::MatrixXd& s, double tau) {
    const int n = static_cast<int>(s.rows());
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
        const double mx = s.row(i).maxCoeff();
        double denom = 0.0;
        for (int j = 0; j < n; ++j) denom += std::exp((s(i, j) - mx) / tau);
        for (int j = 0; j < n; ++j) {
            const double p = std::exp((s(i, j) - mx) / tau) / denom;
            g(i, j) = (p - (i == j ? 1.0 : 0.0)) / (n * tau);
        }
    }
    return g;
}

void check_batch(std::size_t a, std::size_t b) {
    if (a != b) throw ShapeMismatch("contrastive batch views differ in length");
    if (a < 2) throw Error("contrastive batch needs B >= 2");
}

}  // namespace

double info_nce(const ContrastiveBatch& batch, double tau) {
    check_batch(batch.anchors.size(), batch.positives.size());
    if (tau <= 0.0) throw ConfigError("temperature must be positive");
    const Eigen::MatrixXd s12 = sim_matrix(batch.anchors, batch.positives);
    return 0.5 * (nce_direction(s12, tau) + nce_direction(s12.transpose(), tau));
}

LossAndGrads loss_and_grads(const EncoderParams& params,
                            const std::vector<std::pair<PointCloud, PointCloud>>& view_pairs,
                            double tau) {
    if (view_pairs.size() < 2) throw Error("loss_and_grads needs B >= 2 pairs");
    const int b = static_cast<int>(view_pairs.size());

    std::vector<ForwardCache> cache1(b), cache2(b);
    ContrastiveBatch batch;
    batch.anchors.reserve(b);
    batch.positives.reserve(b);
    for (int i = 0; i < b; ++i) {
        cache1[i] = encode_with_cache(params, view_pairs[i].first);
        cache2[i] = encode_with_cache(params, view_pairs[i].second);
        batch.anchors.push_back(cache1[i].out.z);
        batch.positives.push_back(cache2[i].out.z);
    }
    const Eigen::MatrixXd s = sim_matrix(batch.anchors, batch.positives);
    const double loss = 0.5 * (nce_direction(s, tau) + nce_direction(s.transpose(), tau));

    // dL/dS combining both softmax directions (each weighted 1/2).
    const Eigen::MatrixXd ds =
        0.5 * (nce_direction_grad(s, tau) + nce_direction_grad(s.transpose(), tau).transpose());

    // Chain through cosine similarity into per-embedding gradients.
    std::vector<Eigen::VectorXd> dz1(b), dz2(b);
    for (int i = 0; i < b; ++i) {
        dz1[i] = Eigen::VectorXd::Zero(batch.anchors[i].size());
        dz2[i] = Eigen::VectorXd::Zero(batch.positives[i].size());
    }
    for (int i = 0; i < b; ++i) {
        const Eigen::VectorXd& a = batch.anchors[i];
        const double na = a.norm();
        for (int j = 0; j < b; ++j) {
            const Eigen::VectorXd& p = batch.positives[j];
            const double np = p.norm();
            const double cos_ij = s(i, j);
            const double g = ds(i, j);
            dz1[i] += g * (p / (na * np) - cos_ij * a / (na * na));
            dz2[j] += g * (a / (na * np) - cos_ij * p / (np * np));
        }
    }

    LossAndGrads result;
    result.loss = loss;
    result.grads = Eigen::VectorXd::Zero(param_count(params));
    for (int i = 0; i < b; ++i) {
        result.grads += backprop_embedding(params, cache1[i], dz1[i]);
        result.grads += backprop_embedding(params, cache2[i], dz2[i]);
    }
    return result;
}

TrainResult train(const EncoderParams& params, const std::vector<PointCloud>& dataset,
                  const AugmentationConfig& aug_cfg, const TrainConfig& train_cfg) {
    if (dataset.size() < 2) throw Error("train requires >= 2 instances");
    TrainResult result;
    result.params = params;

    std::vector<PointCloud> normalized;
    normalized.reserve(dataset.size());
    for (const PointCloud& c : dataset) normalized.push_back(normalize_coords(c).cloud);

    std::mt19937_64 rng(train_cfg.seed);
    Eigen::VectorXd flat = flatten_params(result.params);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(flat.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(flat.size());
    long step = 0;

    for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
        std::vector<std::pair<PointCloud, PointCloud>> pairs;
        pairs.reserve(normalized.size());
        for (const PointCloud& c : normalized) {
            PointCloud v1 = augment(c, aug_cfg, rng);
            PointCloud v2 = augment(c, aug_cfg, rng);
            pairs.emplace_back(std::move(v1), std::move(v2));
        }
        const int bsz = train_cfg.batch_size > 0 ? train_cfg.batch_size
                                                 : static_cast<int>(pairs.size());
        for (std::size_t start = 0; start < pairs.size(); start += bsz) {
            const std::size_t end = std::min(pairs.size(), start + bsz);
            if (end - start < 2) continue;  // InfoNCE needs negatives
            std::vector<std::pair<PointCloud, PointCloud>> batch(pairs.begin() + start,
                                                                 pairs.begin() + end);
            const LossAndGrads lg = loss_and_grads(result.params, batch, train_cfg.tau);
            ++step;
            if (train_cfg.optimizer == Optimizer::Sgd) {
                flat -= train_cfg.learning_rate * lg.grads;
            } else {
                m = train_cfg.beta1 * m + (1.0 - train_cfg.beta1) * lg.grads;
                v = train_cfg.beta2 * v.array().matrix() +
                    (1.0 - train_cfg.beta2) * lg.grads.array().square().matrix();
                const double bc1 = 1.0 - std::pow(train_cfg.beta1, static_cast<double>(step));
                const double bc2 = 1.0 - std::pow(train_cfg.beta2, static_cast<double>(step));
                flat -= (train_cfg.learning_rate * (m / bc1).array() /
                         ((v / bc2).array().sqrt() + train_cfg.epsilon))
                            .matrix();
            }
            unflatten_params(result.params, flat);
            result.loss_history.push_back(lg.loss);
        }
    }
    return result;
}

}  // namespace canon3d
