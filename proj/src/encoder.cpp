#include "canon3d/encoder.hpp"

#include <cstring>
#include <fstream>
#include <random>

namespace canon3d {

namespace {

constexpr double kDirEps = 1e-12;

void check_channels(int got, int want, const char* where) {
    if (got != want) {
        throw ShapeMismatch(std::string(where) + ": expected " + std::to_string(want) +
                            " channels, got " + std::to_string(got));
    }
}

}  // namespace

VectorFeatureMap lift(const PointCloud& cloud) {
    if (cloud.points.empty()) throw EmptyCloud();
    const Vec3 c = cloud.centroid();
    if (c.norm() > 1e-6) throw NotCentered("centroid norm " + std::to_string(c.norm()));
    // Channel 0 is the coordinate itself. A coordinate-only lift collapses:
    // every downstream VN feature stays parallel to its point and the mean
    // pool vanishes on centered clouds. The anchors break the collapse: a1 is
    // the norm-weighted moment; a2 bends it through the trace-free part of
    // the covariance and is rescaled back to ‖a1‖. Removing the trace keeps
    // the bend meaningful on near-isotropic clouds (where C ≈ cI would leave
    // C·a1 parallel to a1), and the rescaling keeps the two directions
    // comparably weighted, so the pooled feature matrix has a
    // well-conditioned rank-2 part for the frame head. Every channel rotates
    // with the cloud (the covariance conjugates, the identity is fixed) and
    // is permutation-invariant, so equivariance stays exact.
    Vec3 a1 = Vec3::Zero();
    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : cloud.points) {
        a1 += p.squaredNorm() * p;
        cov += p * p.transpose();
    }
    a1 /= static_cast<double>(cloud.size());
    cov /= static_cast<double>(cloud.size());
    cov -= (cov.trace() / 3.0) * Mat3::Identity();
    Vec3 a2 = cov * a1;
    const double a2n = a2.norm();
    if (a2n > 0.0) a2 *= a1.norm() / a2n;
    VectorFeatureMap v;
    v.per_point.reserve(cloud.size());
    for (const Vec3& p : cloud.points) {
        ChannelMat m(3, 4);
        m.col(0) = p;
        m.col(1) = a1;
        m.col(2) = a2;
        m.col(3) = p.cross(a1);
        v.per_point.push_back(std::move(m));
    }
    return v;
}

VectorFeatureMap vn_linear(const Eigen::MatrixXd& weight, const VectorFeatureMap& v) {
    check_channels(v.channels(), static_cast<int>(weight.cols()), "vn_linear");
    VectorFeatureMap out;
    out.per_point.reserve(v.size());
    for (const ChannelMat& p : v.per_point) {
        out.per_point.push_back(p * weight.transpose());
    }
    return out;
}

VectorFeatureMap vn_relu(const Eigen::RowVectorXd& relu_weight, const VectorFeatureMap& v,
                         double leak) {
    check_channels(v.channels(), static_cast<int>(relu_weight.cols()), "vn_relu");
    VectorFeatureMap out;
    out.per_point.reserve(v.size());
    for (const ChannelMat& p : v.per_point) {
        const Vec3 s = p * relu_weight.transpose();
        const double ns = s.norm();
        if (ns < kDirEps) {
            out.per_point.push_back(p);
            continue;
        }
        const Vec3 d = s / ns;
        ChannelMat o = p;
        for (int c = 0; c < p.cols(); ++c) {
            const double dot = p.col(c).dot(d);
            if (dot < 0.0) o.col(c) -= (1.0 - leak) * dot * d;
        }
        out.per_point.push_back(std::move(o));
    }
    return out;
}

ChannelMat mean_pool(const VectorFeatureMap& v) {
    if (v.per_point.empty()) throw EmptyCloud("mean_pool over empty feature map");
    ChannelMat sum = ChannelMat::Zero(3, v.channels());
    for (const ChannelMat& p : v.per_point) sum += p;
    return sum / static_cast<double>(v.size());
}

Eigen::VectorXd invariant_features(const ChannelMat& pooled) {
    const int c = static_cast<int>(pooled.cols());
    Eigen::VectorXd g(2 * c - 1);
    for (int i = 0; i < c; ++i) g[i] = pooled.col(i).norm();
    for (int i = 0; i + 1 < c; ++i) g[c + i] = pooled.col(i).dot(pooled.col(i + 1));
    return g;
}

Eigen::VectorXd invariant_head(const Eigen::MatrixXd& weight, const ChannelMat& pooled) {
    const Eigen::VectorXd g = invariant_features(pooled);
    if (weight.cols() != g.size()) {
        throw ShapeMismatch("invariant_head: weight cols " + std::to_string(weight.cols()) +
                            " vs feature dim " + std::to_string(g.size()));
    }
    return weight * g;
}

EncoderParams init_params(std::uint64_t seed, const EncoderArch& arch) {
    if (arch.channels.size() < 2) throw ConfigError("encoder arch needs >= 2 channel entries");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double half) {
        std::uniform_real_distribution<double> u(-half, half);
        return [&rng, u]() mutable { return u(rng); };
    };
    EncoderParams p;
    p.arch = arch;
    p.seed = seed;
    for (std::size_t l = 0; l + 1 < arch.channels.size(); ++l) {
        const int cin = arch.channels[l], cout = arch.channels[l + 1];
        VnLayer layer;
        layer.leak = arch.leak;
        layer.weight.resize(cout, cin);
        layer.relu_weight.resize(cout);
        auto draw_w = uniform(1.0 / std::sqrt(static_cast<double>(cin)));
        for (int r = 0; r < cout; ++r)
            for (int c = 0; c < cin; ++c) layer.weight(r, c) = draw_w();
        auto draw_k = uniform(1.0 / std::sqrt(static_cast<double>(cout)));
        for (int c = 0; c < cout; ++c) layer.relu_weight(c) = draw_k();
        p.layers.push_back(std::move(layer));
    }
    const int c = arch.out_channels();
    const int m = arch.invariant_dim();
    p.frame_head.resize(2, c);
    auto draw_f = uniform(1.0 / std::sqrt(static_cast<double>(c)));
    for (int r = 0; r < 2; ++r)
        for (int j = 0; j < c; ++j) p.frame_head(r, j) = draw_f();
    p.invariant_head.resize(arch.embed_dim, m);
    auto draw_z = uniform(1.0 / std::sqrt(static_cast<double>(m)));
    for (int r = 0; r < arch.embed_dim; ++r)
        for (int j = 0; j < m; ++j) p.invariant_head(r, j) = draw_z();
    return p;
}

ForwardCache encode_with_cache(const EncoderParams& params, const PointCloud& cloud) {
    if (cloud.size() < 2) throw TooFewPoints("encode requires N >= 2");
    const Vec3 c = cloud.centroid();
    PointCloud centered;
    centered.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) centered.points.push_back(p - c);

    ForwardCache cache;
    cache.inputs.push_back(lift(centered));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const VnLayer& layer = params.layers[l];
        cache.pre_relu.push_back(vn_linear(layer.weight, cache.inputs[l]));
        cache.inputs.push_back(vn_relu(layer.relu_weight, cache.pre_relu[l], layer.leak));
    }
    cache.pooled = mean_pool(cache.inputs.back());
    cache.invariant_feats = invariant_features(cache.pooled);
    cache.out.u1 = cache.pooled * params.frame_head.row(0).transpose();
    cache.out.u2 = cache.pooled * params.frame_head.row(1).transpose();
    cache.out.z = params.invariant_head * cache.invariant_feats;
    return cache;
}

EncoderOutput encode(const EncoderParams& params, const PointCloud& cloud) {
    return encode_with_cache(params, cloud).out;
}

std::size_t param_count(const EncoderParams& params) {
    std::size_t n = 0;
    for (const VnLayer& l : params.layers) n += l.weight.size() + l.relu_weight.size();
    n += params.frame_head.size() + params.invariant_head.size();
    return n;
}

Eigen::VectorXd flatten_params(const EncoderParams& params) {
    Eigen::VectorXd flat(param_count(params));
    Eigen::Index at = 0;
    auto put = [&](const Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) flat[at++] = m(r, c);
    };
    for (const VnLayer& l : params.layers) {
        put(l.weight);
        put(l.relu_weight);
    }
    put(params.frame_head);
    put(params.invariant_head);
    return flat;
}

void unflatten_params(EncoderParams& params, const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != param_count(params)) {
        throw ShapeMismatch("flat parameter vector has wrong length");
    }
    Eigen::Index at = 0;
    auto take = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat[at++];
    };
    for (VnLayer& l : params.layers) {
        take(l.weight);
        Eigen::MatrixXd k = l.relu_weight;
        take(k);
        l.relu_weight = k;
    }
    take(params.frame_head);
    take(params.invariant_head);
}

Eigen::VectorXd backprop_embedding(const EncoderParams& params, const ForwardCache& cache,
                                   const Eigen::VectorXd& dz) {
    const int c_out = params.arch.out_channels();
    const std::size_t n_points = cache.inputs[0].size();

    // Head gradients.
    Eigen::MatrixXd d_inv_head = dz * cache.invariant_feats.transpose();
    Eigen::VectorXd dg = params.invariant_head.transpose() * dz;
    ChannelMat d_pooled = ChannelMat::Zero(3, c_out);
    for (int i = 0; i < c_out; ++i) {
        const double nm = cache.pooled.col(i).norm();
        if (nm > kDirEps) d_pooled.col(i) += dg[i] * cache.pooled.col(i) / nm;
    }
    for (int i = 0; i + 1 < c_out; ++i) {
        d_pooled.col(i) += dg[c_out + i] * cache.pooled.col(i + 1);
        d_pooled.col(i + 1) += dg[c_out + i] * cache.pooled.col(i);
    }

    // Layer gradients, reverse order. G holds dL/d(layer output) per point.
    std::vector<ChannelMat> grad(n_points, d_pooled / static_cast<double>(n_points));
    std::vector<Eigen::MatrixXd> d_weights(params.layers.size());
    std::vector<Eigen::RowVectorXd> d_relu(params.layers.size());
    for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
        const VnLayer& layer = params.layers[l];
        const double beta = 1.0 - layer.leak;
        d_weights[l] = Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols());
        d_relu[l] = Eigen::RowVectorXd::Zero(layer.relu_weight.cols());
        for (std::size_t p = 0; p < n_points; ++p) {
            const ChannelMat& a = cache.pre_relu[l].per_point[p];
            const ChannelMat& g = grad[p];
            const Vec3 s = a * layer.relu_weight.transpose();
            const double ns = s.norm();
            ChannelMat da;
            if (ns < kDirEps) {
                da = g;
            } else {
                const Vec3 d = s / ns;
                da = g;
                Vec3 dd = Vec3::Zero();
                for (int c = 0; c < a.cols(); ++c) {
                    const Vec3 q = a.col(c);
                    const double dot = q.dot(d);
                    if (dot < 0.0) {
                        const Vec3 gc = g.col(c);
                        da.col(c) -= beta * d.dot(gc) * d;
                        dd -= beta * (gc.dot(d) * q + dot * gc);
                    }
                }
                const Vec3 ds = (dd - d * d.dot(dd)) / ns;
                da += ds * layer.relu_weight;
                d_relu[l] += ds.transpose() * a;
            }
            const ChannelMat& in = cache.inputs[l].per_point[p];
            d_weights[l] += da.transpose() * in;
            grad[p] = da * layer.weight;
        }
    }

    // Assemble flat gradient matching flatten_params order; frame head unused by z.
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(param_count(params));
    Eigen::Index at = 0;
    auto put = [&](const Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) flat[at++] = m(r, c);
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        put(d_weights[l]);
        put(d_relu[l]);
    }
    at += params.frame_head.size();
    put(d_inv_head);
    return flat;
}

namespace {

constexpr char kMagic[4] = {'E', 'Q', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is, const char* what) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ParseError(std::string("truncated params file while reading ") + what);
    return v;
}

}  // namespace

void save_params(const EncoderParams& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os.write(kMagic, 4);
    write_raw(os, kVersion);
    write_raw(os, static_cast<std::uint32_t>(params.arch.channels.size()));
    for (int c : params.arch.channels) write_raw(os, static_cast<std::uint32_t>(c));
    write_raw(os, params.arch.leak);
    write_raw(os, static_cast<std::uint32_t>(params.arch.embed_dim));
    write_raw(os, params.seed);
    const Eigen::VectorXd flat = flatten_params(params);
    os.write(reinterpret_cast<const char*>(flat.data()),
             static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!os) throw IoError("write failed for " + path);
}

EncoderParams load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw ParseError(path + ": bad magic, not an EQFM params file");
    }
    const auto version = read_raw<std::uint32_t>(is, "version");
    if (version != kVersion) {
        throw ParseError(path + ": unsupported format version " + std::to_string(version));
    }
    EncoderArch arch;
    arch.channels.clear();
    const auto n_ch = read_raw<std::uint32_t>(is, "arch size");
    if (n_ch < 2 || n_ch > 64) throw ParseError(path + ": implausible arch descriptor");
    for (std::uint32_t i = 0; i < n_ch; ++i) {
        arch.channels.push_back(static_cast<int>(read_raw<std::uint32_t>(is, "channel count")));
    }
    arch.leak = read_raw<double>(is, "leak");
    arch.embed_dim = static_cast<int>(read_raw<std::uint32_t>(is, "embed dim"));
    const auto seed = read_raw<std::uint64_t>(is, "seed");
    EncoderParams params = init_params(seed, arch);
    Eigen::VectorXd flat(param_count(params));
    is.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!is) throw ParseError(path + ": truncated weight payload");
    unflatten_params(params, flat);
    return params;
}

}  // namespace canon3d
