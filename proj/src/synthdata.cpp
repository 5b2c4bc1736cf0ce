#include "canon3d/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace canon3d {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 sample_plane(std::mt19937_64& rng, double extent) {
    std::uniform_real_distribution<double> u(-extent, extent);
    const double x = u(rng);
    const double y = u(rng);
    return {x, y, 0.0};
}

Vec3 sample_sphere(std::mt19937_64& rng, double radius) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 v;
    do {
        for (int i = 0; i < 3; ++i) v[i] = gauss(rng);
    } while (v.norm() < 1e-12);
    return radius * v.normalized();
}

Vec3 sample_box(std::mt19937_64& rng, const Vec3& h) {
    // Face chosen by area weight, then uniform on that face.
    const double ax = h.y() * h.z(), ay = h.x() * h.z(), az = h.x() * h.y();
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double pick = u01(rng) * (ax + ay + az);
    const int axis = pick < ax ? 0 : (pick < ax + ay ? 1 : 2);
    const double side = u01(rng) < 0.5 ? -1.0 : 1.0;
    Vec3 p;
    for (int i = 0; i < 3; ++i) {
        std::uniform_real_distribution<double> u(-h[i], h[i]);
        p[i] = u(rng);
    }
    p[axis] = side * h[axis];
    return p;
}

Vec3 sample_torus(std::mt19937_64& rng, double big_r, double small_r) {
    // Rejection on the minor angle corrects for area density (R + r cos phi).
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double theta, phi;
    while (true) {
        theta = 2.0 * kPi * u01(rng);
        phi = 2.0 * kPi * u01(rng);
        const double accept = (big_r + small_r * std::cos(phi)) / (big_r + small_r);
        if (u01(rng) <= accept) break;
    }
    const double w = big_r + small_r * std::cos(phi);
    return {w * std::cos(theta), w * std::sin(theta), small_r * std::sin(phi)};
}

}  // namespace

PointCloud sample_surface(const ShapeSpec& spec) {
    if (spec.count < 4) throw ConfigError("shape sample count must be >= 4");
    std::mt19937_64 rng(spec.seed);
    PointCloud cloud;
    cloud.points.reserve(spec.count);
    for (int i = 0; i < spec.count; ++i) {
        switch (spec.kind) {
            case ShapeKind::Plane: cloud.points.push_back(sample_plane(rng, spec.extent)); break;
            case ShapeKind::Sphere: cloud.points.push_back(sample_sphere(rng, spec.radius)); break;
            case ShapeKind::Box: cloud.points.push_back(sample_box(rng, spec.half_widths)); break;
            case ShapeKind::Torus:
                cloud.points.push_back(sample_torus(rng, spec.major_radius, spec.minor_radius));
                break;
        }
    }
    return cloud;
}

double surface_residual(const ShapeSpec& spec, const Vec3& p) {
    switch (spec.kind) {
        case ShapeKind::Plane:
            return std::abs(p.z());
        case ShapeKind::Sphere:
            return std::abs(p.norm() - spec.radius);
        case ShapeKind::Box: {
            double best = 1e300;
            for (int i = 0; i < 3; ++i) {
                best = std::min(best, std::abs(std::abs(p[i]) - spec.half_widths[i]));
            }
            return best;
        }
        case ShapeKind::Torus: {
            const double w = std::hypot(p.x(), p.y()) - spec.major_radius;
            return std::abs(std::hypot(w, p.z()) - spec.minor_radius);
        }
    }
    return 0.0;
}

PointCloud apply_noise(const PointCloud& cloud, const NoiseSpec& spec, std::uint64_t frame_seed,
                       const ShapeSpec* resample_shape) {
    std::mt19937_64 rng(spec.seed ^ (frame_seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
    PointCloud out = cloud;
    if (spec.resample) {
        if (resample_shape == nullptr) {
            throw ConfigError("resampling noise requires a source shape");
        }
        ShapeSpec fresh = *resample_shape;
        std::uniform_int_distribution<std::uint64_t> reseed;
        fresh.seed = reseed(rng);
        out = sample_surface(fresh);
    }
    if (spec.gaussian_sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, spec.gaussian_sigma);
        for (Vec3& p : out.points) {
            for (int i = 0; i < 3; ++i) p[i] += gauss(rng);
        }
    }
    if (spec.occlusion_frac > 0.0) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec3 dir;
        do {
            for (int i = 0; i < 3; ++i) dir[i] = gauss(rng);
        } while (dir.norm() < 1e-12);
        dir.normalize();
        const int n = static_cast<int>(out.size());
        const int remove = static_cast<int>(std::floor(spec.occlusion_frac * n));
        if (remove > 0) {
            std::vector<int> idx(n);
            for (int i = 0; i < n; ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                const double da = out.points[a].dot(dir), db = out.points[b].dot(dir);
                if (da != db) return da > db;
                return a < b;
            });
            std::vector<bool> drop(n, false);
            for (int i = 0; i < remove; ++i) drop[idx[i]] = true;
            PointCloud kept;
            kept.points.reserve(n - remove);
            if (out.has_labels()) kept.labels.reserve(n - remove);
            for (int i = 0; i < n; ++i) {
                if (drop[i]) continue;
                kept.points.push_back(out.points[i]);
                if (out.has_labels()) kept.labels.push_back(out.labels[i]);
            }
            out = std::move(kept);
        }
    }
    return out;
}

std::vector<PointCloud> make_sequence(const SequenceSpec& spec) {
    if (spec.frames < 1) throw ConfigError("sequence needs >= 1 frame");
    if (static_cast<int>(spec.motion.size()) != spec.frames) {
        throw ConfigError("motion list length must equal frame count");
    }
    const PointCloud base = sample_surface(spec.shape);
    std::vector<PointCloud> frames;
    frames.reserve(spec.frames);
    for (int t = 0; t < spec.frames; ++t) {
        // Resampling happens on the untransformed surface, then motion, then noise.
        NoiseSpec resample_only = spec.noise;
        resample_only.gaussian_sigma = 0.0;
        resample_only.occlusion_frac = 0.0;
        PointCloud frame = spec.noise.resample
                               ? apply_noise(base, resample_only, static_cast<std::uint64_t>(t),
                                             &spec.shape)
                               : base;
        frame = apply_cloud(spec.motion[t], frame);
        NoiseSpec corrupt = spec.noise;
        corrupt.resample = false;
        frame = apply_noise(frame, corrupt, static_cast<std::uint64_t>(t) ^ 0xabcdef12ULL);
        frames.push_back(std::move(frame));
    }
    return frames;
}

ShapeKind shape_kind_from_string(const std::string& s) {
    if (s == "plane") return ShapeKind::Plane;
    if (s == "sphere") return ShapeKind::Sphere;
    if (s == "box") return ShapeKind::Box;
    if (s == "torus") return ShapeKind::Torus;
    throw ConfigError("unknown shape kind: " + s);
}

std::string to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::Plane: return "plane";
        case ShapeKind::Sphere: return "sphere";
        case ShapeKind::Box: return "box";
        case ShapeKind::Torus: return "torus";
    }
    return "?";
}

}  // namespace canon3d
