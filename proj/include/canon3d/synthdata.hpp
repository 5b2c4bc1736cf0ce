#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "canon3d/geometry.hpp"

namespace canon3d {

enum class ShapeKind { Plane, Sphere, Box, Torus };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::Sphere;
    // Plane: extent (half-width of the square); Sphere: radius;
    // Box: half_widths; Torus: major/minor radii.
    double extent = 1.0;
    double radius = 1.0;
    Vec3 half_widths{1.0, 1.0, 1.0};
    double major_radius = 1.0;
    double minor_radius = 0.3;
    int count = 1024;
    std::uint64_t seed = 0;
};

struct NoiseSpec {
    double gaussian_sigma = 0.0;
    bool resample = false;           // fresh surface sample per frame
    double occlusion_frac = 0.0;     // removed along a random half-space direction
    std::uint64_t seed = 0;
};

struct SequenceSpec {
    ShapeSpec shape;
    std::vector<RigidTransform> motion;  // one transform per frame
    NoiseSpec noise;
    int frames = 1;
};

/// Uniform-by-area surface sampling; deterministic per spec seed.
PointCloud sample_surface(const ShapeSpec& spec);

/// Signed-ish surface residual |f(x)| used by validation suites.
double surface_residual(const ShapeSpec& spec, const Vec3& p);

PointCloud apply_noise(const PointCloud& cloud, const NoiseSpec& spec, std::uint64_t frame_seed,
                       const ShapeSpec* resample_shape = nullptr);

std::vector<PointCloud> make_sequence(const SequenceSpec& spec);

ShapeKind shape_kind_from_string(const std::string& s);
std::string to_string(ShapeKind k);

}  // namespace canon3d
