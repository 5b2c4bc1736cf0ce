// Python bindings for the canonicalization core. Clouds cross the boundary as
// N x 3 float64 arrays (plus an optional length-N int label vector); encoder
// parameters are an opaque handle with file round-trip support.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "canon3d/canonicalize.hpp"
#include "canon3d/contrastive.hpp"
#include "canon3d/denoise.hpp"
#include "canon3d/metrics.hpp"
#include "canon3d/neighborhood.hpp"
#include "canon3d/policy.hpp"
#include "canon3d/synthdata.hpp"

namespace py = pybind11;
using namespace canon3d;

namespace {

using Matrix = Eigen::MatrixXd;

PointCloud to_cloud(const Eigen::Ref<const Matrix>& pts, const std::vector<int>& labels = {}) {
    if (pts.cols() != 3) throw ShapeMismatch("points must be an N x 3 array");
    PointCloud cloud;
    cloud.points.reserve(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) cloud.points.push_back(pts.row(i).transpose());
    if (!labels.empty()) {
        if (labels.size() != cloud.points.size()) {
            throw ShapeMismatch("labels must have one entry per point");
        }
        cloud.labels = labels;
    }
    return cloud;
}

Matrix from_cloud(const PointCloud& cloud) {
    Matrix out(cloud.size(), 3);
    for (std::size_t i = 0; i < cloud.size(); ++i) out.row(i) = cloud.points[i].transpose();
    return out;
}

}  // namespace

PYBIND11_MODULE(_canon3d, m) {
    m.doc() = "Noise-robust rigid-motion canonicalization for 3D point clouds";

    py::register_exception<Error>(m, "CanonError");

    py::class_<EncoderParams>(m, "EncoderParams")
        .def_property_readonly("seed", [](const EncoderParams& p) { return p.seed; })
        .def_property_readonly("embed_dim",
                               [](const EncoderParams& p) { return p.arch.embed_dim; })
        .def_property_readonly("channels",
                               [](const EncoderParams& p) { return p.arch.channels; });

    m.def(
        "init_params", [](std::uint64_t seed) { return init_params(seed); }, py::arg("seed"),
        "Deterministic random encoder parameters.");
    m.def("save_params", &save_params, py::arg("params"), py::arg("path"));
    m.def("load_params", &load_params, py::arg("path"));

    m.def(
        "sample_surface",
        [](const std::string& kind, int count, std::uint64_t seed) {
            ShapeSpec spec;
            spec.kind = shape_kind_from_string(kind);
            spec.count = count;
            spec.seed = seed;
            return from_cloud(sample_surface(spec));
        },
        py::arg("kind"), py::arg("count") = 1024, py::arg("seed") = 0,
        "Uniform surface sample of 'plane', 'sphere', 'box', or 'torus'.");

    m.def(
        "denoise",
        [](const Eigen::Ref<const Matrix>& pts, int k) {
            DenoiseConfig cfg;
            cfg.k = k;
            const DenoiseResult res = progressive_denoise(to_cloud(pts), cfg);
            std::vector<bool> flags(res.degenerate.begin(), res.degenerate.end());
            return py::make_tuple(from_cloud(res.cloud), flags);
        },
        py::arg("points"), py::arg("k") = 16,
        "Two-stage surface denoising; returns (points, per_point_degenerate_flags).");

    m.def(
        "fps",
        [](const Eigen::Ref<const Matrix>& pts, int m_, std::uint64_t seed) {
            return from_cloud(fps(to_cloud(pts), m_, seed));
        },
        py::arg("points"), py::arg("m"), py::arg("seed") = 0, "Farthest point sampling.");

    m.def(
        "chamfer",
        [](const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
            return chamfer(to_cloud(a), to_cloud(b));
        },
        py::arg("a"), py::arg("b"), "Symmetric squared-distance Chamfer metric.");

    m.def(
        "knn",
        [](const Eigen::Ref<const Matrix>& pts, const Vec3& query, int k) {
            const KnnIndex index(to_cloud(pts));
            const Neighborhood nb = index.knn(query, k);
            return py::make_tuple(nb.indices, nb.distances);
        },
        py::arg("points"), py::arg("query"), py::arg("k"),
        "Exact k nearest neighbors; returns (indices, distances).");

    m.def(
        "encode",
        [](const EncoderParams& params, const Eigen::Ref<const Matrix>& pts) {
            return encode(params, to_cloud(pts)).z;
        },
        py::arg("params"), py::arg("points"), "Rotation-invariant embedding of a cloud.");

    m.def(
        "estimate_frame",
        [](const EncoderParams& params, const Eigen::Ref<const Matrix>& pts) {
            const RigidTransform f = estimate_frame(params, to_cloud(pts));
            return py::make_tuple(Matrix(f.rotation.matrix()), Vec3(f.translation));
        },
        py::arg("params"), py::arg("points"),
        "Equivariant frame estimate; returns (rotation 3x3, translation).");

    m.def(
        "canonicalize",
        [](const EncoderParams& params, const Eigen::Ref<const Matrix>& pts) {
            const CanonicalResult res = canonicalize(params, to_cloud(pts));
            return py::make_tuple(from_cloud(res.canonical_cloud),
                                  Matrix(res.frame.rotation.matrix()),
                                  Vec3(res.frame.translation), res.degenerate);
        },
        py::arg("params"), py::arg("points"),
        "Returns (canonical_points, rotation, translation, degenerate).");

    m.def(
        "train",
        [](const EncoderParams& params, const std::vector<Matrix>& clouds, int epochs,
           double learning_rate, double tau, double jitter_sigma, std::uint64_t seed) {
            std::vector<PointCloud> dataset;
            for (const Matrix& c : clouds) dataset.push_back(to_cloud(c));
            AugmentationConfig aug;
            aug.jitter_sigma = jitter_sigma;
            aug.seed = seed;
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.learning_rate = learning_rate;
            cfg.tau = tau;
            cfg.seed = seed;
            const TrainResult res = train(params, dataset, aug, cfg);
            return py::make_tuple(res.params, res.loss_history);
        },
        py::arg("params"), py::arg("clouds"), py::arg("epochs") = 10,
        py::arg("learning_rate") = 1e-3, py::arg("tau") = 0.1, py::arg("jitter_sigma") = 0.1,
        py::arg("seed") = 0,
        "Contrastive training over augmented view pairs; returns (params, loss_history).");

    m.def(
        "act",
        [](const EncoderParams& params, const Eigen::Ref<const Matrix>& pts,
           const std::vector<int>& labels, const Vec3& proprio_position, double gripper,
           bool denoise_input) {
            Observation o;
            o.cloud = to_cloud(pts, labels);
            o.proprio.position = proprio_position;
            o.proprio.gripper = gripper;
            DenoiseConfig dn;
            const ActResult res = act(params, toy_head, o, denoise_input ? &dn : nullptr);
            return py::make_tuple(Vec3(res.action.position),
                                  Matrix(res.action.orientation.matrix()), res.action.gripper,
                                  res.degenerate_frame);
        },
        py::arg("params"), py::arg("points"), py::arg("labels"), py::arg("proprio_position"),
        py::arg("gripper") = 0.0, py::arg("denoise") = false,
        "Canonicalized policy step with the built-in target-centroid head; returns "
        "(position, orientation, gripper, degenerate).");

    m.def(
        "random_transform",
        [](std::uint64_t seed, double translation_scale) {
            const RigidTransform t = random_transform(seed, translation_scale);
            return py::make_tuple(Matrix(t.rotation.matrix()), Vec3(t.translation));
        },
        py::arg("seed"), py::arg("translation_scale") = 1.0,
        "Uniform random rotation plus bounded translation; returns (rotation, translation).");

    m.def(
        "rotation_geodesic",
        [](const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
            return rotation_geodesic(Rotation(Mat3(a)), Rotation(Mat3(b)));
        },
        py::arg("a"), py::arg("b"), "Geodesic angle between two rotation matrices, in radians.");
}
