// Command-line surface for the canonicalization toolkit: synthetic data
// generation, denoising, sampling, benchmarks, contrastive training, and the
// end-to-end policy step. All commands are deterministic given (config, seed)
// and overwrite outputs byte-identically on re-runs.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "canon3d/canonicalize.hpp"
#include "canon3d/contrastive.hpp"
#include "canon3d/denoise.hpp"
#include "canon3d/errors.hpp"
#include "canon3d/io.hpp"
#include "canon3d/metrics.hpp"
#include "canon3d/neighborhood.hpp"
#include "canon3d/policy.hpp"
#include "canon3d/synthdata.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace canon3d;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDegenerate = 4;

// ---------------------------------------------------------------------------
// Config document
// ---------------------------------------------------------------------------

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

struct SynthConfig {
    SequenceSpec sequence;
    std::string motion = "identity";  // identity | random
    double translation_scale = 0.5;
    std::vector<RigidTransform> explicit_motion;
    std::string format = "ply";
};

struct BenchConfig {
    int instances = 6;
    int augmentations = 6;
    int fps_count = 256;
};

struct RunConfig {
    std::uint64_t seed = 0;
    bool seed_set = false;
    DenoiseConfig denoise;
    bool denoise_present = false;
    EncoderArch encoder;
    TrainConfig contrastive;
    AugmentationConfig augment;
    SynthConfig synth;
    BenchConfig bench;
};

double require_number(const json& obj, const std::string& key, double fallback,
                      const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj[key].get<double>();
}

Vec3 parse_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + " must be an array of 3 numbers");
    return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Rotation parse_rotation(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 9) {
        throw ConfigError(where + " must be an array of 9 numbers (row-major 3x3)");
    }
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = j[3 * r + c].get<double>();
    try {
        return Rotation(m);
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

DenoiseConfig parse_denoise(const json& obj) {
    reject_unknown(obj, {"k", "passes"}, "denoise");
    DenoiseConfig cfg;
    if (obj.contains("k")) cfg.k = obj["k"].get<int>();
    if (obj.contains("passes")) {
        cfg.passes.clear();
        for (const auto& p : obj["passes"]) {
            const std::string s = p.get<std::string>();
            if (s == "normal") {
                cfg.passes.push_back(DenoisePass::Normal);
            } else if (s == "tangent") {
                cfg.passes.push_back(DenoisePass::Tangent);
            } else {
                throw ConfigError("denoise.passes entries must be 'normal' or 'tangent', got '" +
                                  s + "'");
            }
        }
        if (cfg.passes.empty()) throw ConfigError("denoise.passes must be nonempty");
    }
    if (cfg.k < 3) throw ConfigError("denoise.k must be >= 3");
    return cfg;
}

EncoderArch parse_encoder(const json& obj) {
    reject_unknown(obj, {"channels", "leak", "embed_dim"}, "encoder");
    EncoderArch arch;
    if (obj.contains("channels")) {
        arch.channels.clear();
        for (const auto& c : obj["channels"]) arch.channels.push_back(c.get<int>());
        if (arch.channels.size() < 2 || arch.channels.front() != 4) {
            throw ConfigError("encoder.channels must start with the 4 lift channels");
        }
    }
    arch.leak = require_number(obj, "leak", arch.leak, "encoder");
    if (obj.contains("embed_dim")) arch.embed_dim = obj["embed_dim"].get<int>();
    if (arch.embed_dim < 1) throw ConfigError("encoder.embed_dim must be >= 1");
    return arch;
}

TrainConfig parse_contrastive(const json& obj) {
    reject_unknown(obj,
                   {"tau", "epochs", "batch_size", "learning_rate", "optimizer", "beta1", "beta2",
                    "epsilon"},
                   "contrastive");
    TrainConfig cfg;
    cfg.tau = require_number(obj, "tau", cfg.tau, "contrastive");
    if (obj.contains("epochs")) cfg.epochs = obj["epochs"].get<int>();
    if (obj.contains("batch_size")) cfg.batch_size = obj["batch_size"].get<int>();
    cfg.learning_rate = require_number(obj, "learning_rate", cfg.learning_rate, "contrastive");
    cfg.beta1 = require_number(obj, "beta1", cfg.beta1, "contrastive");
    cfg.beta2 = require_number(obj, "beta2", cfg.beta2, "contrastive");
    cfg.epsilon = require_number(obj, "epsilon", cfg.epsilon, "contrastive");
    if (obj.contains("optimizer")) {
        const std::string s = obj["optimizer"].get<std::string>();
        if (s == "sgd") {
            cfg.optimizer = Optimizer::Sgd;
        } else if (s == "adam") {
            cfg.optimizer = Optimizer::AdaptiveMoment;
        } else {
            throw ConfigError("contrastive.optimizer must be 'sgd' or 'adam', got '" + s + "'");
        }
    }
    if (cfg.tau <= 0) throw ConfigError("contrastive.tau must be > 0");
    if (cfg.epochs < 0) throw ConfigError("contrastive.epochs must be >= 0");
    return cfg;
}

AugmentationConfig parse_augment(const json& obj) {
    reject_unknown(obj, {"jitter_sigma", "dropout_frac", "insert_frac", "crop_frac"}, "augment");
    AugmentationConfig cfg;
    cfg.jitter_sigma = require_number(obj, "jitter_sigma", cfg.jitter_sigma, "augment");
    cfg.dropout_frac = require_number(obj, "dropout_frac", cfg.dropout_frac, "augment");
    cfg.insert_frac = require_number(obj, "insert_frac", cfg.insert_frac, "augment");
    cfg.crop_frac = require_number(obj, "crop_frac", cfg.crop_frac, "augment");
    for (double f : {cfg.dropout_frac, cfg.insert_frac, cfg.crop_frac}) {
        if (f < 0.0 || f >= 1.0) throw ConfigError("augment fractions must lie in [0, 1)");
    }
    if (cfg.jitter_sigma < 0.0) throw ConfigError("augment.jitter_sigma must be >= 0");
    return cfg;
}

ShapeSpec parse_shape(const json& obj) {
    reject_unknown(obj,
                   {"kind", "extent", "radius", "half_widths", "major_radius", "minor_radius",
                    "count", "seed"},
                   "synth.shape");
    ShapeSpec spec;
    if (obj.contains("kind")) {
        try {
            spec.kind = shape_kind_from_string(obj["kind"].get<std::string>());
        } catch (const Error& e) {
            throw ConfigError(std::string("synth.shape.kind: ") + e.what());
        }
    }
    spec.extent = require_number(obj, "extent", spec.extent, "synth.shape");
    spec.radius = require_number(obj, "radius", spec.radius, "synth.shape");
    if (obj.contains("half_widths")) {
        spec.half_widths = parse_vec3(obj["half_widths"], "synth.shape.half_widths");
    }
    spec.major_radius = require_number(obj, "major_radius", spec.major_radius, "synth.shape");
    spec.minor_radius = require_number(obj, "minor_radius", spec.minor_radius, "synth.shape");
    if (obj.contains("count")) spec.count = obj["count"].get<int>();
    if (obj.contains("seed")) spec.seed = obj["seed"].get<std::uint64_t>();
    if (spec.count < 4) throw ConfigError("synth.shape.count must be >= 4");
    if (spec.extent <= 0 || spec.radius <= 0 || spec.major_radius <= 0 || spec.minor_radius <= 0 ||
        spec.half_widths.minCoeff() <= 0) {
        throw ConfigError("synth.shape dimensions must be positive");
    }
    return spec;
}

NoiseSpec parse_noise(const json& obj) {
    reject_unknown(obj, {"gaussian_sigma", "resample", "occlusion_frac", "seed"}, "synth.noise");
    NoiseSpec spec;
    spec.gaussian_sigma = require_number(obj, "gaussian_sigma", spec.gaussian_sigma, "synth.noise");
    if (obj.contains("resample")) spec.resample = obj["resample"].get<bool>();
    spec.occlusion_frac = require_number(obj, "occlusion_frac", spec.occlusion_frac, "synth.noise");
    if (obj.contains("seed")) spec.seed = obj["seed"].get<std::uint64_t>();
    if (spec.gaussian_sigma < 0) throw ConfigError("synth.noise.gaussian_sigma must be >= 0");
    if (spec.occlusion_frac < 0 || spec.occlusion_frac >= 1) {
        throw ConfigError("synth.noise.occlusion_frac must lie in [0, 1)");
    }
    return spec;
}

SynthConfig parse_synth(const json& obj) {
    reject_unknown(obj, {"shape", "noise", "frames", "motion", "translation_scale", "format"},
                   "synth");
    SynthConfig cfg;
    if (obj.contains("shape")) cfg.sequence.shape = parse_shape(obj["shape"]);
    if (obj.contains("noise")) cfg.sequence.noise = parse_noise(obj["noise"]);
    if (obj.contains("frames")) cfg.sequence.frames = obj["frames"].get<int>();
    if (cfg.sequence.frames < 1) throw ConfigError("synth.frames must be >= 1");
    cfg.translation_scale =
        require_number(obj, "translation_scale", cfg.translation_scale, "synth");
    if (obj.contains("format")) {
        cfg.format = obj["format"].get<std::string>();
        if (cfg.format != "ply" && cfg.format != "xyz") {
            throw ConfigError("synth.format must be 'ply' or 'xyz'");
        }
    }
    if (obj.contains("motion")) {
        const json& m = obj["motion"];
        if (m.is_string()) {
            cfg.motion = m.get<std::string>();
            if (cfg.motion != "identity" && cfg.motion != "random") {
                throw ConfigError("synth.motion must be 'identity', 'random', or a list");
            }
        } else if (m.is_array()) {
            cfg.motion = "explicit";
            for (std::size_t i = 0; i < m.size(); ++i) {
                const json& entry = m[i];
                const std::string where = "synth.motion[" + std::to_string(i) + "]";
                reject_unknown(entry, {"rotation", "translation"}, where);
                RigidTransform t = RigidTransform::identity();
                if (entry.contains("rotation")) {
                    t.rotation = parse_rotation(entry["rotation"], where + ".rotation");
                }
                if (entry.contains("translation")) {
                    t.translation = parse_vec3(entry["translation"], where + ".translation");
                }
                cfg.explicit_motion.push_back(t);
            }
        } else {
            throw ConfigError("synth.motion must be 'identity', 'random', or a list");
        }
    }
    return cfg;
}

BenchConfig parse_bench(const json& obj) {
    reject_unknown(obj, {"instances", "augmentations", "fps_count"}, "bench");
    BenchConfig cfg;
    if (obj.contains("instances")) cfg.instances = obj["instances"].get<int>();
    if (obj.contains("augmentations")) cfg.augmentations = obj["augmentations"].get<int>();
    if (obj.contains("fps_count")) cfg.fps_count = obj["fps_count"].get<int>();
    if (cfg.instances < 2) throw ConfigError("bench.instances must be >= 2");
    if (cfg.augmentations < 1) throw ConfigError("bench.augmentations must be >= 1");
    if (cfg.fps_count < 1) throw ConfigError("bench.fps_count must be >= 1");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(doc, {"seed", "denoise", "encoder", "contrastive", "augment", "synth", "bench"},
                   "config root");
    RunConfig cfg;
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) {
            throw ConfigError("config seed must be an unsigned integer");
        }
        cfg.seed = doc["seed"].get<std::uint64_t>();
        cfg.seed_set = true;
    } else {
        throw ConfigError("config is missing the mandatory top-level 'seed'");
    }
    if (doc.contains("denoise")) {
        cfg.denoise = parse_denoise(doc["denoise"]);
        cfg.denoise_present = true;
    }
    if (doc.contains("encoder")) cfg.encoder = parse_encoder(doc["encoder"]);
    if (doc.contains("contrastive")) cfg.contrastive = parse_contrastive(doc["contrastive"]);
    if (doc.contains("augment")) cfg.augment = parse_augment(doc["augment"]);
    if (doc.contains("synth")) cfg.synth = parse_synth(doc["synth"]);
    if (doc.contains("bench")) cfg.bench = parse_bench(doc["bench"]);
    return cfg;
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

struct GlobalArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out;
    int threads = 1;
};

RunConfig effective_config(const GlobalArgs& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = load_config(g.config_path);
    if (g.seed_given) {
        cfg.seed = g.seed;
        cfg.seed_set = true;
    }
    return cfg;
}

std::string json_vec3(const Vec3& v) {
    return "[" + format_double(v.x()) + ", " + format_double(v.y()) + ", " + format_double(v.z()) +
           "]";
}

std::string json_rotation(const Rotation& r) {
    std::string out = "[";
    const Mat3& m = r.matrix();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            out += format_double(m(i, j));
            if (i != 2 || j != 2) out += ", ";
        }
    return out + "]";
}

// Manifest files are JSON of the form {"frames": ["f0.ply", ...], ...}.
std::vector<std::string> manifest_frames(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest: " + path);
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError("manifest parse error in " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array()) {
        throw ParseError("manifest must be a JSON object with a 'frames' array: " + path);
    }
    const fs::path base = fs::path(path).parent_path();
    std::vector<std::string> out;
    for (const auto& f : doc["frames"]) out.push_back((base / f.get<std::string>()).string());
    if (out.empty()) throw ParseError("manifest lists no frames: " + path);
    return out;
}

std::vector<std::string> input_frames(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return manifest_frames(path);
    return {path};
}

EncoderParams params_for(const RunConfig& cfg, const std::string& params_path) {
    if (!params_path.empty()) return load_params(params_path);
    return init_params(cfg.seed, cfg.encoder);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_gen_synth(const GlobalArgs& g) {
    RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("gen-synth requires --out DIR");
    SynthConfig& synth = cfg.synth;
    SequenceSpec& seq = synth.sequence;
    // the top-level seed drives shape sampling and noise unless overridden
    if (seq.shape.seed == 0) seq.shape.seed = cfg.seed;
    if (seq.noise.seed == 0) seq.noise.seed = cfg.seed;

    seq.motion.clear();
    if (synth.motion == "identity") {
        seq.motion.assign(seq.frames, RigidTransform::identity());
    } else if (synth.motion == "random") {
        for (int t = 0; t < seq.frames; ++t) {
            seq.motion.push_back(random_transform(cfg.seed + 17 * t + 1, synth.translation_scale));
        }
    } else {
        if (static_cast<int>(synth.explicit_motion.size()) != seq.frames) {
            throw ConfigError("synth.motion list length must equal synth.frames");
        }
        seq.motion = synth.explicit_motion;
    }

    const std::vector<PointCloud> frames = make_sequence(seq);
    fs::create_directories(g.out);
    std::string manifest = "{\n  \"frames\": [";
    for (std::size_t t = 0; t < frames.size(); ++t) {
        char name[64];
        std::snprintf(name, sizeof(name), "frame_%04zu.%s", t, synth.format.c_str());
        write_cloud(frames[t], (fs::path(g.out) / name).string());
        manifest += std::string("\"") + name + "\"";
        if (t + 1 < frames.size()) manifest += ", ";
    }
    manifest += "],\n  \"shape\": \"" + to_string(seq.shape.kind) + "\",\n  \"count\": " +
                std::to_string(seq.shape.count) + ",\n  \"gaussian_sigma\": " +
                format_double(seq.noise.gaussian_sigma) + ",\n  \"seed\": " +
                std::to_string(cfg.seed) + "\n}\n";
    atomic_write_text((fs::path(g.out) / "manifest.json").string(), manifest);
    std::cout << "wrote " << frames.size() << " frames to " << g.out << "\n";
    return kExitOk;
}

int cmd_denoise(const GlobalArgs& g, const std::string& input) {
    const RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("denoise requires --out PATH");
    const std::vector<std::string> frames = input_frames(input);
    const bool multi = frames.size() > 1;
    if (multi) fs::create_directories(g.out);

    std::string flags_csv = "frame,point,degenerate\n";
    int total_degenerate = 0;
    std::size_t total_points = 0;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const PointCloud cloud = read_cloud(frames[t]);
        const DenoiseResult res = progressive_denoise(cloud, cfg.denoise);
        const std::string out_path =
            multi ? (fs::path(g.out) / fs::path(frames[t]).filename()).string() : g.out;
        write_cloud(res.cloud, out_path);
        for (std::size_t i = 0; i < res.degenerate.size(); ++i) {
            if (res.degenerate[i]) {
                flags_csv += std::to_string(t) + "," + std::to_string(i) + ",1\n";
                ++total_degenerate;
            }
        }
        total_points += res.degenerate.size();
    }
    const std::string sidecar =
        (multi ? (fs::path(g.out) / "degenerate.csv") : fs::path(g.out + ".degenerate.csv"))
            .string();
    atomic_write_text(sidecar, flags_csv);
    if (total_points > 0 && static_cast<std::size_t>(total_degenerate) == total_points) {
        std::cerr << "all points degenerate\n";
        return kExitDegenerate;
    }
    std::cout << "denoised " << frames.size() << " frame(s), k=" << cfg.denoise.k << "\n";
    return kExitOk;
}

int cmd_fps(const GlobalArgs& g, const std::string& input, int count) {
    const RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("fps requires --out PATH");
    const PointCloud cloud = read_cloud(input);
    write_cloud(fps(cloud, count, cfg.seed), g.out);
    std::cout << "sampled " << count << " of " << cloud.size() << " points\n";
    return kExitOk;
}

int cmd_augment(const GlobalArgs& g, const std::string& input) {
    const RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("augment requires --out PATH");
    const PointCloud cloud = read_cloud(input);
    std::mt19937_64 rng(cfg.seed);
    write_cloud(augment(cloud, cfg.augment, rng), g.out);
    return kExitOk;
}

int cmd_canonicalize(const GlobalArgs& g, const std::string& input,
                     const std::string& params_path) {
    const RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("canonicalize requires --out PATH");
    const EncoderParams params = params_for(cfg, params_path);
    const PointCloud cloud = read_cloud(input);
    const CanonicalResult res = canonicalize(params, cloud);
    write_cloud(res.canonical_cloud, g.out);
    const std::string frame_json = "{\n  \"rotation\": " + json_rotation(res.frame.rotation) +
                                   ",\n  \"translation\": " + json_vec3(res.frame.translation) +
                                   ",\n  \"degenerate\": " +
                                   (res.degenerate ? "true" : "false") + "\n}\n";
    atomic_write_text(g.out + ".frame.json", frame_json);
    if (res.degenerate) {
        std::cerr << "frame degenerate; identity rotation used\n";
        return kExitDegenerate;
    }
    return kExitOk;
}

int cmd_bench_consistency(const GlobalArgs& g) {
    RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("bench-consistency requires --out CSV");
    SequenceSpec seq = cfg.synth.sequence;
    if (seq.frames < 2) throw ConfigError("bench-consistency needs synth.frames >= 2");
    if (seq.shape.seed == 0) seq.shape.seed = cfg.seed;
    if (seq.noise.seed == 0) seq.noise.seed = cfg.seed;
    if (cfg.synth.motion == "explicit") {
        if (static_cast<int>(cfg.synth.explicit_motion.size()) != seq.frames) {
            throw ConfigError("synth.motion list length must equal synth.frames");
        }
        seq.motion = cfg.synth.explicit_motion;
    } else if (cfg.synth.motion == "random") {
        for (int t = 0; t < seq.frames; ++t) {
            seq.motion.push_back(
                random_transform(cfg.seed + 17 * t + 1, cfg.synth.translation_scale));
        }
    } else {
        seq.motion.assign(seq.frames, RigidTransform::identity());
    }
    const std::vector<PointCloud> raw = make_sequence(seq);

    std::vector<PointCloud> fps_frames, den_frames;
    for (std::size_t t = 0; t < raw.size(); ++t) {
        fps_frames.push_back(fps(raw[t], cfg.bench.fps_count, cfg.seed));
        den_frames.push_back(progressive_denoise(raw[t], cfg.denoise).cloud);
    }

    std::string csv = "frame_index,variant,chamfer\n";
    auto emit = [&csv](const char* variant, const ConsistencyReport& rep) {
        for (std::size_t i = 0; i < rep.pair_chamfer.size(); ++i) {
            csv += std::to_string(i) + "," + variant + "," + format_double(rep.pair_chamfer[i]) +
                   "\n";
        }
        csv += std::string("mean,") + variant + "," + format_double(rep.mean) + "\n";
    };
    emit("raw", temporal_consistency(raw));
    emit("fps", temporal_consistency(fps_frames));
    emit("denoised", temporal_consistency(den_frames));
    atomic_write_text(g.out, csv);
    std::cout << "wrote " << g.out << "\n";
    return kExitOk;
}

// Perturbation levels: 1 = pure rotation; 2 = jitter sigma 0.1 with 10%
// crop/dropout/insert; 3 = sigma 0.2 with 20%.
AugmentationConfig level_config(int level) {
    AugmentationConfig cfg;
    if (level == 1) {
        cfg.jitter_sigma = 0.0;
        cfg.dropout_frac = cfg.insert_frac = cfg.crop_frac = 0.0;
    } else if (level == 2) {
        cfg.jitter_sigma = 0.1;
        cfg.dropout_frac = cfg.insert_frac = cfg.crop_frac = 0.1;
    } else {
        cfg.jitter_sigma = 0.2;
        cfg.dropout_frac = cfg.insert_frac = cfg.crop_frac = 0.2;
    }
    return cfg;
}

std::vector<PointCloud> bench_instances(const RunConfig& cfg) {
    std::vector<PointCloud> instances;
    const ShapeKind kinds[] = {ShapeKind::Sphere, ShapeKind::Box, ShapeKind::Torus,
                               ShapeKind::Plane};
    for (int i = 0; i < cfg.bench.instances; ++i) {
        ShapeSpec spec = cfg.synth.sequence.shape;
        spec.kind = kinds[i % 4];
        spec.seed = cfg.seed + 101 * (i + 1);
        instances.push_back(sample_surface(spec));
    }
    return instances;
}

int cmd_bench_equivariance(const GlobalArgs& g, const std::string& params_path) {
    const RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("bench-equivariance requires --out CSV");
    const EncoderParams params = params_for(cfg, params_path);
    const std::vector<PointCloud> instances = bench_instances(cfg);
    const int aug_count = cfg.bench.augmentations;

    std::string csv;
    std::string sim_csv;
    for (int level = 1; level <= 3; ++level) {
        const AugmentationConfig acfg = level_config(level);
        csv += "# level " + std::to_string(level) + ": jitter_sigma=" +
               format_double(acfg.jitter_sigma) + " dropout=" + format_double(acfg.dropout_frac) +
               " insert=" + format_double(acfg.insert_frac) + " crop=" +
               format_double(acfg.crop_frac) + "\n";
    }
    csv += "level,instance,augmentation,rot_dev,trans_dev\n";
    sim_csv += "level,instance_a,sample_a,instance_b,sample_b,cosine\n";

    for (int level = 1; level <= 3; ++level) {
        const AugmentationConfig acfg = level_config(level);
        // embeddings of every augmented sample, grouped by instance
        std::vector<std::vector<Eigen::VectorXd>> embeddings(instances.size());
        for (std::size_t i = 0; i < instances.size(); ++i) {
            const NormalizedCloud norm = normalize_coords(instances[i]);
            const RigidTransform base_frame = estimate_frame(params, norm.cloud);
            for (int a = 0; a < aug_count; ++a) {
                std::mt19937_64 rng(cfg.seed ^ (std::uint64_t(level) << 40) ^
                                    (std::uint64_t(i) << 20) ^ std::uint64_t(a));
                const RigidTransform h = random_transform(rng(), 0.0);
                PointCloud view = apply_cloud(h, norm.cloud);
                if (level > 1) view = augment(view, acfg, rng);
                double rot_dev = -1.0, trans_dev = -1.0;
                Eigen::VectorXd z = Eigen::VectorXd::Zero(params.arch.embed_dim);
                try {
                    const RigidTransform f = estimate_frame(params, view);
                    rot_dev = rotation_geodesic(f.rotation, compose(h, base_frame).rotation);
                    trans_dev = (f.translation - compose(h, base_frame).translation).norm();
                    z = encode(params, view).z;
                } catch (const DegenerateFrame&) {
                    // rot_dev stays -1 to mark the degenerate sample
                }
                csv += std::to_string(level) + "," + std::to_string(i) + "," + std::to_string(a) +
                       "," + format_double(rot_dev) + "," + format_double(trans_dev) + "\n";
                embeddings[i].push_back(z);
            }
        }
        for (std::size_t i = 0; i < embeddings.size(); ++i) {
            for (std::size_t a = 0; a < embeddings[i].size(); ++a) {
                for (std::size_t j = i; j < embeddings.size(); ++j) {
                    for (std::size_t b = (j == i ? a + 1 : 0); b < embeddings[j].size(); ++b) {
                        double c = 0.0;
                        try {
                            c = cosine_sim(embeddings[i][a], embeddings[j][b]);
                        } catch (const ZeroVector&) {
                        }
                        sim_csv += std::to_string(level) + "," + std::to_string(i) + "," +
                                   std::to_string(a) + "," + std::to_string(j) + "," +
                                   std::to_string(b) + "," + format_double(c) + "\n";
                    }
                }
            }
        }
    }
    atomic_write_text(g.out, csv);
    atomic_write_text(g.out + ".similarity.csv", sim_csv);
    std::cout << "wrote " << g.out << "\n";
    return kExitOk;
}

int cmd_train(const GlobalArgs& g, const std::string& dataset_dir) {
    RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("train requires --out PARAMS_PATH");
    std::vector<PointCloud> dataset;
    std::vector<fs::path> files;
    if (!fs::is_directory(dataset_dir)) throw IoError("dataset dir not found: " + dataset_dir);
    for (const auto& entry : fs::directory_iterator(dataset_dir)) {
        const std::string ext = entry.path().extension().string();
        if (ext == ".ply" || ext == ".xyz") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) dataset.push_back(read_cloud(f.string()));
    if (dataset.size() < 2) {
        throw TooFewPoints("train needs >= 2 cloud files, found " +
                           std::to_string(dataset.size()));
    }
    cfg.contrastive.seed = cfg.seed;
    cfg.augment.seed = cfg.seed;
    const EncoderParams init = init_params(cfg.seed, cfg.encoder);
    const TrainResult result = train(init, dataset, cfg.augment, cfg.contrastive);
    save_params(result.params, g.out);
    std::string csv = "step,loss\n";
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
        csv += std::to_string(i) + "," + format_double(result.loss_history[i]) + "\n";
    }
    atomic_write_text(g.out + ".loss.csv", csv);
    std::cout << "trained on " << dataset.size() << " clouds, " << result.loss_history.size()
              << " steps\n";
    return kExitOk;
}

Observation read_observation(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open observation: " + path);
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError("observation parse error in " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError("observation must be a JSON object");
    reject_unknown(doc, {"cloud", "points", "proprio"}, "observation");
    Observation o;
    if (doc.contains("cloud")) {
        const fs::path base = fs::path(path).parent_path();
        o.cloud = read_cloud((base / doc["cloud"].get<std::string>()).string());
    } else if (doc.contains("points")) {
        for (const auto& row : doc["points"]) {
            if (!row.is_array() || (row.size() != 3 && row.size() != 4)) {
                throw ParseError("observation points rows must be [x, y, z] or [x, y, z, label]");
            }
            o.cloud.points.push_back(
                Vec3{row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
            if (row.size() == 4) o.cloud.labels.push_back(row[3].get<int>());
        }
        if (!o.cloud.labels.empty() && o.cloud.labels.size() != o.cloud.points.size()) {
            throw ParseError("observation points must all carry labels or none");
        }
    } else {
        throw ParseError("observation is missing 'cloud' (file) or 'points' (inline)");
    }
    if (!doc.contains("proprio")) throw ParseError("observation is missing 'proprio'");
    const json& pp = doc["proprio"];
    reject_unknown(pp, {"position", "orientation", "gripper"}, "observation.proprio");
    if (!pp.contains("position")) throw ParseError("observation.proprio is missing 'position'");
    o.proprio.position = parse_vec3(pp["position"], "observation.proprio.position");
    if (pp.contains("orientation")) {
        try {
            o.proprio.orientation = parse_rotation(pp["orientation"],
                                                   "observation.proprio.orientation");
        } catch (const ConfigError& e) {
            throw ParseError(e.what());
        }
    }
    if (pp.contains("gripper")) o.proprio.gripper = pp["gripper"].get<double>();
    return o;
}

int cmd_act(const GlobalArgs& g, const std::string& obs_path, const std::string& params_path,
            bool denoise_enabled) {
    const RunConfig cfg = effective_config(g);
    if (g.out.empty()) throw ConfigError("act requires --out JSON_PATH");
    const EncoderParams params = params_for(cfg, params_path);
    const Observation o = read_observation(obs_path);
    const DenoiseConfig* dn =
        (denoise_enabled || cfg.denoise_present) ? &cfg.denoise : nullptr;
    const ActResult res = act(params, toy_head, o, dn);
    const std::string record = "{\n  \"position\": " + json_vec3(res.action.position) +
                               ",\n  \"orientation\": " + json_rotation(res.action.orientation) +
                               ",\n  \"gripper\": " + format_double(res.action.gripper) +
                               ",\n  \"degenerate_flag\": " +
                               (res.degenerate_frame ? "true" : "false") + "\n}\n";
    atomic_write_text(g.out, record);
    if (res.degenerate_frame) {
        std::cerr << "frame degenerate; identity rotation used\n";
        return kExitDegenerate;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SE(3) canonicalization toolkit for noisy point clouds"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "JSON config file")->expected(1);
    auto* seed_opt = app.add_option("--seed", g.seed, "top-level RNG seed");
    app.add_option("--out", g.out, "output path (file or directory, command-dependent)");
    app.add_option("--threads", g.threads, "worker threads (results are thread-count invariant)")
        ->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen-synth", "generate a synthetic observation sequence");
    auto* den = app.add_subcommand("denoise", "denoise a cloud file or manifest");
    std::string den_input;
    den->add_option("input", den_input, "cloud file (.ply/.xyz) or manifest (.json)")->required();
    auto* fps_cmd = app.add_subcommand("fps", "farthest point sampling");
    std::string fps_input;
    int fps_count = 256;
    fps_cmd->add_option("input", fps_input, "cloud file")->required();
    fps_cmd->add_option("--count", fps_count, "points to keep");
    auto* aug = app.add_subcommand("augment", "apply the contrastive augmentation pipeline once");
    std::string aug_input;
    aug->add_option("input", aug_input, "cloud file")->required();
    auto* canon = app.add_subcommand("canonicalize", "estimate a frame and canonicalize a cloud");
    std::string canon_input, canon_params;
    canon->add_option("input", canon_input, "cloud file")->required();
    canon->add_option("--params", canon_params, "encoder params file (default: init from seed)");
    auto* benchc = app.add_subcommand("bench-consistency",
                                      "temporal chamfer for raw/fps/denoised variants");
    auto* benche = app.add_subcommand("bench-equivariance",
                                      "frame deviation and embedding similarity across "
                                      "perturbation levels");
    std::string benche_params;
    benche->add_option("--params", benche_params, "encoder params file (default: init from seed)");
    auto* tr = app.add_subcommand("train", "contrastive training on a directory of clouds");
    std::string train_dir;
    tr->add_option("dataset", train_dir, "directory of .ply/.xyz files")->required();
    auto* act_cmd = app.add_subcommand("act", "run the canonicalization policy step");
    std::string act_obs, act_params;
    bool act_denoise = false;
    act_cmd->add_option("observation", act_obs, "observation JSON file")->required();
    act_cmd->add_option("--params", act_params, "encoder params file (default: init from seed)");
    act_cmd->add_flag("--denoise", act_denoise, "enable denoising before canonicalization");

    // allow the global flags to appear after the verb
    for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (gen->parsed()) return cmd_gen_synth(g);
        if (den->parsed()) return cmd_denoise(g, den_input);
        if (fps_cmd->parsed()) return cmd_fps(g, fps_input, fps_count);
        if (aug->parsed()) return cmd_augment(g, aug_input);
        if (canon->parsed()) return cmd_canonicalize(g, canon_input, canon_params);
        if (benchc->parsed()) return cmd_bench_consistency(g);
        if (benche->parsed()) return cmd_bench_equivariance(g, benche_params);
        if (tr->parsed()) return cmd_train(g, train_dir);
        if (act_cmd->parsed()) return cmd_act(g, act_obs, act_params, act_denoise);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitData;
    } catch (const DegenerateFrame& e) {
        std::cerr << "degenerate: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const DegenerateNeighborhood& e) {
        std::cerr << "degenerate: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const ZeroVector& e) {
        std::cerr << "degenerate: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const ZeroAggregate& e) {
        std::cerr << "degenerate: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitConfig;
}
