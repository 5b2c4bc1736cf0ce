#include "canon3d/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace canon3d {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        os << content;
        if (!os) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

void write_ply(const PointCloud& cloud, const std::string& path) {
    std::ostringstream os;
    os << "ply\nformat ascii 1.0\n";
    os << "element vertex " << cloud.size() << "\n";
    os << "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_labels()) os << "property int label\n";
    os << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        os << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z());
        if (cloud.has_labels()) os << ' ' << cloud.labels[i];
        os << '\n';
    }
    atomic_write_text(path, os.str());
}

PointCloud read_ply(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    auto next = [&]() {
        if (!std::getline(is, line)) fail("unexpected end of file");
        ++lineno;
    };
    next();
    if (line != "ply") fail("missing ply magic");
    long vertex_count = -1;
    bool has_label = false;
    int coord_props = 0;
    while (true) {
        next();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "end_header") break;
        if (tok == "format") {
            std::string kind;
            ls >> kind;
            if (kind != "ascii") fail("only ascii PLY is supported");
        } else if (tok == "element") {
            std::string name;
            ls >> name >> vertex_count;
            if (name != "vertex") fail("only vertex elements are supported");
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            if (name == "x" || name == "y" || name == "z") ++coord_props;
            else if (name == "label") has_label = true;
            else fail("unsupported property " + name);
        } else if (tok == "comment") {
            continue;
        } else {
            fail("unexpected header token " + tok);
        }
    }
    if (vertex_count < 0) fail("missing element vertex declaration");
    if (coord_props != 3) fail("expected x, y, z properties");
    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    if (has_label) cloud.labels.reserve(vertex_count);
    for (long i = 0; i < vertex_count; ++i) {
        next();
        std::istringstream ls(line);
        Vec3 p;
        if (!(ls >> p.x() >> p.y() >> p.z())) fail("malformed vertex row");
        if (has_label) {
            int label;
            if (!(ls >> label)) fail("missing label column");
            cloud.labels.push_back(label);
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

void write_xyz(const PointCloud& cloud, const std::string& path) {
    std::ostringstream os;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        os << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z());
        if (cloud.has_labels()) os << ' ' << cloud.labels[i];
        os << '\n';
    }
    atomic_write_text(path, os.str());
}

PointCloud read_xyz(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    PointCloud cloud;
    std::string line;
    int lineno = 0;
    bool labels_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Vec3 p;
        if (!(ls >> p.x() >> p.y() >> p.z())) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed xyz row");
        }
        int label;
        if (ls >> label) {
            if (!labels_seen && !cloud.points.empty()) {
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": label column appears mid-file");
            }
            labels_seen = true;
            cloud.labels.push_back(label);
        } else if (labels_seen) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": missing label column");
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void write_cloud(const PointCloud& cloud, const std::string& path) {
    if (ends_with(path, ".ply")) return write_ply(cloud, path);
    if (ends_with(path, ".xyz")) return write_xyz(cloud, path);
    throw IoError("unsupported cloud format (want .ply or .xyz): " + path);
}

PointCloud read_cloud(const std::string& path) {
    if (ends_with(path, ".ply")) return read_ply(path);
    if (ends_with(path, ".xyz")) return read_xyz(path);
    throw IoError("unsupported cloud format (want .ply or .xyz): " + path);
}

}  // namespace canon3d
