#pragma once

#include <string>
#include <vector>

#include "canon3d/geometry.hpp"

namespace canon3d {

/// ASCII PLY, element vertex with float x y z and optional int label.
void write_ply(const PointCloud& cloud, const std::string& path);
PointCloud read_ply(const std::string& path);

/// Whitespace-delimited x y z, label as optional fourth column.
void write_xyz(const PointCloud& cloud, const std::string& path);
PointCloud read_xyz(const std::string& path);

/// Format chosen by extension (.ply / .xyz).
void write_cloud(const PointCloud& cloud, const std::string& path);
PointCloud read_cloud(const std::string& path);

/// Text written to a temp file in the same directory, then renamed into place.
void atomic_write_text(const std::string& path, const std::string& content);

/// Shortest round-trip formatting for CSV/JSON payloads.
std::string format_double(double v);

}  // namespace canon3d
