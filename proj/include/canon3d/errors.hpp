#pragma once

#include <stdexcept>
#include <string>

namespace canon3d {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateFrame : Error {
    explicit DegenerateFrame(const std::string& msg = "degenerate frame vectors") : Error(msg) {}
};

struct DegenerateNeighborhood : Error {
    explicit DegenerateNeighborhood(const std::string& msg = "rank-deficient neighborhood") : Error(msg) {}
};

struct ZeroAggregate : Error {
    explicit ZeroAggregate(const std::string& msg = "aggregated normal has near-zero norm") : Error(msg) {}
};

struct EmptyCloud : Error {
    explicit EmptyCloud(const std::string& msg = "point cloud is empty") : Error(msg) {}
};

struct BadK : Error {
    explicit BadK(const std::string& msg) : Error(msg) {}
};

struct BadM : Error {
    explicit BadM(const std::string& msg) : Error(msg) {}
};

struct TooFewPoints : Error {
    explicit TooFewPoints(const std::string& msg) : Error(msg) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

struct NotCentered : Error {
    explicit NotCentered(const std::string& msg = "cloud is not centered") : Error(msg) {}
};

struct ZeroVector : Error {
    explicit ZeroVector(const std::string& msg = "zero-norm vector in cosine similarity") : Error(msg) {}
};

struct NoTarget : Error {
    explicit NoTarget(const std::string& msg = "no target-labeled points in observation") : Error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace canon3d
