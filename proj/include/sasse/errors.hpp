#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sasse {

// Base class for all toolkit errors. The CLI maps ConfigError to exit
// code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateQuaternion : public Error {
public:
    using Error::Error;
};

class NonFiniteInput : public Error {
public:
    using Error::Error;
};

// Raised by the pose codec when a scalar cannot be represented at the
// requested precision.
class EncodeError : public Error {
public:
    enum class Kind { overflow, non_finite };

    EncodeError(Kind kind, int component, const std::string& what)
        : Error(what), kind_(kind), component_(component) {}

    Kind kind() const { return kind_; }
    // Pose component index (0..6), or -1 for bare scalars.
    int component() const { return component_; }

private:
    Kind kind_;
    int component_;
};

// A bit pattern decoded to NaN or +/-Inf; the caller decides the fallback.
class NonFiniteDecoded : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("parse error at line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class InvalidPose : public Error {
public:
    using Error::Error;
};

class KTooLarge : public Error {
public:
    using Error::Error;
};

class ClusterTooSmall : public Error {
public:
    ClusterTooSmall(std::size_t cluster, std::size_t size)
        : Error("cluster " + std::to_string(cluster) + " has " + std::to_string(size) +
                " items; at least 2 are required"),
          cluster_(cluster) {}

    std::size_t cluster() const { return cluster_; }

private:
    std::size_t cluster_;
};

class BruteforceTooLarge : public Error {
public:
    using Error::Error;
};

class InvalidEdge : public Error {
public:
    using Error::Error;
};

class DegenerateFit : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sasse
