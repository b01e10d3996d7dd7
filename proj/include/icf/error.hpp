#pragma once

#include <stdexcept>
#include <string>

namespace icf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters in a function spec, grid size, flow or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a mathematical operation (e.g. a point outside the positive cone).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation requested for an ambient space that does not support it.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A support state that violates its chart constraints at some node.
class StateInvalidError : public Error {
public:
    StateInvalidError(const std::string& what, int node, double t)
        : Error(what), node_(node), t_(t) {}
    int node() const { return node_; }
    double time() const { return t_; }

private:
    int node_;
    double t_;
};

/// The radii matrix stopped being positive definite at some node.
class ConvexityLostError : public Error {
public:
    ConvexityLostError(const std::string& what, int node, double t)
        : Error(what), node_(node), t_(t) {}
    int node() const { return node_; }
    double time() const { return t_; }

private:
    int node_;
    double t_;
};

}  // namespace icf
