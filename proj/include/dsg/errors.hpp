#pragma once

#include <stdexcept>
#include <string>

namespace dsg {

/// Bad user-supplied configuration (resolution, tolerances, CLI input).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A mathematical hypothesis of an estimate or equation is violated
/// (curvature window, positivity of the prescription, ...).
struct hypothesis_error : std::runtime_error {
    explicit hypothesis_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Surface is not spacelike / metric degenerate at some node.
struct degenerate_error : std::runtime_error {
    explicit degenerate_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Iterative solver failed to reach its tolerance.
struct nonconvergence_error : std::runtime_error {
    explicit nonconvergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A transformed surface cannot be re-expressed as a graph over the equator.
struct reparametrization_error : std::runtime_error {
    explicit reparametrization_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dsg
