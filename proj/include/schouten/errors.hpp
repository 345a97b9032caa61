#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace schouten {

/// Invalid argument to an operation (out-of-range index, bad recipe, malformed config).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the domain of a curvature function (point not inside the cone).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A metric that is not positive definite at some node.
class DegenerateMetricError : public std::runtime_error {
public:
    DegenerateMetricError(std::size_t node, const std::string& what)
        : std::runtime_error(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// A documented precondition that the caller violated (Neumann data, admissible start).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace schouten
