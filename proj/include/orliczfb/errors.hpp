#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace orliczfb {

/// Argument outside the mathematical domain of an operation (t < 0, eps <= 0, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// An iterative procedure (root bracketing, Newton) gave up.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inner Krylov solve broke down.
struct SingularSystem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

/// One or more fields failed validation; `fields` names each offender.
struct ValidationError : std::runtime_error {
    ValidationError(std::vector<std::string> fields, const std::string& what)
        : std::runtime_error(what), fields(std::move(fields)) {}
    std::vector<std::string> fields;
};

struct EmptyBand : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BallOutsideDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RayExitsDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace orliczfb
