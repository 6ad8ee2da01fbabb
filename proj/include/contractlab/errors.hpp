#pragma once

#include <stdexcept>
#include <string>

namespace contractlab {

// Bad input: out-of-range index, state outside a feasible set, malformed config.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A numerical procedure failed to converge or to bracket a root.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace contractlab
