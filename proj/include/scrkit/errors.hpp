#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scrkit {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or out-of-contract input (non-finite entries, dimension
// mismatches, values outside a documented range).
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

// A documented precondition of an operation does not hold (e.g. the tail
// condition required before picking delta0, or a coupling that is not a
// scaled full-cycle permutation).
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(what) {}
};

// The requested computation needs information the object cannot provide
// (e.g. a continuity modulus for a readout class we cannot bound).
class CapabilityError : public Error {
public:
    explicit CapabilityError(const std::string& what) : Error(what) {}
};

// A construction would exceed a resource guardrail. Carries the state
// dimension the construction would have needed.
class ResourceError : public Error {
public:
    ResourceError(const std::string& what, std::size_t required_dimension)
        : Error(what), required_dimension_(required_dimension) {}

    std::size_t required_dimension() const noexcept { return required_dimension_; }

private:
    std::size_t required_dimension_;
};

} // namespace scrkit
