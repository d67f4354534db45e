#pragma once

#include <stdexcept>
#include <string>

namespace spinlens {

/// Malformed input: bad extents, out-of-range indices, missing config sections.
class InvalidSpec : public std::invalid_argument {
public:
    explicit InvalidSpec(const std::string& what) : std::invalid_argument(what) {}
};

/// Request outside what the implementation supports (e.g. more than three excitations).
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine could not meet its contract (non-finite spectrum bounds, divergent sums).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Input that makes an operation meaningless (e.g. more excitations than occupied sites).
class DegenerateInput : public std::runtime_error {
public:
    explicit DegenerateInput(const std::string& what) : std::runtime_error(what) {}
};

} // namespace spinlens
