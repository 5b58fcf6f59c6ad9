#pragma once

#include <stdexcept>
#include <string>

namespace gjn
{
    /// Input does not satisfy a model invariant (bad routing matrix, bad parameters, ...).
    class ValidationError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// A distribution lacks the moment needed by the requested computation.
    class CapabilityError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// A configured resource cap (event count, truncation length) was exceeded.
    class ResourceError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// A numerical procedure failed to converge.
    class NumericalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// A pathwise inequality that must hold on every sample path was breached.
    class InvariantViolation : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
} // namespace gjn
