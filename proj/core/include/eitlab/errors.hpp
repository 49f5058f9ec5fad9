#ifndef EITLAB_ERRORS_HPP
#define EITLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace eitlab {

/// Bad input to an operation (wrong sizes, nonpositive conductivities,
/// incompatible boundary data, mismatched meshes or bases).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Request exceeds a memory guard (e.g. refinement level too large).
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// The mesh cannot resolve the requested structure: laminate period below
/// the element size, electrode arcs with too few vertices, aliasing of the
/// boundary basis.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A linear solve failed its relative residual check.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Newton inversion of a diffeomorphism did not converge.
class InversionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Too few usable samples for a fit.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace eitlab

#endif
