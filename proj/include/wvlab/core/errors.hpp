#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wvlab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: non-Hermitian matrices, bad normalisation, bad scenario fields.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A displacement or parameter outside the region the discrete model can represent.
class RangeError : public Error {
public:
    using Error::Error;
};

/// The inputs are well formed but violate an assumption of the weak-measurement model.
class PhysicsError : public Error {
public:
    using Error::Error;
};

class NearOrthogonalPostselection : public PhysicsError {
public:
    NearOrthogonalPostselection(const std::string& what, double probability)
        : PhysicsError(what), probability_(probability) {}

    double probability() const noexcept { return probability_; }

private:
    double probability_;
};

/// The pointer carries a probability current, so first-order predictions do not apply.
class InvalidPointerState : public PhysicsError {
public:
    InvalidPointerState(const std::string& what, double max_current)
        : PhysicsError(what), max_current_(max_current) {}

    double max_current() const noexcept { return max_current_; }

private:
    double max_current_;
};

class StatisticsError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, std::size_t sample)
        : Error(what), sample_(sample) {}

    std::size_t sample() const noexcept { return sample_; }

private:
    std::size_t sample_;
};

}  // namespace wvlab
