#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ancsp {

/// Base of every error thrown by the library. The C API maps each subclass
/// onto one ancsp_status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied values was violated.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Input is well-formed but violates the full-row-rank assumption
/// (line-spectral excitation, duplicated rows, ...).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// An adaptive filter produced non-finite coefficients.
class Divergence : public Error {
public:
    Divergence(std::string loop, std::size_t iteration)
        : Error(loop + " diverged at iteration " + std::to_string(iteration)),
          loop_(std::move(loop)), iteration_(iteration) {}

    const std::string& loop() const noexcept { return loop_; }
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::string loop_;
    std::size_t iteration_;
};

/// RLS inverse-correlation matrix lost symmetry beyond tolerance.
class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ancsp
