#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctckit {

// Base class for everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// A matrix that was supposed to be a density operator, unitary or Bloch vector
// violates one of its invariants.
class InvalidStateError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Numerical trouble inside a solver (residual above tolerance and the like).
class SolverDiagnostic : public Error {
public:
    using Error::Error;
};

class CensusError : public Error {
public:
    explicit CensusError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    // 1-based line number in the record file, 0 when not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ctckit
