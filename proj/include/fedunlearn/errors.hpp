#pragma once

#include <stdexcept>
#include <string>

namespace fedunlearn {

// Contract/configuration violations. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// NaN/Inf results, divergence, singular solves. Exit code 2.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what), index(-1) {}
    NumericError(const std::string& what, long offending_index)
        : std::runtime_error(what), index(offending_index) {}

    // Offending coordinate when the error concerns a parameter entry, -1 otherwise.
    long index;
};

// Checkpoint/report provenance mismatches. Exit code 3.
class ProvenanceError : public std::runtime_error {
public:
    explicit ProvenanceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fedunlearn
