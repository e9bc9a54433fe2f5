#pragma once

#include <stdexcept>
#include <string>

namespace seqdesign {

// Data cannot identify the parameters (missing response value, or all
// observations at one covariate).
struct SeparationError : std::runtime_error {
    explicit SeparationError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterative solver hit its iteration cap without meeting tolerance.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A grid cannot hold the states the solve needs.
struct GridError : std::runtime_error {
    explicit GridError(const std::string& msg) : std::runtime_error(msg) {}
};

// A brute-force enumeration would exceed its node cap.
struct EnumerationError : std::runtime_error {
    explicit EnumerationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace seqdesign
