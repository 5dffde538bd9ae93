#pragma once

#include <stdexcept>
#include <string>

namespace cvd {

// Bad input, bad config, malformed files. CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Failures while fitting or evaluating models. CLI maps these to exit code 3.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cvd
