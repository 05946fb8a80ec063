#pragma once

#include <stdexcept>
#include <string>

namespace eraser {

/// Invalid argument values: non-finite angles, non-positive lengths, grids that
/// do not contain an aperture, and so on.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operations called in an order the model does not allow (e.g. evaluating a
/// coincidence pattern before the signal reached the detection plane).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Least-squares fringe fit that could not produce a usable result.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& message, std::string diagnostics)
        : std::runtime_error(message), diagnostics_(std::move(diagnostics)) {}

    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

}  // namespace eraser
