#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mfb {

enum class ErrorCode {
    singular_evaluation,
    non_finite,
    singular_diffusion,
    invalid_law,
    invalid_grid,
    out_of_range,
    missing_increments,
    invalid_argument,
    parse_error,
    validation_error,
    io_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Error(ErrorCode code, const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), code_(code), step_(step) {}

    ErrorCode code() const noexcept { return code_; }

    /// Grid step at which a simulation failed, when known.
    std::optional<std::size_t> step() const noexcept { return step_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> step_;
};

}  // namespace mfb
