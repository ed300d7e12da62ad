#pragma once

#include <stdexcept>
#include <string>

namespace cdgain {

enum class Errc {
    invalid_argument,
    invalid_plane,
    undefined_ratio,
    invalid_gain,
    invalid_scale,
    state,
    config,
    calibration_failed,
    insufficient_data,
    invalid_width,
    range,
    stream,
    undefined_accuracy,
    missing_data,
    test_inapplicable,
    data,
    parse,
    validation,
    protocol,
    io,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

    // Configuration/data problems the caller can fix, as opposed to runtime
    // failures. The CLI maps these to exit code 1.
    bool is_validation() const noexcept;

private:
    Errc code_;
};

} // namespace cdgain
