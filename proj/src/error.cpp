#include "cdgain/error.hpp"

namespace cdgain {

const char* to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_plane: return "invalid-plane";
    case Errc::undefined_ratio: return "undefined-ratio";
    case Errc::invalid_gain: return "invalid-gain";
    case Errc::invalid_scale: return "invalid-scale";
    case Errc::state: return "state";
    case Errc::config: return "config";
    case Errc::calibration_failed: return "calibration-failed";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::invalid_width: return "invalid-width";
    case Errc::range: return "range";
    case Errc::stream: return "stream";
    case Errc::undefined_accuracy: return "undefined-accuracy";
    case Errc::missing_data: return "missing-data";
    case Errc::test_inapplicable: return "test-inapplicable";
    case Errc::data: return "data";
    case Errc::parse: return "parse";
    case Errc::validation: return "validation";
    case Errc::protocol: return "protocol";
    case Errc::io: return "io";
    }
    return "unknown";
}

bool Error::is_validation() const noexcept {
    switch (code_) {
    case Errc::config:
    case Errc::validation:
    case Errc::parse:
    case Errc::data:
    case Errc::invalid_argument:
    case Errc::calibration_failed:
    case Errc::insufficient_data:
        return true;
    default:
        return false;
    }
}

} // namespace cdgain
