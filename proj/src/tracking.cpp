#include "cdgain/tracking.hpp"

#include "cdgain/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <json.hpp>
#include <ostream>
#include <string>

namespace cdgain {

void FingerFilterConfig::validate() const {
    if (!(roi_min.x < roi_max.x && roi_min.y < roi_max.y && roi_min.z < roi_max.z))
        throw Error(Errc::config, "roi_min must be below roi_max on every axis");
    if (!(max_jump > 0.0))
        throw Error(Errc::config, "max_jump must be positive");
}

bool FingerFilterConfig::in_roi(Vec3 p) const {
    return p.x >= roi_min.x && p.x <= roi_max.x && p.y >= roi_min.y && p.y <= roi_max.y &&
           p.z >= roi_min.z && p.z <= roi_max.z;
}

std::optional<Vec3> filter_finger_marker(const MarkerFrame& frame, std::optional<Vec3> prev,
                                         const FingerFilterConfig& cfg) {
    cfg.validate();
    std::vector<Vec3> candidates;
    for (const Vec3& m : frame.markers)
        if (is_finite(m) && cfg.in_roi(m))
            candidates.push_back(m);

    if (!prev) {
        if (candidates.size() == 1)
            return candidates.front();
        return std::nullopt;
    }

    double best = std::numeric_limits<double>::infinity();
    double second = best;
    std::optional<Vec3> pick;
    for (const Vec3& c : candidates) {
        const double d = distance(c, *prev);
        if (d > cfg.max_jump)
            continue;
        if (d < best) {
            second = best;
            best = d;
            pick = c;
        } else if (d < second) {
            second = d;
        }
    }
    if (pick && second - best <= kFingerTieTolerance)
        return std::nullopt;
    return pick;
}

bool validate_rigid_body(const MarkerFrame& frame, int expected_count) {
    if (expected_count < 3)
        throw Error(Errc::config, "a rigid body needs at least 3 markers");
    const auto visible = std::min<std::size_t>(frame.markers.size(),
                                               static_cast<std::size_t>(expected_count));
    return visible >= 3;
}

void HeightCalibration::validate() const {
    if (!std::isfinite(h_min) || !std::isfinite(h_max) || h_min < 0.0)
        throw Error(Errc::validation, "calibration.h_min must be finite and non-negative");
    if (!(h_max > h_min))
        throw Error(Errc::validation, "calibration.h_max must be greater than calibration.h_min");
}

double median(std::span<const double> values) {
    if (values.empty())
        throw Error(Errc::insufficient_data, "median of an empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

HeightCalibration calibrate_height(std::span<const double> low_segment,
                                   std::span<const double> high_segment,
                                   const CalibrationOptions& options) {
    if (low_segment.size() < options.min_samples_per_segment ||
        high_segment.size() < options.min_samples_per_segment)
        throw Error(Errc::insufficient_data,
                    "height calibration needs at least " +
                        std::to_string(options.min_samples_per_segment) +
                        " samples per pose segment");
    for (double z : low_segment)
        if (!std::isfinite(z))
            throw Error(Errc::data, "non-finite calibration sample");
    for (double z : high_segment)
        if (!std::isfinite(z))
            throw Error(Errc::data, "non-finite calibration sample");

    HeightCalibration cal{median(low_segment), median(high_segment)};
    if (!(cal.h_max > cal.h_min))
        throw Error(Errc::calibration_failed,
                    "high pose median is not above the low pose median");
    return cal;
}

std::vector<MarkerFrame> read_marker_stream(std::istream& in) {
    std::vector<MarkerFrame> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        MarkerFrame frame;
        try {
            const auto j = nlohmann::json::parse(line);
            frame.timestamp = j.at("t").get<double>();
            for (const auto& m : j.at("markers")) {
                if (m.size() != 3)
                    throw Error(Errc::parse, "marker must have 3 coordinates");
                frame.markers.push_back({m[0].get<double>(), m[1].get<double>(), m[2].get<double>()});
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse, "marker stream line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(Errc::parse, "marker stream line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!frames.empty() && !(frame.timestamp > frames.back().timestamp))
            throw Error(Errc::stream, "marker stream line " + std::to_string(line_no) +
                                          ": timestamps must be strictly increasing");
        frames.push_back(std::move(frame));
    }
    return frames;
}

void write_marker_stream(std::ostream& out, std::span<const MarkerFrame> frames) {
    for (const auto& f : frames) {
        nlohmann::ordered_json j;
        j["t"] = f.timestamp;
        auto markers = nlohmann::ordered_json::array();
        for (const Vec3& m : f.markers)
            markers.push_back({m.x, m.y, m.z});
        j["markers"] = std::move(markers);
        out << j.dump() << '\n';
    }
}

std::vector<FingerSample> track_finger(std::span<const MarkerFrame> frames,
                                       const FingerFilterConfig& cfg,
                                       const std::optional<RigidTransform>& to_scene) {
    std::vector<FingerSample> out;
    std::optional<Vec3> last;
    for (const auto& frame : frames) {
        MarkerFrame scene = frame;
        if (to_scene)
            for (Vec3& m : scene.markers)
                m = apply_transform_point(*to_scene, m);
        const auto hit = filter_finger_marker(scene, last, cfg);
        if (hit)
            last = hit;
        if (last)
            out.push_back({frame.timestamp, *last, !hit.has_value()});
    }
    return out;
}

} // namespace cdgain
