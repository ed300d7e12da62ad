#pragma once

#include "cdgain/geometry.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace cdgain {

struct MarkerFrame {
    double timestamp = 0.0; // seconds
    std::vector<Vec3> markers;
};

struct FingerFilterConfig {
    Vec3 roi_min{-1.0, -1.0, -1.0};
    Vec3 roi_max{1.0, 1.0, 1.0};
    double max_jump = 0.05; // meters per frame

    void validate() const;
    bool in_roi(Vec3 p) const;
};

// Markers closer to each other than this (in distance to the previous
// position) are considered a tie.
inline constexpr double kFingerTieTolerance = 1e-6;

// Picks the finger marker out of a frame.
//
// Only markers inside the ROI are candidates. Without a previous position the
// frame must contain exactly one candidate. With one, the nearest candidate
// within max_jump wins. Empty, gated-out or tied frames yield nullopt and the
// caller keeps its last known position.
std::optional<Vec3> filter_finger_marker(const MarkerFrame& frame, std::optional<Vec3> prev,
                                         const FingerFilterConfig& cfg);

// A rigid body stays trackable with markers missing as long as three remain
// visible. `frame` holds the visible markers of one body.
bool validate_rigid_body(const MarkerFrame& frame, int expected_count);

struct HeightCalibration {
    double h_min = 0.0;
    double h_max = 0.10;

    void validate() const;
};

struct CalibrationOptions {
    std::size_t min_samples_per_segment = 10;
};

// h_min / h_max are the medians of the low and high pose segments.
HeightCalibration calibrate_height(std::span<const double> low_segment,
                                   std::span<const double> high_segment,
                                   const CalibrationOptions& options = {});

double median(std::span<const double> values);

// Recorded marker stream: one {"t": seconds, "markers": [[x,y,z], ...]} per
// line, timestamps strictly increasing. Blank lines are skipped.
std::vector<MarkerFrame> read_marker_stream(std::istream& in);
void write_marker_stream(std::ostream& out, std::span<const MarkerFrame> frames);

// Runs filter_finger_marker over a stream, holding the last known position
// through rejected frames. Frames before the first accepted one are skipped.
struct FingerSample {
    double t = 0.0;
    Vec3 position;
    bool held = false; // true when the filter rejected this frame
};
std::vector<FingerSample> track_finger(std::span<const MarkerFrame> frames,
                                       const FingerFilterConfig& cfg,
                                       const std::optional<RigidTransform>& to_scene = std::nullopt);

} // namespace cdgain
