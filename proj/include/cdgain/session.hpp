#pragma once

#include "cdgain/task.hpp"
#include "cdgain/transfer.hpp"

#include <optional>
#include <vector>

namespace cdgain {

enum class TouchPhase { none, down, up };

const char* to_string(TouchPhase t) noexcept;
TouchPhase parse_touch_phase(std::string_view s);

// One finger sample in display coordinates (z = height above the phone), or
// in tracker coordinates when the session has a transform.
struct InputSample {
    double t = 0.0;
    Vec3 p;
    TouchPhase touch = TouchPhase::none;
};

struct SessionSettings {
    Method method = Method::PT;
    DisplayConfig display;
    ZMappingParams zmap; // h_min/h_max hold the height calibration
    ZoomBounds zoom;
    double st_gain = 1.0;
    double tap_slop = 0.004;
    bool count_inactive_touch_as_miss = false;
    int subject = 0;
    std::uint64_t seed = 0;
    std::vector<PlannedTrial> trials;
    std::optional<RigidTransform> transform;

    void validate() const;
};

// Environment point q is drawn on the large display at scale * q + offset.
struct MappedOutput {
    double t = 0.0;
    Vec2 f; // environment point under the finger
    double gain = 1.0;
    double scale = 1.0;
    Vec2 offset;
};

struct SessionOutput {
    MappedOutput mapped;
    std::vector<TrialEvent> events;
    std::optional<TrialRecord> record;
};

// Drives transfer function and task state from finger samples. Sample times
// must strictly increase. Touching on the phone freezes Z-Mapping and
// Z-Scaling and drags the environment 1:1; in ST it drags with st_gain.
class Session {
public:
    explicit Session(SessionSettings settings);

    SessionOutput feed(const InputSample& in);

    // Only before the first sample.
    void set_calibration(double h_min, double h_max);

    const SessionSettings& settings() const { return settings_; }
    const std::vector<TrialRecord>& records() const { return records_; }
    Phase phase() const { return task_.phase; }
    bool finished() const { return task_.phase == Phase::finished; }
    std::size_t samples() const { return samples_; }

private:
    void reset_view(Vec3 p);
    double view_scale() const;
    Vec2 view_offset() const;
    Vec2 env_under(Vec3 p) const;

    SessionSettings settings_;
    TaskState task_;
    std::vector<TrialRecord> records_;
    std::size_t samples_ = 0;
    double last_t_ = 0.0;

    Vec3 last_p_;
    bool touching_ = false;
    DisplayId touch_display_ = DisplayId::large;
    Vec2 touch_origin_;
    double touch_excursion_ = 0.0;

    Vec2 env_offset_; // PT, ST, ZM
    MapperState zmap_;
    Vec2 zmap_f_;
    ZScaleState zscale_;
    Plane screen_;
};

} // namespace cdgain
