#pragma once

#include "cdgain/agent.hpp"
#include "cdgain/experiment.hpp"
#include "cdgain/geometry.hpp"
#include "cdgain/session.hpp"
#include "cdgain/tracking.hpp"
#include "cdgain/transfer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cdgain {

// Everything a live or simulated session needs. JSON keys:
//
//   method, subject, seed, st_gain, tap_slop, count_inactive_touch_as_miss,
//   training, trial_limit,
//   display {width, height, phone {center [x,y], width, height},
//            start_point [x,y], min_target_width, edge_margin, red_width},
//   zmap {s_s, s_l, variant: endpoint_normalized | paper_literal},
//   zoom {s_min, s_max},
//   calibration {h_min, h_max},
//   transform {rotation [w,x,y,z], translation [x,y,z],
//              variant: literal | frame_change}
//
// Every key is optional; unknown keys are rejected.
struct SessionConfig {
    Method method = Method::ZM;
    int subject = 0;
    std::uint64_t seed = 1;
    DisplayConfig display;
    ZMappingParams zmap; // h_min/h_max are taken from `calibration`
    ZoomBounds zoom;
    HeightCalibration calibration;
    double st_gain = 1.0;
    double tap_slop = 0.004;
    bool count_inactive_touch_as_miss = false;
    bool training = false;
    int trial_limit = 0; // 0 = all
    std::optional<RigidTransform> transform;

    void validate() const;
};

// Keys absent from `text` keep the values of `defaults`. Violations throw a
// validation error naming the field.
SessionConfig parse_config(std::string_view text, const SessionConfig& defaults = {});
SessionConfig load_config(const std::string& path, const SessionConfig& defaults = {});
// Canonical JSON of the resolved config (all keys).
std::string config_to_json(const SessionConfig& cfg);

// Plans the subject's targets for cfg.method and builds the session.
SessionSettings make_session_settings(const SessionConfig& cfg);

// Batch simulation and the CLI: every session key plus
//   subjects, jobs, agent {fitts_a, fitts_b, endpoint_noise_sigma, ...}
// method and subject only matter to single-session commands.
struct BatchConfig {
    int subjects = 20;
    int jobs = 0; // worker threads, 0 = hardware concurrency
    SessionConfig session;
    AgentParams agent;

    void validate() const;
    SimulationSetup setup() const;
};

BatchConfig parse_batch_config(std::string_view text, const BatchConfig& defaults = {});
BatchConfig load_batch_config(const std::string& path, const BatchConfig& defaults = {});

std::string read_text_file(const std::string& path);

} // namespace cdgain
