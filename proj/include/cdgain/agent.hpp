#pragma once

#include "cdgain/session.hpp"
#include "cdgain/tracking.hpp"

#include <cstdint>
#include <vector>

namespace cdgain {

struct AgentParams {
    double fitts_a = 0.15;              // s
    double fitts_b = 0.12;              // s/bit, motor-space ID
    double endpoint_noise_sigma = 0.2;  // per-axis sd as a fraction of W
    double clutch_penalty = 0.25;       // s per extra stroke
    double mt_noise_sigma = 0.08;       // s
    double reaction_time = 0.3;         // s, before the red tap
    // Z-Mapping arc height as a fraction of the calibrated span:
    // clamp(arc_min + arc_per_m * D, 0, 1).
    double arc_min = 0.3;
    double arc_per_m = 3.0;
    // Extra endpoint spread per unit of gain above 1 (Z-Mapping).
    double zmap_noise_per_gain = 0.05;
    double tap_duration = 0.05;
    double min_movement_time = 0.12;
    double hover_height = 0.01;         // PT and ST
    double phone_margin = 0.005;        // finger keeps this far inside the phone
    double sample_rate = 60.0;          // Hz
    int max_retries = 50;               // then the agent lands dead center

    void validate() const;
    double arc_fraction(double distance) const;
};

struct SimulatedTrialOutcome {
    double movement_time = 0.0;
    int misses = 0;
    int clutches = 0;
    double motor_distance = 0.0; // first movement, to the target center
    double motor_id = 0.0;
    std::vector<InputSample> trajectory;
};

struct MethodRun {
    std::vector<TrialRecord> records;
    std::vector<InputSample> inputs;
    std::vector<SimulatedTrialOutcome> trials;
};

// Runs every planned trial of `settings` through a Session, emitting finger
// samples at the agent's sample rate. Only PT, ST and ZM are modelled.
MethodRun simulate_method(const SessionSettings& settings, const AgentParams& params,
                          std::uint64_t seed);

SimulatedTrialOutcome simulate_trial(Method method, const Target& target,
                                     const HeightCalibration& cal, const AgentParams& params,
                                     std::uint64_t seed, const DisplayConfig& display = {});

struct SimulationSetup {
    DisplayConfig display;
    ZMappingParams zmap;
    double st_gain = 1.0;
    double tap_slop = 0.004;
    bool training = false;
    int trial_limit = 0; // 0 = all
};

// Settings for one method of a plan (main trials, training first when asked).
SessionSettings session_settings(const SessionPlan& plan, Method method,
                                 const SimulationSetup& setup);

// All three methods of the plan, records in method order.
std::vector<TrialRecord> simulate_session(const SessionPlan& plan, const AgentParams& params,
                                          std::uint64_t seed, const SimulationSetup& setup = {});

} // namespace cdgain
