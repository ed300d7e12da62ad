#pragma once

#include "cdgain/experiment.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace cdgain {

struct TrialRecord {
    Method method = Method::PT;
    int block = 1;
    int trial = 1;
    Target target;
    int id_category = 2;
    double movement_time = 0.0; // seconds, red touch-up to green touch-up
    int misses = 0;
    bool hit = true;
    std::uint64_t seed = 0;
    int subject = 0;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

enum class DisplayId { large, phone };

// The display on which selections count for a method.
DisplayId active_display(Method m) noexcept;

enum class TouchKind { touch_down, touch_up, sample };

struct TaskEvent {
    TouchKind kind = TouchKind::sample;
    Vec2 position;             // environment point that was touched
    DisplayId display = DisplayId::large;
    double time = 0.0;
    bool selection = true;     // false for touch-ups that ended a drag
};

enum class Phase { idle, red_shown, green_active, finished };

struct TaskPlan {
    Method method = Method::PT;
    int subject = 0;
    std::uint64_t seed = 0;
    std::vector<PlannedTrial> trials;
    Vec2 start_point;
    double red_width = 0.02;
    bool count_inactive_touch_as_miss = false;
};

// Cheap to copy: the plan is shared.
struct TaskState {
    std::shared_ptr<const TaskPlan> plan;
    std::size_t current = 0;
    Phase phase = Phase::idle;
    double red_up_time = 0.0;
    int misses = 0;
    double last_time = 0.0;
    bool started = false;

    const PlannedTrial* current_trial() const;
};

TaskState start_task(TaskPlan plan);

enum class TrialEventKind { red_selected, miss, acquired, finished };

const char* to_string(TrialEventKind k) noexcept;

struct TrialEvent {
    TrialEventKind kind = TrialEventKind::red_selected;
    int trial = 0;
    double mt_s = 0.0;
    int misses = 0;

    friend bool operator==(const TrialEvent&, const TrialEvent&) = default;
};

struct TaskStep {
    TaskState state;
    std::optional<TrialRecord> record; // main trials only
    std::vector<TrialEvent> events;
    bool reset_environment = false;
};

// Advances the red/green acquisition cycle by one input event. Throws a
// stream error when event times go backwards.
TaskStep step_task(const TaskState& state, const TaskEvent& event);

} // namespace cdgain
