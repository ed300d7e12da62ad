#include "cdgain/task.hpp"

#include "cdgain/error.hpp"

#include <string>

namespace cdgain {

DisplayId active_display(Method m) noexcept {
    return m == Method::PT ? DisplayId::large : DisplayId::phone;
}

const char* to_string(TrialEventKind k) noexcept {
    switch (k) {
    case TrialEventKind::red_selected: return "red_selected";
    case TrialEventKind::miss: return "miss";
    case TrialEventKind::acquired: return "acquired";
    case TrialEventKind::finished: return "finished";
    }
    return "?";
}

const PlannedTrial* TaskState::current_trial() const {
    if (!plan || current >= plan->trials.size())
        return nullptr;
    return &plan->trials[current];
}

TaskState start_task(TaskPlan plan) {
    TaskState s;
    s.plan = std::make_shared<const TaskPlan>(std::move(plan));
    return s;
}

TaskStep step_task(const TaskState& state, const TaskEvent& event) {
    if (!state.plan)
        throw Error(Errc::state, "task has no plan");
    if (state.started && event.time < state.last_time)
        throw Error(Errc::stream, "event time " + std::to_string(event.time) +
                                      " precedes previous " + std::to_string(state.last_time));

    TaskStep out{state, std::nullopt, {}, false};
    TaskState& s = out.state;
    s.started = true;
    s.last_time = event.time;
    const TaskPlan& plan = *s.plan;

    if (s.phase == Phase::idle)
        s.phase = plan.trials.empty() ? Phase::finished : Phase::red_shown;
    if (s.phase == Phase::finished || event.kind != TouchKind::touch_up || !event.selection)
        return out;

    const bool on_active = event.display == active_display(plan.method);
    const PlannedTrial& trial = plan.trials[s.current];

    if (s.phase == Phase::red_shown) {
        if (on_active && distance(event.position, plan.start_point) <= plan.red_width / 2.0) {
            s.phase = Phase::green_active;
            s.red_up_time = event.time;
            s.misses = 0;
            out.events.push_back({TrialEventKind::red_selected, trial.trial, 0.0, 0});
        }
        return out;
    }

    // green active
    if (!on_active) {
        if (plan.count_inactive_touch_as_miss) {
            ++s.misses;
            out.events.push_back({TrialEventKind::miss, trial.trial, 0.0, s.misses});
        }
        return out;
    }
    if (distance(event.position, trial.target.center) > trial.target.width / 2.0) {
        ++s.misses;
        out.events.push_back({TrialEventKind::miss, trial.trial, 0.0, s.misses});
        return out;
    }

    const double mt = event.time - s.red_up_time;
    out.events.push_back({TrialEventKind::acquired, trial.trial, mt, s.misses});
    if (!trial.training) {
        TrialRecord r;
        r.method = plan.method;
        r.block = trial.block;
        r.trial = trial.trial;
        r.target = trial.target;
        r.id_category = id_category(trial.target.id_value);
        r.movement_time = mt;
        r.misses = s.misses;
        r.hit = true;
        r.seed = plan.seed;
        r.subject = plan.subject;
        out.record = r;
    }
    out.reset_environment = true;
    s.misses = 0;
    ++s.current;
    if (s.current >= plan.trials.size()) {
        s.phase = Phase::finished;
        out.events.push_back({TrialEventKind::finished, trial.trial, 0.0, 0});
    } else {
        s.phase = Phase::red_shown;
    }
    return out;
}

} // namespace cdgain
