#include "cdgain/agent.hpp"

#include "cdgain/error.hpp"
#include "cdgain/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cdgain {

void AgentParams::validate() const {
    if (!(fitts_b > 0.0))
        throw Error(Errc::validation, "agent.fitts_b must be positive");
    if (!(fitts_a >= 0.0))
        throw Error(Errc::validation, "agent.fitts_a must be non-negative");
    if (!(endpoint_noise_sigma >= 0.0))
        throw Error(Errc::validation, "agent.endpoint_noise_sigma must be non-negative");
    if (!(clutch_penalty >= 0.0) || !(mt_noise_sigma >= 0.0) || !(reaction_time >= 0.0) ||
        !(zmap_noise_per_gain >= 0.0))
        throw Error(Errc::validation, "agent time and noise parameters must be non-negative");
    if (!(tap_duration > 0.0) || !(min_movement_time > tap_duration))
        throw Error(Errc::validation, "agent.min_movement_time must exceed agent.tap_duration");
    if (!(sample_rate > 0.0))
        throw Error(Errc::validation, "agent.sample_rate must be positive");
    if (!(hover_height >= 0.0) || !(phone_margin >= 0.0))
        throw Error(Errc::validation, "agent.hover_height and agent.phone_margin must be non-negative");
    if (max_retries < 0)
        throw Error(Errc::validation, "agent.max_retries must be non-negative");
}

double AgentParams::arc_fraction(double distance) const {
    return std::clamp(arc_min + arc_per_m * distance, 0.0, 1.0);
}

namespace {

double min_jerk(double tau) {
    return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

struct Segment {
    Vec3 to;
    TouchPhase end_touch = TouchPhase::none;
    bool fixed = false; // final contact hold, lasts tap_duration
};

struct Movement {
    std::vector<Segment> segments;
    int clutches = 0;
    double motor_distance = 0.0; // to the intended center, for the MT model
    double motor_width = 0.0;
    double spread = 1.0;         // endpoint sd multiplier
};

// Largest s >= 0 with p + s*u inside r. p is clamped first, so a point a
// rounding error outside an edge still sees the room behind it.
double room_along(Vec2 p, Vec2 u, const Rect& r) {
    p = r.clamp(p);
    double s = std::numeric_limits<double>::infinity();
    if (u.x > 0.0) s = std::min(s, (r.max.x - p.x) / u.x);
    if (u.x < 0.0) s = std::min(s, (r.min.x - p.x) / u.x);
    if (u.y > 0.0) s = std::min(s, (r.max.y - p.y) / u.y);
    if (u.y < 0.0) s = std::min(s, (r.min.y - p.y) / u.y);
    return std::max(s, 0.0);
}

class Driver {
public:
    Driver(Session& session, const AgentParams& params, std::uint64_t seed)
        : session_(session), params_(params), rng_(seed) {
        const auto& st = session.settings();
        if (st.method == Method::ZS)
            throw Error(Errc::config, "the agent does not simulate Z-Scaling");
        const Rect& phone = st.display.phone;
        const double m = params.phone_margin;
        inner_ = {{phone.min.x + m, phone.min.y + m}, {phone.max.x - m, phone.max.y - m}};
        if (st.method != Method::PT) {
            if (!(inner_.width() > 0.0) || !(inner_.height() > 0.0))
                throw Error(Errc::config, "phone too small for agent.phone_margin");
            if (!inner_.contains(st.display.start_point))
                throw Error(Errc::config, "the agent needs the start point on the phone");
        }
        pos_ = lift(st.display.start_point, rest_height());
        emit(0.0, pos_, TouchPhase::none);
    }

    void run(MethodRun& out) {
        while (!session_.finished()) {
            const std::size_t first_input = inputs_.size();
            const PlannedTrial* trial = current_trial();
            SimulatedTrialOutcome outcome = run_trial(*trial);
            outcome.trajectory.assign(inputs_.begin() + static_cast<std::ptrdiff_t>(first_input),
                                      inputs_.end());
            out.trials.push_back(std::move(outcome));
        }
        out.records = session_.records();
        out.inputs = std::move(inputs_);
    }

private:
    const PlannedTrial* current_trial() const {
        const auto& trials = session_.settings().trials;
        return &trials[session_.records().size() + acquired_training_];
    }

    double rest_height() const {
        const auto& st = session_.settings();
        return st.method == Method::ZM ? st.zmap.h_min : params_.hover_height;
    }

    void emit(double t, Vec3 p, TouchPhase touch) {
        InputSample in{t, p, touch};
        last_ = session_.feed(in);
        inputs_.push_back(in);
        for (const auto& e : last_.events) {
            if (e.kind == TrialEventKind::acquired)
                acquired_ = true;
            if (e.kind == TrialEventKind::miss)
                missed_ = true;
            if (e.kind == TrialEventKind::red_selected)
                red_selected_ = true;
        }
        t_ = t;
        pos_ = p;
    }

    // Plays `mv` so that the final touch-up lands exactly at t_ + duration.
    void play(const Movement& mv, double duration) {
        const double t0 = t_;
        const double budget = duration - params_.tap_duration;
        constexpr double kSlack = 0.002; // m, gives zero-length moves some time
        double total = 0.0;
        Vec3 from = pos_;
        for (const auto& s : mv.segments) {
            if (!s.fixed)
                total += distance(from, s.to) + kSlack;
            from = s.to;
        }
        double elapsed = 0.0;
        from = pos_;
        for (std::size_t i = 0; i < mv.segments.size(); ++i) {
            const Segment& s = mv.segments[i];
            const double d = s.fixed ? params_.tap_duration
                                     : budget * (distance(from, s.to) + kSlack) / total;
            const double seg_start = t0 + elapsed;
            elapsed += d;
            const bool last = i + 1 == mv.segments.size();
            const double seg_end = last ? t0 + duration : t0 + elapsed;
            const int n = std::max(1, static_cast<int>(std::ceil(d * params_.sample_rate)));
            for (int k = 1; k <= n; ++k) {
                if (k == n) {
                    emit(seg_end, s.to, s.end_touch);
                } else {
                    const double tau = static_cast<double>(k) / n;
                    const double sm = min_jerk(tau);
                    emit(seg_start + d * tau, from + (s.to - from) * sm, TouchPhase::none);
                }
            }
            from = s.to;
        }
    }

    // Tap at finger position q (already on the surface plane in xy).
    static void append_tap(Movement& mv, Vec2 q, double hover) {
        mv.segments.push_back({lift(q, hover)});
        mv.segments.push_back({lift(q, 0.0), TouchPhase::down});
        mv.segments.push_back({lift(q, 0.0), TouchPhase::up, true});
    }

    // Plan a movement that ends with a tap selecting environment point `aim`.
    // `center` is the intended point without scatter, used for motor distance.
    Movement plan_select(Vec2 aim, Vec2 center, double arc) {
        const auto& st = session_.settings();
        Movement mv;
        switch (st.method) {
        case Method::PT:
            mv.motor_distance = distance(pos_.xy(), center);
            mv.motor_width = 1.0;
            append_tap(mv, aim, params_.hover_height);
            break;
        case Method::ST:
            plan_st(mv, aim, center);
            break;
        case Method::ZM:
            plan_zm(mv, aim, center, arc);
            break;
        case Method::ZS:
            break;
        }
        return mv;
    }

    void plan_st(Movement& mv, Vec2 aim, Vec2 center) {
        const auto& st = session_.settings();
        const double g = st.st_gain;
        const Vec2 offset = last_.mapped.offset;
        const Vec2 shown = aim + offset;
        mv.motor_width = 1.0 / g;
        const Vec2 pc = st.display.phone.center();
        if (inner_.contains(shown)) {
            mv.motor_distance = distance(pos_.xy(), center + offset);
            append_tap(mv, shown, params_.hover_height);
            return;
        }
        // Drag the environment until the aim point sits at the phone center.
        const Vec2 drag = (pc - shown) / g;
        const double len = norm(drag);
        const Vec2 u = drag / len;
        const double chord = room_along(pc, u, inner_) + room_along(pc, -u, inner_);
        const int strokes = static_cast<int>(std::ceil(len / chord));
        const Vec2 v = drag / strokes;
        for (int i = 0; i < strokes; ++i) {
            const Vec2 a = pc - v / 2.0;
            const Vec2 b = pc + v / 2.0;
            mv.segments.push_back({lift(a, params_.hover_height)});
            mv.segments.push_back({lift(a, 0.0), TouchPhase::down});
            mv.segments.push_back({lift(b, 0.0), TouchPhase::up});
        }
        mv.clutches = strokes - 1;
        mv.motor_distance = norm((pc - (center + offset)) / g);
        append_tap(mv, pc, params_.hover_height);
    }

    void plan_zm(Movement& mv, Vec2 aim, Vec2 center, double arc) {
        const auto& st = session_.settings();
        const Vec2 f = last_.mapped.f;
        const double z_arc = st.zmap.h_min + arc * (st.zmap.h_max - st.zmap.h_min);
        const double g = zmap_gain(z_arc, st.zmap);
        mv.motor_width = 1.0;
        mv.motor_distance = distance(f, center) / g;
        mv.spread = 1.0 + params_.zmap_noise_per_gain * (g - 1.0);

        Vec2 p = pos_.xy();
        const Vec2 step = (aim - f) / g;
        double remaining = norm(step);
        if (remaining == 0.0) {
            append_tap(mv, p, z_arc);
            return;
        }
        const Vec2 u = step / remaining;
        mv.segments.push_back({lift(p, z_arc)}); // vertical rise, f unchanged
        for (int guard = 0; guard < 1000; ++guard) {
            const double ahead = room_along(p, u, inner_);
            if (remaining <= ahead) {
                p = p + u * remaining;
                mv.segments.push_back({lift(p, z_arc)});
                mv.segments.push_back({lift(p, 0.0), TouchPhase::down});
                mv.segments.push_back({lift(p, 0.0), TouchPhase::up, true});
                return;
            }
            if (ahead > 0.0) {
                p = p + u * ahead;
                remaining -= ahead;
                mv.segments.push_back({lift(p, z_arc)});
            }
            // Clutch: land, slide back across the phone with f frozen, lift.
            const double back = room_along(p, -u, inner_);
            if (back < 2.0 * st.tap_slop)
                throw Error(Errc::config, "phone too small for Z-Mapping clutching");
            mv.segments.push_back({lift(p, 0.0), TouchPhase::down});
            p = p - u * back;
            mv.segments.push_back({lift(p, 0.0), TouchPhase::up});
            mv.segments.push_back({lift(p, z_arc)});
            ++mv.clutches;
        }
        throw Error(Errc::state, "Z-Mapping stroke planning did not converge");
    }

    double sample_mt(double id_motor, int clutches) {
        const double noise = params_.mt_noise_sigma > 0.0 ? rng_.normal(0.0, params_.mt_noise_sigma) : 0.0;
        return std::max(params_.min_movement_time, params_.fitts_a + params_.fitts_b * id_motor +
                                                       clutches * params_.clutch_penalty + noise);
    }

    Vec2 scatter(double sd) {
        if (!(sd > 0.0))
            return {};
        const double x = rng_.normal(0.0, sd);
        const double y = rng_.normal(0.0, sd);
        return {x, y};
    }

    SimulatedTrialOutcome run_trial(const PlannedTrial& trial) {
        const auto& st = session_.settings();
        const Vec2 start = st.display.start_point;
        const Target& target = trial.target;
        SimulatedTrialOutcome outcome;

        // Return to the red target and tap it.
        red_selected_ = false;
        for (int attempt = 0; !red_selected_; ++attempt) {
            if (attempt > 10)
                throw Error(Errc::state, "agent could not select the red target");
            const Movement mv = plan_select(start, start, 0.0);
            const double d = session_.settings().method == Method::ST
                                 ? distance(pos_.xy(), start + last_.mapped.offset)
                                 : distance(pos_.xy(), start);
            const double dur = params_.reaction_time + params_.min_movement_time +
                               params_.fitts_b * std::log2(d / st.display.red_width + 1.0);
            play(mv, dur);
        }

        acquired_ = false;
        bool first = true;
        int misses = 0;
        Vec2 selected{};
        while (!acquired_) {
            const bool exact = misses >= params_.max_retries;
            Movement mv;
            double mt;
            if (first) {
                const Vec2 f = st.method == Method::ZM ? last_.mapped.f : start;
                const double arc = params_.arc_fraction(distance(f, target.center));
                // Plan once to learn the gain-dependent spread, then aim.
                const Movement probe = plan_select(target.center, target.center, arc);
                const double sd = params_.endpoint_noise_sigma * target.width * probe.spread;
                const Vec2 aim = exact ? target.center : target.center + scatter(sd);
                mv = plan_select(aim, target.center, arc);
                const double w_motor = target.width * mv.motor_width;
                outcome.motor_distance = mv.motor_distance;
                outcome.motor_id = fitts_id(mv.motor_distance, w_motor);
                outcome.clutches = mv.clutches;
                mt = sample_mt(outcome.motor_id, mv.clutches);
            } else {
                const double sd = params_.endpoint_noise_sigma * target.width;
                const Vec2 aim = exact ? target.center : target.center + scatter(sd);
                mv = plan_select(aim, target.center, 0.0);
                const double err = distance(selected, target.center);
                mt = sample_mt(std::log2(err / target.width + 1.0), mv.clutches);
                outcome.clutches += mv.clutches;
            }
            first = false;
            missed_ = false;
            play(mv, mt);
            if (missed_) {
                ++misses;
                selected = last_.mapped.f;
            } else if (!acquired_ && exact) {
                throw Error(Errc::state, "agent tap was neither a hit nor a miss");
            }
        }
        if (trial.training)
            ++acquired_training_;
        outcome.misses = misses;
        for (const auto& e : last_.events)
            if (e.kind == TrialEventKind::acquired)
                outcome.movement_time = e.mt_s;
        return outcome;
    }

    Session& session_;
    const AgentParams& params_;
    Rng rng_;
    Rect inner_;
    Vec3 pos_;
    double t_ = 0.0;
    SessionOutput last_;
    std::vector<InputSample> inputs_;
    std::size_t acquired_training_ = 0;
    bool acquired_ = false;
    bool missed_ = false;
    bool red_selected_ = false;
};

} // namespace

MethodRun simulate_method(const SessionSettings& settings, const AgentParams& params,
                          std::uint64_t seed) {
    params.validate();
    Session session(settings);
    Driver driver(session, params, seed);
    MethodRun out;
    driver.run(out);
    return out;
}

SimulatedTrialOutcome simulate_trial(Method method, const Target& target,
                                     const HeightCalibration& cal, const AgentParams& params,
                                     std::uint64_t seed, const DisplayConfig& display) {
    cal.validate();
    const Rect disp = display.display_rect();
    const double r = target.width / 2.0;
    if (!(target.width > 0.0) || !disp.contains(Rect::centered(target.center, 2 * r, 2 * r)))
        throw Error(Errc::config, "target is not reachable on the display");
    SessionSettings s;
    s.method = method;
    s.display = display;
    s.zmap.h_min = cal.h_min;
    s.zmap.h_max = cal.h_max;
    s.trials = {PlannedTrial{target, 1, 1, false}};
    MethodRun run = simulate_method(s, params, seed);
    return run.trials.front();
}

SessionSettings session_settings(const SessionPlan& plan, Method method,
                                 const SimulationSetup& setup) {
    const MethodPlan& mp = plan.for_method(method);
    SessionSettings s;
    s.method = method;
    s.display = setup.display;
    s.zmap = setup.zmap;
    s.st_gain = setup.st_gain;
    s.tap_slop = setup.tap_slop;
    s.subject = plan.subject;
    s.seed = plan.seed;
    if (setup.training)
        s.trials = mp.training;
    s.trials.insert(s.trials.end(), mp.main.begin(), mp.main.end());
    if (setup.trial_limit > 0 && s.trials.size() > static_cast<std::size_t>(setup.trial_limit))
        s.trials.resize(static_cast<std::size_t>(setup.trial_limit));
    return s;
}

std::vector<TrialRecord> simulate_session(const SessionPlan& plan, const AgentParams& params,
                                          std::uint64_t seed, const SimulationSetup& setup) {
    std::vector<TrialRecord> records;
    for (const Method m : plan.method_order) {
        const SessionSettings s = session_settings(plan, m, setup);
        const MethodRun run = simulate_method(
            s, params, derive_seed(seed, static_cast<std::uint64_t>(plan.subject) + 1,
                                   static_cast<std::uint64_t>(m), 3));
        records.insert(records.end(), run.records.begin(), run.records.end());
    }
    return records;
}

} // namespace cdgain
