#include "cdgain/session.hpp"

#include "cdgain/error.hpp"

#include <string>

namespace cdgain {

const char* to_string(TouchPhase t) noexcept {
    switch (t) {
    case TouchPhase::none: return "none";
    case TouchPhase::down: return "down";
    case TouchPhase::up: return "up";
    }
    return "?";
}

TouchPhase parse_touch_phase(std::string_view s) {
    if (s == "none") return TouchPhase::none;
    if (s == "down") return TouchPhase::down;
    if (s == "up") return TouchPhase::up;
    throw Error(Errc::protocol, "unknown touch phase '" + std::string(s) + "'");
}

void SessionSettings::validate() const {
    display.validate();
    zmap.validate();
    zoom.validate();
    if (!(st_gain > 0.0) || !std::isfinite(st_gain))
        throw Error(Errc::validation, "st_gain must be positive");
    if (!(tap_slop >= 0.0))
        throw Error(Errc::validation, "tap_slop must be non-negative");
    if (subject < 0)
        throw Error(Errc::validation, "subject must be non-negative");
}

Session::Session(SessionSettings settings) : settings_(std::move(settings)) {
    settings_.validate();
    TaskPlan plan;
    plan.method = settings_.method;
    plan.subject = settings_.subject;
    plan.seed = settings_.seed;
    plan.trials = settings_.trials;
    plan.start_point = settings_.display.start_point;
    plan.red_width = settings_.display.red_width;
    plan.count_inactive_touch_as_miss = settings_.count_inactive_touch_as_miss;
    task_ = start_task(std::move(plan));
    screen_ = Plane{lift(settings_.display.phone.center()), {0.0, 0.0, 1.0}};
    zscale_.env_center = screen_.center;
}

void Session::set_calibration(double h_min, double h_max) {
    if (samples_ > 0)
        throw Error(Errc::state, "calibration must precede input");
    ZMappingParams z = settings_.zmap;
    z.h_min = h_min;
    z.h_max = h_max;
    z.validate();
    settings_.zmap = z;
}

void Session::reset_view(Vec3 p) {
    env_offset_ = {};
    zscale_ = ZScaleState{1.0, screen_.center, {}};
    zmap_ = zmap_prime(p.xy(), p);
    zmap_f_ = p.xy();
}

double Session::view_scale() const {
    return settings_.method == Method::ZS ? zscale_.scale : 1.0;
}

Vec2 Session::view_offset() const {
    if (settings_.method != Method::ZS)
        return env_offset_;
    const double s = zscale_.scale;
    return zscale_.env_center.xy() * (1.0 - s) + zscale_.env_translation.xy();
}

Vec2 Session::env_under(Vec3 p) const {
    switch (settings_.method) {
    case Method::PT: return p.xy();
    case Method::ST: return p.xy() - env_offset_;
    case Method::ZM: return zmap_f_;
    case Method::ZS: return env_point_under(zscale_, perpendicular_foot(p, screen_)).xy();
    }
    return p.xy();
}

SessionOutput Session::feed(const InputSample& in) {
    if (samples_ > 0 && !(in.t > last_t_))
        throw Error(Errc::stream, "sample time " + std::to_string(in.t) +
                                      " does not follow " + std::to_string(last_t_));
    if (!std::isfinite(in.t))
        throw Error(Errc::stream, "sample time must be finite");
    const Vec3 p = settings_.transform ? apply_transform_point(*settings_.transform, in.p) : in.p;
    if (!is_finite(p))
        throw Error(Errc::invalid_argument, "sample position must be finite");
    if (in.touch == TouchPhase::down && touching_)
        throw Error(Errc::protocol, "touch down while already touching");
    if (in.touch == TouchPhase::up && !touching_)
        throw Error(Errc::protocol, "touch up without touch down");

    if (samples_ == 0)
        reset_view(p);

    const Method method = settings_.method;
    const bool was_touching = touching_;
    if (in.touch == TouchPhase::down) {
        touching_ = true;
        touch_display_ = method != Method::PT && settings_.display.phone.contains(p.xy())
                             ? DisplayId::phone
                             : DisplayId::large;
        touch_origin_ = p.xy();
        touch_excursion_ = 0.0;
    }
    if (touching_)
        touch_excursion_ = std::max(touch_excursion_, distance(p.xy(), touch_origin_));

    const bool dragging = was_touching && touch_display_ == DisplayId::phone;
    double gain = 1.0;
    switch (method) {
    case Method::PT:
        break;
    case Method::ST:
        gain = settings_.st_gain;
        if (dragging)
            env_offset_ += map_scaled(p.xy() - last_p_.xy(), settings_.st_gain);
        break;
    case Method::ZM:
        if (was_touching) {
            zmap_.p_prev = p;
        } else {
            const ZMapStep step =
                zmap_step(zmap_, p, settings_.zmap, settings_.display.display_rect());
            zmap_ = step.state;
            zmap_f_ = step.output;
            gain = step.gain;
        }
        env_offset_ = p.xy() - zmap_f_;
        break;
    case Method::ZS:
        if (dragging) {
            const Vec2 d = p.xy() - last_p_.xy();
            zscale_.env_translation += lift(d);
        } else if (!was_touching) {
            const double s = zscale_from_height(p.z, settings_.zmap.h_min, settings_.zmap.h_max,
                                                settings_.zoom);
            zscale_ = zscale_step(zscale_, s, p, screen_, settings_.zoom);
        }
        break;
    }

    TaskEvent ev;
    ev.time = in.t;
    ev.position = env_under(p);
    ev.display = touching_ ? touch_display_ : DisplayId::large;
    switch (in.touch) {
    case TouchPhase::none: ev.kind = TouchKind::sample; break;
    case TouchPhase::down: ev.kind = TouchKind::touch_down; break;
    case TouchPhase::up:
        ev.kind = TouchKind::touch_up;
        ev.selection = method == Method::PT || touch_excursion_ <= settings_.tap_slop;
        touching_ = false;
        break;
    }

    TaskStep step = step_task(task_, ev);
    task_ = std::move(step.state);
    last_p_ = p;
    last_t_ = in.t;
    ++samples_;
    if (step.reset_environment)
        reset_view(p);
    if (step.record)
        records_.push_back(*step.record);

    SessionOutput out;
    out.mapped = {in.t, env_under(p), gain, view_scale(), view_offset()};
    out.events = std::move(step.events);
    out.record = std::move(step.record);
    return out;
}

} // namespace cdgain
