#include "cdgain/transfer.hpp"

#include "cdgain/error.hpp"

#include <algorithm>
#include <cmath>

namespace cdgain {

CdRatio cd_ratio(double delta_motor, double delta_display) {
    if (delta_display == 0.0)
        throw Error(Errc::undefined_ratio, "C-D ratio undefined for zero display displacement");
    return {delta_motor / delta_display};
}

Vec2 map_scaled(Vec2 p, double gain) {
    if (!(gain > 0.0) || !std::isfinite(gain))
        throw Error(Errc::invalid_gain, "gain must be positive and finite");
    return p * gain;
}

void ZMappingParams::validate() const {
    if (!std::isfinite(h_min) || !std::isfinite(h_max) || !(h_max > h_min))
        throw Error(Errc::validation, "zmap.h_max must be greater than zmap.h_min");
    if (!std::isfinite(input_span) || !(input_span > 0.0))
        throw Error(Errc::validation, "zmap.s_s must be positive");
    if (!std::isfinite(output_span) || !(output_span >= input_span))
        throw Error(Errc::validation, "zmap.s_l must be at least zmap.s_s");
}

double zmap_gain(double z, const ZMappingParams& params) {
    const double span = params.h_max - params.h_min;
    const double zc = std::clamp(z, params.h_min, params.h_max);
    double g = 1.0;
    switch (params.variant) {
    case GainVariant::endpoint_normalized:
        g = 1.0 + (params.max_gain_ratio() - 1.0) * ((zc - params.h_min) / span);
        break;
    case GainVariant::paper_literal:
        g = 1.0 + zc * span / params.max_gain_ratio();
        break;
    }
    return std::max(g, kMinGain);
}

MapperState zmap_prime(Vec2 f0, Vec3 p0) {
    if (!is_finite(f0) || !is_finite(p0))
        throw Error(Errc::invalid_argument, "mapper must be primed with finite positions");
    return {f0, p0, true};
}

ZMapStep zmap_step(const MapperState& state, Vec3 p_t, const ZMappingParams& params,
                   const std::optional<Rect>& bounds) {
    if (!state.initialized)
        throw Error(Errc::state, "z-mapping state used before the first sample primed it");
    if (!is_finite(p_t))
        throw Error(Errc::invalid_argument, "input sample must be finite");

    const double gain = zmap_gain(p_t.z, params);
    const Vec2 delta = p_t.xy() - state.p_prev.xy();
    Vec2 f = state.f_prev;
    if (delta.x != 0.0 || delta.y != 0.0)
        f = state.f_prev + delta * gain;
    if (bounds)
        f = bounds->clamp(f);
    return {{f, p_t, true}, f, gain};
}

void ZoomBounds::validate() const {
    if (!(s_min > 0.0) || !(s_max >= s_min) || !std::isfinite(s_max))
        throw Error(Errc::validation, "zoom bounds must satisfy 0 < s_min <= s_max");
}

Vec3 env_point_after(const ZScaleState& state, Vec3 p_env) {
    return state.scale * (p_env - state.env_center) + state.env_center + state.env_translation;
}

Vec3 env_point_under(const ZScaleState& state, Vec3 p_display) {
    return (p_display - state.env_center - state.env_translation) / state.scale + state.env_center;
}

ZScaleState zscale_step(const ZScaleState& state, double s_new, Vec3 p_i, const Plane& screen,
                        const ZoomBounds& bounds) {
    if (!(s_new > 0.0) || !std::isfinite(s_new))
        throw Error(Errc::invalid_scale, "scale must be positive and finite");
    if (!bounds.contains(s_new))
        throw Error(Errc::invalid_scale, "scale outside the configured zoom bounds");
    if (!is_finite(p_i))
        throw Error(Errc::invalid_argument, "finger position must be finite");
    if (s_new == state.scale)
        return state;

    const Vec3 foot = perpendicular_foot(p_i, screen);
    const Vec3 focus = env_point_under(state, foot);

    ZScaleState next = state;
    next.scale = s_new;
    const Vec3 foot_scaled = env_point_after(next, focus);
    next.env_translation = state.env_translation - (foot_scaled - foot);
    return next;
}

double zscale_from_height(double z, double h_min, double h_max, const ZoomBounds& bounds) {
    const double t = std::clamp((z - h_min) / (h_max - h_min), 0.0, 1.0);
    return std::clamp(std::lerp(bounds.s_max, bounds.s_min, t), bounds.s_min, bounds.s_max);
}

} // namespace cdgain
