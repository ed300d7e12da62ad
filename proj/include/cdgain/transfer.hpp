#pragma once

#include "cdgain/geometry.hpp"

#include <optional>

namespace cdgain {

// Motor displacement divided by display displacement. Its reciprocal is the
// gain applied to input deltas.
struct CdRatio {
    double value = 1.0;
};

CdRatio cd_ratio(double delta_motor, double delta_display);

// Method 1: the touch lands where the finger is.
constexpr Vec2 map_direct(Vec2 p) { return p; }

// Method 2: display = gain * motor. gain = 1/N reproduces the 1:N reading
// f(p) = p * H(N) with H(N) = 1/N.
Vec2 map_scaled(Vec2 p, double gain);

enum class GainVariant {
    // G(z) = 1 + (s_l/s_s - 1) * clamp((z - h_min) / (h_max - h_min), 0, 1).
    // G(h_min) = 1 and a full s_s stroke at h_max covers s_l.
    endpoint_normalized,
    // H(z) = 1 + z * N / M with N = h_max - h_min, M = s_l / s_s, z clamped to
    // [h_min, h_max]. Dimensionally odd (z in meters), kept for comparison.
    paper_literal,
};

struct ZMappingParams {
    double h_min = 0.0;
    double h_max = 0.10;
    double input_span = 0.10;  // s_s
    double output_span = 0.50; // s_l
    GainVariant variant = GainVariant::endpoint_normalized;

    // Throws validation errors naming the offending field.
    void validate() const;
    double max_gain_ratio() const { return output_span / input_span; }
};

inline constexpr double kMinGain = 1e-3;

double zmap_gain(double z, const ZMappingParams& params);

// Per-session Z-Mapping state. f is in display coordinates.
struct MapperState {
    Vec2 f_prev;
    Vec3 p_prev;
    bool initialized = false;
};

// Stores the first sample. Δp is undefined before it, so nothing moves.
MapperState zmap_prime(Vec2 f0, Vec3 p0);

struct ZMapStep {
    MapperState state;
    Vec2 output;
    double gain = 1.0;
};

// f_t = f_{t-1} + Δp_xy * G(p_t.z), then clamped to `bounds` when given.
// Throws a state error for an unprimed state. A step with Δp_xy = 0 returns
// f_{t-1} bit for bit (before clamping, which is idempotent on an in-bounds
// value).
ZMapStep zmap_step(const MapperState& state, Vec3 p_t, const ZMappingParams& params,
                   const std::optional<Rect>& bounds = std::nullopt);

struct ZoomBounds {
    double s_min = 0.05;
    double s_max = 1.0;

    void validate() const;
    bool contains(double s) const { return s >= s_min && s <= s_max; }
};

// Environment placement for Z-Scaling. An environment point q is drawn at
// s * (q - env_center) + env_center + env_translation. env_center is the
// pivot in environment coordinates; env_translation accumulates the center
// moves that keep the focus point fixed.
struct ZScaleState {
    double scale = 1.0;
    Vec3 env_center;
    Vec3 env_translation;
};

Vec3 env_point_after(const ZScaleState& state, Vec3 p_env);
// Inverse of env_point_after: which environment point is drawn at p_display.
Vec3 env_point_under(const ZScaleState& state, Vec3 p_display);

// Rescales to s_new while keeping the environment point under the foot of the
// perpendicular from p_i onto `screen` in place. Works for zoom in and out.
ZScaleState zscale_step(const ZScaleState& state, double s_new, Vec3 p_i, const Plane& screen,
                        const ZoomBounds& bounds = {});

// Height to zoom level: s_max at h_min, falling linearly to s_min at h_max.
double zscale_from_height(double z, double h_min, double h_max, const ZoomBounds& bounds);

} // namespace cdgain
