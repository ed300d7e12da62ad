#pragma once

#include <cmath>

namespace cdgain {

// Distances are meters unless stated otherwise.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    constexpr Vec2& operator+=(Vec2 b) { x += b.x; y += b.y; return *this; }
    constexpr Vec2& operator-=(Vec2 b) { x -= b.x; y -= b.y; return *this; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec2 xy() const { return {x, y}; }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return {a.x * s, a.y * s, a.z * s}; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    constexpr Vec3& operator+=(Vec3 b) { x += b.x; y += b.y; z += b.z; return *this; }
    constexpr Vec3& operator-=(Vec3 b) { x -= b.x; y -= b.y; z -= b.z; return *this; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr Vec3 lift(Vec2 v, double z = 0.0) { return {v.x, v.y, z}; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }
inline bool is_finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }
inline bool is_finite(Vec3 a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// Axis-aligned rectangle, min <= max componentwise.
struct Rect {
    Vec2 min;
    Vec2 max;

    static Rect centered(Vec2 center, double width, double height) {
        return {{center.x - width / 2.0, center.y - height / 2.0},
                {center.x + width / 2.0, center.y + height / 2.0}};
    }
    Vec2 center() const { return (min + max) / 2.0; }
    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    bool contains(Vec2 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    bool contains(const Rect& r) const { return contains(r.min) && contains(r.max); }
    Vec2 clamp(Vec2 p) const {
        return {std::fmin(std::fmax(p.x, min.x), max.x), std::fmin(std::fmax(p.y, min.y), max.y)};
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

// Throws invalid_argument for a zero or non-finite vector.
Vec2 normalized(Vec2 v);
Vec3 normalized(Vec3 v);

// Rotation quaternion, Hamilton convention (i*j = k), right-handed axes.
//
// rotate(v) is the active rotation q * v * q^-1. The tracker formulas apply
// the inverse, Q^-1 * v, which is rotate_inverse(v) = q^-1 * v * q: the
// passive form that re-expresses v in the frame whose orientation is q.
class UnitQuaternion {
public:
    constexpr UnitQuaternion() = default;

    // Normalises; throws invalid_argument for a zero or non-finite input.
    static UnitQuaternion from_components(double w, double x, double y, double z);
    // Rotation of `radians` about `axis` (any non-zero length).
    static UnitQuaternion from_axis_angle(Vec3 axis, double radians);

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }
    double norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

    UnitQuaternion inverse() const { return raw(w_, -x_, -y_, -z_); }

    // Hamilton product, renormalised so the unit invariant survives long
    // chains of products.
    friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b);

    Vec3 rotate(Vec3 v) const;
    Vec3 rotate_inverse(Vec3 v) const { return inverse().rotate(v); }

    friend bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

private:
    static constexpr UnitQuaternion raw(double w, double x, double y, double z) {
        UnitQuaternion q;
        q.w_ = w;
        q.x_ = x;
        q.y_ = y;
        q.z_ = z;
        return q;
    }

    double w_ = 1.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

// A plane through `center` with unit `normal`. perpendicular_foot rejects a
// normal whose length is off by more than 1e-9.
struct Plane {
    Vec3 center;
    Vec3 normal{0.0, 0.0, 1.0};

    // Convenience constructor that normalises `normal`.
    static Plane through(Vec3 center, Vec3 normal) { return {center, normalized(normal)}; }
};

inline constexpr double kUnitTolerance = 1e-9;

// Orthogonal projection of p onto the plane (the foot of the perpendicular).
Vec3 perpendicular_foot(Vec3 p, const Plane& plane);

enum class TransformVariant {
    // x' = Q^-1 (x - x_T) + x_T, exactly as the calibration procedure states it.
    literal,
    // x' = Q^-1 (x - x_T), the usual change of frame.
    frame_change,
};

// Tracker-to-scene transform built from the calibrator rigid body's pose.
struct RigidTransform {
    UnitQuaternion rotation;
    Vec3 translation;
    TransformVariant variant = TransformVariant::literal;
};

Vec3 apply_transform_point(const RigidTransform& t, Vec3 x);
UnitQuaternion apply_transform_rotation(const RigidTransform& t, const UnitQuaternion& q);
Vec3 invert_transform_point(const RigidTransform& t, Vec3 x_scene);

struct CalibratorPose {
    double qw = 1.0, qx = 0.0, qy = 0.0, qz = 0.0;
    Vec3 position;
};

struct AcquiredTransform {
    RigidTransform transform;
    // Set when the pose quaternion's norm was off by more than 1e-6 and had
    // to be renormalised.
    bool renormalized = false;
    double input_norm = 1.0;
};

inline constexpr double kQuaternionWarnTolerance = 1e-6;

AcquiredTransform acquire_transform(const CalibratorPose& pose,
                                    TransformVariant variant = TransformVariant::literal);

} // namespace cdgain
