#include "cdgain/geometry.hpp"

#include "cdgain/error.hpp"

#include <string>

namespace cdgain {

Vec2 normalized(Vec2 v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n))
        throw Error(Errc::invalid_argument, "cannot normalise a zero or non-finite vector");
    return v / n;
}

Vec3 normalized(Vec3 v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n))
        throw Error(Errc::invalid_argument, "cannot normalise a zero or non-finite vector");
    return v / n;
}

UnitQuaternion UnitQuaternion::from_components(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!(n > 0.0) || !std::isfinite(n))
        throw Error(Errc::invalid_argument, "quaternion must be finite and non-zero");
    return raw(w / n, x / n, y / n, z / n);
}

UnitQuaternion UnitQuaternion::from_axis_angle(Vec3 axis, double radians) {
    const Vec3 a = normalized(axis);
    const double s = std::sin(radians / 2.0);
    return from_components(std::cos(radians / 2.0), a.x * s, a.y * s, a.z * s);
}

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
    return UnitQuaternion::from_components(
        a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
        a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
        a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
        a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
}

Vec3 UnitQuaternion::rotate(Vec3 v) const {
    // v' = v + 2w (u x v) + 2 u x (u x v), with u the vector part.
    const Vec3 u{x_, y_, z_};
    const Vec3 t = 2.0 * cross(u, v);
    return v + w_ * t + cross(u, t);
}

Vec3 perpendicular_foot(Vec3 p, const Plane& plane) {
    if (std::abs(norm(plane.normal) - 1.0) > kUnitTolerance)
        throw Error(Errc::invalid_plane, "plane normal must have unit length");
    const Vec3& n = plane.normal;
    return p - dot(p - plane.center, n) * n;
}

namespace {

bool is_identity(const UnitQuaternion& q) {
    return q.x() == 0.0 && q.y() == 0.0 && q.z() == 0.0;
}

} // namespace

// With an identity rotation the printed formula reduces to x; short-cut it so
// the reduction is exact instead of (x - x_T) + x_T.
Vec3 apply_transform_point(const RigidTransform& t, Vec3 x) {
    if (t.variant == TransformVariant::literal && is_identity(t.rotation))
        return x;
    const Vec3 rotated = t.rotation.rotate_inverse(x - t.translation);
    if (t.variant == TransformVariant::literal)
        return rotated + t.translation;
    return rotated;
}

UnitQuaternion apply_transform_rotation(const RigidTransform& t, const UnitQuaternion& q) {
    return t.rotation.inverse() * q;
}

Vec3 invert_transform_point(const RigidTransform& t, Vec3 x_scene) {
    if (t.variant == TransformVariant::literal && is_identity(t.rotation))
        return x_scene;
    if (t.variant == TransformVariant::literal)
        return t.rotation.rotate(x_scene - t.translation) + t.translation;
    return t.rotation.rotate(x_scene) + t.translation;
}

AcquiredTransform acquire_transform(const CalibratorPose& pose, TransformVariant variant) {
    if (!is_finite(pose.position))
        throw Error(Errc::invalid_argument, "calibrator position must be finite");
    AcquiredTransform out;
    out.input_norm = std::sqrt(pose.qw * pose.qw + pose.qx * pose.qx + pose.qy * pose.qy +
                               pose.qz * pose.qz);
    out.renormalized = std::abs(out.input_norm - 1.0) > kQuaternionWarnTolerance;
    out.transform.rotation = UnitQuaternion::from_components(pose.qw, pose.qx, pose.qy, pose.qz);
    out.transform.translation = pose.position;
    out.transform.variant = variant;
    return out;
}

} // namespace cdgain
