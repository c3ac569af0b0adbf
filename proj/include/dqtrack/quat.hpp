#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "dqtrack/errors.hpp"

namespace dqtrack {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Tolerance for the unit-norm and orthogonality invariants of pose types.
// Far above double round-off, far below any physical error scale.
inline constexpr double kUnitTol = 1e-9;

/// Quaternion as (vector part, scalar part).  Hamilton product convention.
struct Quaternion {
    Vec3 vec{0.0, 0.0, 0.0};
    double scalar{0.0};

    Quaternion() = default;
    Quaternion(const Vec3& v, double s) : vec(v), scalar(s) {}
    Quaternion(double x, double y, double z, double s) : vec(x, y, z), scalar(s) {}

    static Quaternion identity() { return {Vec3::Zero(), 1.0}; }
    static Quaternion zero() { return {Vec3::Zero(), 0.0}; }
    /// Pure-vector quaternion (v, 0).
    static Quaternion pure(const Vec3& v) { return {v, 0.0}; }

    Vec4 to_vec4() const { return {vec.x(), vec.y(), vec.z(), scalar}; }
    static Quaternion from_vec4(const Vec4& v) { return {Vec3(v[0], v[1], v[2]), v[3]}; }

    double norm2() const { return vec.squaredNorm() + scalar * scalar; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Quaternion operator+(const Quaternion& a, const Quaternion& b) {
    return {a.vec + b.vec, a.scalar + b.scalar};
}
inline Quaternion operator-(const Quaternion& a, const Quaternion& b) {
    return {a.vec - b.vec, a.scalar - b.scalar};
}
inline Quaternion operator-(const Quaternion& a) { return {-a.vec, -a.scalar}; }
inline Quaternion operator*(double s, const Quaternion& a) { return {s * a.vec, s * a.scalar}; }
inline Quaternion operator*(const Quaternion& a, double s) { return s * a; }

/// Hamilton product: ab = (a4*b̄ + b4*ā + ā×b̄, a4*b4 − ā·b̄).
inline Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return {a.scalar * b.vec + b.scalar * a.vec + a.vec.cross(b.vec),
            a.scalar * b.scalar - a.vec.dot(b.vec)};
}

inline Quaternion conj(const Quaternion& a) { return {-a.vec, a.scalar}; }

/// Scalar pairing a·b = a4*b4 + ā·b̄.
inline double dot(const Quaternion& a, const Quaternion& b) {
    return a.scalar * b.scalar + a.vec.dot(b.vec);
}

/// Quaternion cross product (b4*ā + a4*b̄ + ā×b̄, 0).
inline Quaternion cross(const Quaternion& a, const Quaternion& b) {
    return {b.scalar * a.vec + a.scalar * b.vec + a.vec.cross(b.vec), 0.0};
}

inline Quaternion sc(const Quaternion& a) { return {Vec3::Zero(), a.scalar}; }
inline Quaternion vec_part(const Quaternion& a) { return {a.vec, 0.0}; }

/// Blockwise 4x4 action: M ⋆ q = (M11*q̄ + M12*q4, M21*q̄ + M22*q4).
inline Quaternion mat_star(const Mat4& m, const Quaternion& q) {
    Vec4 out = m * q.to_vec4();
    return Quaternion::from_vec4(out);
}

/// Unit quaternion (|norm² − 1| ≤ kUnitTol enforced at construction).
class UnitQuaternion {
  public:
    UnitQuaternion() : q_(Quaternion::identity()) {}

    explicit UnitQuaternion(const Quaternion& q) : q_(q) {
        if (std::abs(q.norm2() - 1.0) > kUnitTol)
            throw ContractViolation("UnitQuaternion: norm deviates from 1 beyond tolerance");
    }

    /// Normalizes the input; fails on near-zero quaternions.
    static UnitQuaternion normalized(const Quaternion& q) {
        double n = q.norm();
        if (n < 1e-9) throw DomainError("UnitQuaternion: cannot normalize near-zero quaternion");
        return UnitQuaternion((1.0 / n) * q);
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle) {
        double n = axis.norm();
        if (n < 1e-12) throw DomainError("from_axis_angle: zero axis");
        return UnitQuaternion({std::sin(0.5 * angle) / n * axis, std::cos(0.5 * angle)});
    }

    const Quaternion& q() const { return q_; }
    operator const Quaternion&() const { return q_; }

    /// Rotates a 3-vector: v_out = q (v,0) q*.
    Vec3 rotate(const Vec3& v) const {
        return (q_ * Quaternion::pure(v) * conj(q_)).vec;
    }
    /// Inverse rotation: v_out = q* (v,0) q.
    Vec3 rotate_back(const Vec3& v) const {
        return (conj(q_) * Quaternion::pure(v) * q_).vec;
    }

  private:
    Quaternion q_;
};

}  // namespace dqtrack
