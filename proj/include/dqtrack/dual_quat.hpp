#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "dqtrack/quat.hpp"

namespace dqtrack {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Dual number a + εb, the value of the dual norm ‖·‖²_d.
struct DualNumber {
    double real{0.0};
    double dual{0.0};
};

/// Dual quaternion q_r + ε q_d with ε² = 0.
///
/// The stacked 8-vector layout is (real.vec, real.scalar, dual.vec,
/// dual.scalar), matching the block layout of the dual inertia matrix.
struct DualQuaternion {
    Quaternion real;
    Quaternion dual;

    DualQuaternion() = default;
    DualQuaternion(const Quaternion& r, const Quaternion& d) : real(r), dual(d) {}

    /// The dual quaternion 1 + ε0.
    static DualQuaternion one() { return {Quaternion::identity(), Quaternion::zero()}; }
    static DualQuaternion zero() { return {Quaternion::zero(), Quaternion::zero()}; }

    Vec8 to_vec8() const {
        Vec8 v;
        v << real.vec, real.scalar, dual.vec, dual.scalar;
        return v;
    }
    static DualQuaternion from_vec8(const Vec8& v) {
        return {Quaternion(Vec3(v[0], v[1], v[2]), v[3]),
                Quaternion(Vec3(v[4], v[5], v[6]), v[7])};
    }
};

inline DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b) {
    return {a.real + b.real, a.dual + b.dual};
}
inline DualQuaternion operator-(const DualQuaternion& a, const DualQuaternion& b) {
    return {a.real - b.real, a.dual - b.dual};
}
inline DualQuaternion operator-(const DualQuaternion& a) { return {-a.real, -a.dual}; }
inline DualQuaternion operator*(double s, const DualQuaternion& a) {
    return {s * a.real, s * a.dual};
}
inline DualQuaternion operator*(const DualQuaternion& a, double s) { return s * a; }

/// âb̂ = (a_r b_r) + ε(a_r b_d + a_d b_r).
inline DualQuaternion operator*(const DualQuaternion& a, const DualQuaternion& b) {
    return {a.real * b.real, a.real * b.dual + a.dual * b.real};
}

inline DualQuaternion conj(const DualQuaternion& a) { return {conj(a.real), conj(a.dual)}; }

/// Swap âˢ = a_d + ε a_r.
inline DualQuaternion swap(const DualQuaternion& a) { return {a.dual, a.real}; }

/// Circle product â∘b̂ = a_r·b_r + a_d·b_d (a real scalar).
inline double circle(const DualQuaternion& a, const DualQuaternion& b) {
    return dot(a.real, b.real) + dot(a.dual, b.dual);
}

/// ‖â‖² = â∘â.
inline double norm2(const DualQuaternion& a) { return circle(a, a); }
inline double norm(const DualQuaternion& a) { return std::sqrt(norm2(a)); }

/// Dual norm ‖â‖²_d = ââ* = (a_r·a_r) + ε(2 a_r·a_d).
inline DualNumber dual_norm2(const DualQuaternion& a) {
    return {dot(a.real, a.real), 2.0 * dot(a.real, a.dual)};
}

/// Dot product â·b̂ = a_r·b_r + ε(a_d·b_r + a_r·b_d), an element of 𝔻ˢ.
inline DualQuaternion dq_dot(const DualQuaternion& a, const DualQuaternion& b) {
    return {Quaternion(Vec3::Zero(), dot(a.real, b.real)),
            Quaternion(Vec3::Zero(), dot(a.dual, b.real) + dot(a.real, b.dual))};
}

inline DualQuaternion sc(const DualQuaternion& a) { return {sc(a.real), sc(a.dual)}; }
inline DualQuaternion vec_part(const DualQuaternion& a) {
    return {vec_part(a.real), vec_part(a.dual)};
}

/// Blockwise 8x8 action in the (real.vec, real.scalar, dual.vec, dual.scalar)
/// layout.  Satisfies (M ⋆ â) ∘ b̂ = â ∘ (Mᵀ ⋆ b̂).
inline DualQuaternion mat_star(const Mat8& m, const DualQuaternion& q) {
    return DualQuaternion::from_vec8(m * q.to_vec8());
}

/// Element of 𝔻ᵛ_d: both scalar slots are identically zero by construction.
/// Twists, wrenches and disturbances live here; keeping the type distinct
/// prevents scalar leakage into the cross-product identities.
class DualVector {
  public:
    DualVector() = default;
    DualVector(const Vec3& real_vec, const Vec3& dual_vec) : rv_(real_vec), dv_(dual_vec) {}

    static DualVector zero() { return {}; }

    /// Checked conversion; throws if either scalar slot exceeds `tol`.
    static DualVector from_dq(const DualQuaternion& q, double tol = kUnitTol) {
        if (std::abs(q.real.scalar) > tol || std::abs(q.dual.scalar) > tol)
            throw ContractViolation("DualVector: scalar slots not zero");
        return {q.real.vec, q.dual.vec};
    }
    /// Drops the scalar slots unconditionally (the vec(·) projection).
    static DualVector vec_of(const DualQuaternion& q) { return {q.real.vec, q.dual.vec}; }

    const Vec3& real_vec() const { return rv_; }
    const Vec3& dual_vec() const { return dv_; }

    DualQuaternion as_dq() const {
        return {Quaternion::pure(rv_), Quaternion::pure(dv_)};
    }
    DualVector swapped() const { return {dv_, rv_}; }

    double norm2() const { return rv_.squaredNorm() + dv_.squaredNorm(); }
    double norm() const { return std::sqrt(norm2()); }

  private:
    Vec3 rv_{Vec3::Zero()};
    Vec3 dv_{Vec3::Zero()};
};

inline DualVector operator+(const DualVector& a, const DualVector& b) {
    return {a.real_vec() + b.real_vec(), a.dual_vec() + b.dual_vec()};
}
inline DualVector operator-(const DualVector& a, const DualVector& b) {
    return {a.real_vec() - b.real_vec(), a.dual_vec() - b.dual_vec()};
}
inline DualVector operator-(const DualVector& a) { return {-a.real_vec(), -a.dual_vec()}; }
inline DualVector operator*(double s, const DualVector& a) {
    return {s * a.real_vec(), s * a.dual_vec()};
}

/// â×b̂ = a_r×b_r + ε(a_d×b_r + a_r×b_d).  Only defined on 𝔻ᵛ_d, where the
/// antisymmetry â×b̂ = −b̂×â holds.
inline DualVector cross(const DualVector& a, const DualVector& b) {
    return {a.real_vec().cross(b.real_vec()),
            a.dual_vec().cross(b.real_vec()) + a.real_vec().cross(b.dual_vec())};
}

inline double circle(const DualVector& a, const DualVector& b) {
    return a.real_vec().dot(b.real_vec()) + a.dual_vec().dot(b.dual_vec());
}
inline double circle(const DualVector& a, const DualQuaternion& b) {
    return a.real_vec().dot(b.real.vec) + a.dual_vec().dot(b.dual.vec);
}
inline double circle(const DualQuaternion& a, const DualVector& b) { return circle(b, a); }

/// Unit dual quaternion: ‖real‖ = 1 and real ⟂ dual, i.e. q̂ q̂* = 1.
class UnitDualQuaternion {
  public:
    UnitDualQuaternion() : q_(DualQuaternion::one()) {}

    explicit UnitDualQuaternion(const DualQuaternion& q) : q_(q) {
        if (std::abs(dot(q.real, q.real) - 1.0) > kUnitTol)
            throw ContractViolation("UnitDualQuaternion: real part not unit");
        if (std::abs(dot(q.real, q.dual)) > kUnitTol)
            throw ContractViolation("UnitDualQuaternion: real/dual parts not orthogonal");
    }

    static UnitDualQuaternion identity() { return UnitDualQuaternion(); }

    const DualQuaternion& dq() const { return q_; }
    operator const DualQuaternion&() const { return q_; }

  private:
    DualQuaternion q_;
};

/// Pose q̂ = q + ε ½ q r from a rotation and a body-frame translation.
inline UnitDualQuaternion pose_from_parts(const UnitQuaternion& q, const Vec3& r_body) {
    Quaternion qr = q.q();
    return UnitDualQuaternion({qr, 0.5 * (qr * Quaternion::pure(r_body))});
}

/// Inverse of pose_from_parts: recovers (q, r) with r = vec(2 q* q_dual).
inline std::pair<UnitQuaternion, Vec3> pose_to_parts(const UnitDualQuaternion& pose) {
    const DualQuaternion& q = pose.dq();
    Quaternion t = 2.0 * (conj(q.real) * q.dual);
    return {UnitQuaternion(q.real), t.vec};
}

/// Repairs integrator drift: scales the real part to unit norm and projects
/// the dual part onto the orthogonal complement of the real part.
inline UnitDualQuaternion renormalize(const DualQuaternion& a) {
    double n = a.real.norm();
    if (n < 1e-9) throw DomainError("renormalize: degenerate pose (real part near zero)");
    Quaternion r = (1.0 / n) * a.real;
    Quaternion d = a.dual - dot(r, a.dual) * r;
    return UnitDualQuaternion({r, d});
}

/// Largest violation of the unit invariants, used as a drift diagnostic.
inline double unit_violation(const DualQuaternion& a) {
    return std::max(std::abs(dot(a.real, a.real) - 1.0), std::abs(dot(a.real, a.dual)));
}

/// Frame transport of a twist: q̂* v̂ q̂ (screw transport including the
/// moment-arm shift of the dual part).  The scalar slots of the product
/// vanish identically for unit q̂; residue beyond `tol` is a contract error.
inline DualVector sandwich(const UnitDualQuaternion& q, const DualVector& v,
                           double tol = kUnitTol) {
    DualQuaternion out = conj(q.dq()) * v.as_dq() * q.dq();
    return DualVector::from_dq(out, tol);
}

/// Unchecked transport for integrator stage states, which sit slightly off
/// the unit manifold; the O(drift) scalar residue is dropped.
inline DualVector sandwich_vec(const DualQuaternion& q, const DualVector& v) {
    return DualVector::vec_of(conj(q) * v.as_dq() * q);
}

}  // namespace dqtrack
