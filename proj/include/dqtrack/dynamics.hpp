#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "dqtrack/dual_quat.hpp"

namespace dqtrack {

/// Dual inertia matrix J = blkdiag(m I3, 1, Ī, 1) acting on swapped twists.
class DualInertia {
  public:
    DualInertia(double mass, const Mat3& inertia);

    double mass() const { return mass_; }
    const Mat3& inertia() const { return inertia_; }
    const Mat3& inertia_inv() const { return inertia_inv_; }

    /// Max / min eigenvalues of the full 8x8 J (the unit scalar-slot entries
    /// participate).
    double j_max() const { return j_max_; }
    double j_min() const { return j_min_; }

    /// J ⋆ v for v in 𝔻ᵛ_d; the block structure keeps the result in 𝔻ᵛ_d.
    DualVector star(const DualVector& v) const {
        return {mass_ * v.real_vec(), inertia_ * v.dual_vec()};
    }
    /// J⁻¹ ⋆ v.
    DualVector inv_star(const DualVector& v) const {
        return {v.real_vec() / mass_, inertia_inv_ * v.dual_vec()};
    }

    Mat8 matrix8() const;

  private:
    double mass_;
    Mat3 inertia_;
    Mat3 inertia_inv_;
    double j_max_;
    double j_min_;
};

/// Absolute pose + twist of a body: q̂_B/I and ω̂^B_B/I = ω + εv.
struct BodyState {
    UnitDualQuaternion pose;
    DualVector twist;
};

/// Reference signals at one time instant, all in the D frame.
struct RefSample {
    UnitDualQuaternion pose;   // q̂_D/I
    DualVector twist;          // ω̂^D_D/I
    DualVector accel;          // ω̂̇^D_D/I
};

/// Analytic reference trajectory (closed-form pose/twist/accel, so no
/// differentiation noise enters the δ bound).
class ReferenceTrajectory {
  public:
    virtual ~ReferenceTrajectory() = default;
    virtual RefSample sample(double t) const = 0;

    /// sup‖ω̂^D_D/I‖ over [0, horizon] by dense sampling with 5% inflation.
    double twist_sup(double horizon, int samples = 1000) const;
};

/// Fixed pose, zero twist (the regulation references of the experiments).
class RestReference final : public ReferenceTrajectory {
  public:
    explicit RestReference(const UnitDualQuaternion& pose = UnitDualQuaternion::identity())
        : pose_(pose) {}
    RefSample sample(double) const override { return {pose_, DualVector::zero(), DualVector::zero()}; }

  private:
    UnitDualQuaternion pose_;
};

/// Constant body-frame spin about a fixed axis at a fixed inertial position.
/// The linear-velocity slot of the twist is zero for this motion.
class SpinReference final : public ReferenceTrajectory {
  public:
    SpinReference(const Vec3& omega_body, const Vec3& position_inertial,
                  const UnitQuaternion& q0 = UnitQuaternion());
    RefSample sample(double t) const override;

  private:
    Vec3 omega_;
    double rate_;
    Vec3 axis_;
    Vec3 pos_inertial_;
    UnitQuaternion q0_;
};

/// Tracking error x = (q̂_B/D, ω̂^B_B/D); ‖x‖² = ‖q̂−1‖² + ‖ω̂‖² is the state
/// norm of the ball B_R.
struct TrackingError {
    UnitDualQuaternion q_err;
    DualVector w_err;

    double pose_norm2() const { return dqtrack::norm2(q_err.dq() - DualQuaternion::one()); }
    double norm2() const { return pose_norm2() + w_err.norm2(); }
    double norm() const { return std::sqrt(norm2()); }

    /// Body translation relative to D, expressed in B.
    Vec3 translation_body() const { return pose_to_parts(q_err).second; }
    /// Same translation expressed in the D frame: vec(2 q_d q_r*).
    Vec3 translation_desired_frame() const {
        const DualQuaternion& q = q_err.dq();
        return (2.0 * (q.dual * conj(q.real))).vec;
    }
};

/// Dual input force f̂ = (f,0) + ε(τ,0); scalar slots are zero by type.
struct DualWrench {
    Vec3 force{Vec3::Zero()};
    Vec3 torque{Vec3::Zero()};

    static DualWrench zero() { return {}; }
    DualVector as_dual_vector() const { return {force, torque}; }
    double norm() const { return std::sqrt(force.squaredNorm() + torque.squaredNorm()); }
};

/// Additive bounded disturbance channels of the robustness analysis:
/// d1 enters the pose kinematics, d2 the velocity dynamics.  d_m bounds
/// sup_t max(‖d1‖, ‖d2‖).
struct Disturbance {
    std::function<DualVector(double)> d1;
    std::function<DualVector(double)> d2;
    double d_m{0.0};

    static Disturbance none() {
        return {[](double) { return DualVector::zero(); },
                [](double) { return DualVector::zero(); }, 0.0};
    }
};

struct ErrorDerivative {
    DualQuaternion q_dot;   // d/dt q̂_B/D
    DualVector w_dot;       // d/dt ω̂^B_B/D (swap already undone)
};

/// Tracking error without the unit-invariant checks.  Runge–Kutta stage
/// states drift off the unit manifold by O(dt²), so the closed-loop vector
/// field is evaluated through this relaxed view; the public checked
/// entry points wrap it.
struct RawErrorState {
    DualQuaternion q_err;
    DualVector w_err;

    RawErrorState() = default;
    RawErrorState(const DualQuaternion& q, const DualVector& w) : q_err(q), w_err(w) {}
    explicit RawErrorState(const TrackingError& x) : q_err(x.q_err.dq()), w_err(x.w_err) {}

    double pose_norm2() const { return dqtrack::norm2(q_err - DualQuaternion::one()); }
    double norm2() const { return pose_norm2() + w_err.norm2(); }
};

/// x = (q̂*_D/I q̂_B/I, ω̂^B_B/I − ω̂^B_D/I) with the desired twist transported
/// into the body frame.
TrackingError error_state(const BodyState& body, const RefSample& ref);

/// Desired twist in the body frame: ω̂^B_D/I = q̂*_B/D ω̂^D_D/I q̂_B/D.
DualVector ref_twist_in_body(const TrackingError& x, const DualVector& ref_twist_desired);

/// Rigid-body tracking-error dynamics.  The velocity equation is evaluated
/// in swapped coordinates and un-swapped before returning, so the result
/// feeds the integrator directly.
ErrorDerivative error_derivative(const RawErrorState& x, const DualWrench& wrench,
                                 const DualInertia& J, const DualVector& ref_twist_in_B,
                                 const DualVector& ref_accel_in_D);
ErrorDerivative error_derivative(const TrackingError& x, const DualWrench& wrench,
                                 const DualInertia& J, const DualVector& ref_twist_in_B,
                                 const DualVector& ref_accel_in_D);

/// Same dynamics with d1 added to the pose derivative and d2 inside the
/// J⁻¹⋆(...) bracket.
ErrorDerivative disturbed_derivative(const TrackingError& x, const DualWrench& wrench,
                                     const DualInertia& J, const DualVector& ref_twist_in_B,
                                     const DualVector& ref_accel_in_D, const Disturbance& dist,
                                     double t);

/// Attitude-only state of the reduced dynamics.
struct AttitudeState {
    UnitQuaternion q;
    Vec3 w;
};

struct AttitudeDerivative {
    Quaternion q_dot;
    Vec3 w_dot;
};

/// Extracts the attitude-only state; throws if the dual parts are nonzero.
AttitudeState attitude_reduction(const TrackingError& x, double tol = 1e-12);

/// Reduced attitude error dynamics with N = blkdiag(Ī, 1).
AttitudeDerivative attitude_derivative(const AttitudeState& s, const Vec3& torque,
                                       const Mat3& inertia, const Vec3& ref_w_in_B,
                                       const Vec3& ref_accel_in_D);

}  // namespace dqtrack
