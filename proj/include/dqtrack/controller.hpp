#pragma once

#include "dqtrack/dynamics.hpp"

namespace dqtrack {

/// Feedback gains; strict positivity is the only condition the stability
/// results impose.
struct Gains {
    double kp;
    double kd;

    Gains(double kp_, double kd_) : kp(kp_), kd(kd_) {
        if (!(kp > 0.0) || !(kd > 0.0)) throw DomainError("Gains: kp and kd must be positive");
    }
};

/// The proportional direction q̂*(q̂ˢ − 1ˢ), shared between the control law
/// and the Lyapunov machinery.
inline DualQuaternion proportional_term(const DualQuaternion& q_err) {
    return conj(q_err) * (swap(q_err) - swap(DualQuaternion::one()));
}
inline DualQuaternion proportional_term(const UnitDualQuaternion& q_err) {
    return proportional_term(q_err.dq());
}

/// Exponentially stabilizing tracking law:
///   f̂ = −kp q̂*(q̂ˢ−1ˢ)/(1+‖q̂−1‖²) − kd ω̂ˢ + J⋆(q̂* ω̂̇_D/I q̂)ˢ + ω̂_D/I×(J⋆ω̂_D/Iˢ).
/// The scalar slots of the proportional term are dropped: the dual force an
/// actuator can apply is (f,0)+ε(τ,0) by definition, and the circle products
/// of the stability analysis never see those slots.
DualWrench feedback_wrench(const RawErrorState& x, const DualInertia& J,
                           const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                           const Gains& g);
DualWrench feedback_wrench(const TrackingError& x, const DualInertia& J,
                           const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                           const Gains& g);

/// Prior asymptotically-stabilizing law: identical except the proportional
/// term is −kp vec(q̂*(q̂ˢ−1ˢ)) without the normalizing denominator.
DualWrench baseline_wrench(const RawErrorState& x, const DualInertia& J,
                           const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                           const Gains& g);
DualWrench baseline_wrench(const TrackingError& x, const DualInertia& J,
                           const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                           const Gains& g);

}  // namespace dqtrack
