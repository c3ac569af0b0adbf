#include "dqtrack/controller.hpp"

namespace dqtrack {

namespace {

DualWrench assemble(const DualVector& proportional, const RawErrorState& x, const DualInertia& J,
                    const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                    const Gains& g) {
    DualVector damping = -g.kd * x.w_err.swapped();
    DualVector ff_accel = J.star(sandwich_vec(x.q_err, ref_accel_in_D).swapped());
    DualVector ff_gyro = cross(ref_twist_in_B, J.star(ref_twist_in_B.swapped()));
    DualVector f = proportional + damping + ff_accel + ff_gyro;
    return {f.real_vec(), f.dual_vec()};
}

}  // namespace

DualWrench feedback_wrench(const RawErrorState& x, const DualInertia& J,
                           const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                           const Gains& g) {
    DualQuaternion p = proportional_term(x.q_err);
    double denom = 1.0 + x.pose_norm2();
    DualVector prop = (-g.kp / denom) * DualVector::vec_of(p);
    return assemble(prop, x, J, ref_twist_in_B, ref_accel_in_D, g);
}

DualWrench feedback_wrench(const TrackingError& x, const DualInertia& J,
                           const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                           const Gains& g) {
    return feedback_wrench(RawErrorState(x), J, ref_twist_in_B, ref_accel_in_D, g);
}

DualWrench baseline_wrench(const RawErrorState& x, const DualInertia& J,
                           const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                           const Gains& g) {
    DualQuaternion p = proportional_term(x.q_err);
    DualVector prop = -g.kp * DualVector::vec_of(p);
    return assemble(prop, x, J, ref_twist_in_B, ref_accel_in_D, g);
}

DualWrench baseline_wrench(const TrackingError& x, const DualInertia& J,
                           const DualVector& ref_twist_in_B, const DualVector& ref_accel_in_D,
                           const Gains& g) {
    return baseline_wrench(RawErrorState(x), J, ref_twist_in_B, ref_accel_in_D, g);
}

}  // namespace dqtrack
