#include "dqtrack/dynamics.hpp"

#include <Eigen/Eigenvalues>

namespace dqtrack {

DualInertia::DualInertia(double mass, const Mat3& inertia) : mass_(mass), inertia_(inertia) {
    if (!(mass > 0.0)) throw DomainError("DualInertia: mass must be positive");
    if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ContractViolation("DualInertia: inertia matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw ContractViolation("DualInertia: inertia matrix not positive definite");
    inertia_inv_ = inertia.inverse();
    // Eigenvalues of the 8x8 J: {m, m, m, 1, eig(Ī), 1}.
    j_max_ = std::max({mass, 1.0, hi});
    j_min_ = std::min({mass, 1.0, lo});
}

Mat8 DualInertia::matrix8() const {
    Mat8 j = Mat8::Zero();
    j.block<3, 3>(0, 0) = mass_ * Mat3::Identity();
    j(3, 3) = 1.0;
    j.block<3, 3>(4, 4) = inertia_;
    j(7, 7) = 1.0;
    return j;
}

double ReferenceTrajectory::twist_sup(double horizon, int samples) const {
    double sup = 0.0;
    for (int i = 0; i <= samples; ++i) {
        double t = horizon * static_cast<double>(i) / static_cast<double>(samples);
        sup = std::max(sup, sample(t).twist.norm());
    }
    return 1.05 * sup;
}

SpinReference::SpinReference(const Vec3& omega_body, const Vec3& position_inertial,
                             const UnitQuaternion& q0)
    : omega_(omega_body), rate_(omega_body.norm()), pos_inertial_(position_inertial), q0_(q0) {
    axis_ = rate_ > 0.0 ? Vec3(omega_body / rate_) : Vec3(1.0, 0.0, 0.0);
}

RefSample SpinReference::sample(double t) const {
    Quaternion step{std::sin(0.5 * rate_ * t) * axis_, std::cos(0.5 * rate_ * t)};
    UnitQuaternion q(q0_.q() * step);
    // Fixed inertial position: r^D rotates with the frame and the
    // ṙ + ω×r terms cancel, so the linear twist slot is zero.
    Vec3 r_body = q.rotate_back(pos_inertial_);
    return {pose_from_parts(q, r_body), DualVector(omega_, Vec3::Zero()), DualVector::zero()};
}

TrackingError error_state(const BodyState& body, const RefSample& ref) {
    DualQuaternion qe = conj(ref.pose.dq()) * body.pose.dq();
    TrackingError x{UnitDualQuaternion(qe), DualVector::zero()};
    x.w_err = body.twist - ref_twist_in_body(x, ref.twist);
    return x;
}

DualVector ref_twist_in_body(const TrackingError& x, const DualVector& ref_twist_desired) {
    return sandwich(x.q_err, ref_twist_desired);
}

ErrorDerivative error_derivative(const RawErrorState& x, const DualWrench& wrench,
                                 const DualInertia& J, const DualVector& ref_twist_in_B,
                                 const DualVector& ref_accel_in_D) {
    const DualVector& w = x.w_err;
    DualQuaternion q_dot = 0.5 * (x.q_err * w.as_dq());

    DualVector accel_b = sandwich_vec(x.q_err, ref_accel_in_D);
    DualVector total = w + ref_twist_in_B;

    DualVector bracket = wrench.as_dual_vector()
        - cross(total, J.star(total.swapped()))
        - J.star(accel_b.swapped())
        - J.star(cross(ref_twist_in_B, w).swapped());

    DualVector w_dot = J.inv_star(bracket).swapped();
    return {q_dot, w_dot};
}

ErrorDerivative error_derivative(const TrackingError& x, const DualWrench& wrench,
                                 const DualInertia& J, const DualVector& ref_twist_in_B,
                                 const DualVector& ref_accel_in_D) {
    return error_derivative(RawErrorState(x), wrench, J, ref_twist_in_B, ref_accel_in_D);
}

ErrorDerivative disturbed_derivative(const TrackingError& x, const DualWrench& wrench,
                                     const DualInertia& J, const DualVector& ref_twist_in_B,
                                     const DualVector& ref_accel_in_D, const Disturbance& dist,
                                     double t) {
    ErrorDerivative d = error_derivative(x, wrench, J, ref_twist_in_B, ref_accel_in_D);
    d.q_dot = d.q_dot + dist.d1(t).as_dq();
    d.w_dot = d.w_dot + J.inv_star(dist.d2(t)).swapped();
    return d;
}

AttitudeState attitude_reduction(const TrackingError& x, double tol) {
    const DualQuaternion& q = x.q_err.dq();
    if (q.dual.vec.norm() > tol || std::abs(q.dual.scalar) > tol ||
        x.w_err.dual_vec().norm() > tol)
        throw ContractViolation("attitude_reduction: dual parts not zero");
    return {UnitQuaternion(q.real), x.w_err.real_vec()};
}

AttitudeDerivative attitude_derivative(const AttitudeState& s, const Vec3& torque,
                                       const Mat3& inertia, const Vec3& ref_w_in_B,
                                       const Vec3& ref_accel_in_D) {
    // N = blkdiag(Ī, 1) acting on (vec, scalar); all operands here are pure
    // vector quaternions, so N reduces to Ī on the vector slot.
    Quaternion q_dot = 0.5 * (s.q.q() * Quaternion::pure(s.w));

    Quaternion accel_b = conj(s.q.q()) * Quaternion::pure(ref_accel_in_D) * s.q.q();
    Vec3 total = s.w + ref_w_in_B;

    Vec3 bracket = torque
        - total.cross(inertia * total)
        - inertia * accel_b.vec
        - inertia * ref_w_in_B.cross(s.w);
    return {q_dot, inertia.inverse() * bracket};
}

}  // namespace dqtrack
