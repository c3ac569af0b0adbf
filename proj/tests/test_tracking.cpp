#include <doctest.h>

#include "dqtrack/io.hpp"
#include "dqtrack/sim.hpp"
#include "qp_oracle.hpp"
#include "support.hpp"

using namespace dqtest;

namespace {

Mat3 marco_inertia() {
    Mat3 i;
    i << 0.0465, -0.0007, 0.0004,
        -0.0007, 0.0486, -0.0021,
         0.0004, -0.0021, 0.0482;
    return i;
}

// Spin-up about a fixed axis at a fixed inertial position: angle
// θ(t) = w0 t + a t²/2, twist (w0 + a t) n̂, acceleration a n̂.  The linear
// twist slot is zero for this motion (same cancellation as the constant
// spin), so the closed forms stay exact.
class RampSpinReference final : public ReferenceTrajectory {
  public:
    RampSpinReference(const Vec3& axis, double w0, double ramp, const Vec3& pos)
        : axis_(axis.normalized()), w0_(w0), ramp_(ramp), pos_(pos) {}

    RefSample sample(double t) const override {
        double angle = w0_ * t + 0.5 * ramp_ * t * t;
        UnitQuaternion q = UnitQuaternion::from_axis_angle(axis_, angle);
        Vec3 r_body = q.rotate_back(pos_);
        return {pose_from_parts(q, r_body),
                DualVector((w0_ + ramp_ * t) * axis_, Vec3::Zero()),
                DualVector(ramp_ * axis_, Vec3::Zero())};
    }

  private:
    Vec3 axis_;
    double w0_;
    double ramp_;
    Vec3 pos_;
};

ErrorDerivative closed_loop(const DualInertia& J, const Gains& g,
                            const ReferenceTrajectory& ref, double t, const SimState& st) {
    RawErrorState rx{st.q, st.w};
    RefSample rs = ref.sample(t);
    DualVector ref_twist_b = sandwich_vec(st.q, rs.twist);
    DualWrench u = feedback_wrench(rx, J, ref_twist_b, rs.accel, g);
    return error_derivative(rx, u, J, ref_twist_b, rs.accel);
}

}  // namespace

TEST_CASE("tracking a constant spin: errors converge and V0 decays") {
    DualInertia J(13.5, marco_inertia());
    Gains g(2.0, 4.0);
    SpinReference ref(Vec3(0.06, 0.03, 0.29), Vec3(1.5, -0.5, 0.0));

    ScenarioParams p = resolve_scenario("marco_track");
    p.kp = g.kp;
    p.kd = g.kd;
    p.dt = 5e-3;
    p.t_final = 260.0;
    p.record_every = 50;

    TrackingError x0{pose_from_parts(UnitQuaternion::from_axis_angle(Vec3(0, 1, 0), 0.9),
                                     Vec3(0.8, -0.4, 0.3)),
                     DualVector(Vec3(0.1, -0.05, 0.2), Vec3(-0.1, 0.2, 0.0))};
    StabilityEnvelope env = make_envelope(1.05 * x0.norm(), J, g, ref.twist_sup(p.t_final));

    TrajectoryRecord rec = run_trajectory(p, J, g, ref, x0, env, 1);

    CHECK(rec.final_pose_error < 2e-4);
    CHECK(rec.rows.back().norm_x < 4e-4);
    for (std::size_t i = 1; i < rec.rows.size(); ++i)
        CHECK(rec.rows[i].v0 <= rec.rows[i - 1].v0 + 1e-10);

    // the tracked body pose must follow the reference: recompose and compare
    RefSample end = ref.sample(p.t_final);
    DualQuaternion body = end.pose.dq() * rec.rows.back().q_err;
    CHECK((body.to_vec8() - end.pose.dq().to_vec8()).cwiseAbs().maxCoeff() < 4e-4);
}

TEST_CASE("ramping spin: equilibrium stays stationary and errors shrink") {
    // An ever-accelerating reference makes the twist supremum grow without
    // bound, so full convergence is not expected on a fixed horizon; perfect
    // tracking must still be an exact equilibrium, and errors must shrink.
    DualInertia J(13.5, marco_inertia());
    Gains g(2.0, 4.0);
    RampSpinReference ref(Vec3(0.2, 0.1, 1.0), 0.2, 0.02, Vec3(1.5, -0.5, 0.0));

    for (double t : {0.0, 10.0, 45.0}) {
        RefSample rs = ref.sample(t);
        TrackingError eq{UnitDualQuaternion::identity(), DualVector::zero()};
        DualVector rb = ref_twist_in_body(eq, rs.twist);
        DualWrench u = feedback_wrench(eq, J, rb, rs.accel, g);
        ErrorDerivative d = error_derivative(eq, u, J, rb, rs.accel);
        CHECK(d.q_dot.to_vec8().cwiseAbs().maxCoeff() < 1e-15);
        CHECK(d.w_dot.norm() < 1e-15);
        CHECK(u.force.norm() < 1e-15);   // only the gyroscopic torque feeds forward
        CHECK(u.torque.norm() > 0.0);
    }

    ScenarioParams p = resolve_scenario("marco_track");
    p.kp = g.kp;
    p.kd = g.kd;
    p.dt = 5e-3;
    p.t_final = 60.0;
    p.record_every = 100;
    TrackingError x0{pose_from_parts(UnitQuaternion::from_axis_angle(Vec3(0, 1, 0), 0.9),
                                     Vec3(0.8, -0.4, 0.3)),
                     DualVector(Vec3(0.1, -0.05, 0.2), Vec3(-0.1, 0.2, 0.0))};
    StabilityEnvelope env = make_envelope(1.05 * x0.norm(), J, g, ref.twist_sup(p.t_final));
    TrajectoryRecord rec = run_trajectory(p, J, g, ref, x0, env, 1);
    CHECK(rec.rows.back().norm_x < 0.5 * rec.rows.front().norm_x);
    for (std::size_t i = 1; i < rec.rows.size(); ++i)
        CHECK(rec.rows[i].v0 <= rec.rows[i - 1].v0 + 1e-10);
}

TEST_CASE("dissipation identity holds with nonzero reference acceleration") {
    // the feedforward terms must cancel exactly even while the reference
    // rate is ramping; central differences around closed-loop states
    DualInertia J(13.5, marco_inertia());
    Gains g(0.5, 0.8);
    RampSpinReference ref(Vec3(0, 0, 1), 0.3, 0.05, Vec3(2.0, 0.0, 0.0));

    auto rhs = [&](double t, const SimState& st) { return closed_loop(J, g, ref, t, st); };

    auto x0s = sample_ball(1.5, 5, 2026);
    const double h = 1e-5;
    for (const auto& x0 : x0s) {
        SimState s{x0.q_err.dq(), x0.w_err};
        double t = 0.0;
        for (int probe = 0; probe < 20; ++probe) {
            for (int k = 0; k < 40; ++k, t += 0.01) s = integrate_step(s, rhs, t, 0.01);
            s.q = renormalize(s.q).dq();

            SimState fwd = integrate_step(s, rhs, t, h);
            auto neg = [&](double tt, const SimState& st) {
                // integrate the time-reversed field to step backwards
                ErrorDerivative d = rhs(2.0 * t - tt, st);
                return ErrorDerivative{-d.q_dot, -d.w_dot};
            };
            SimState bwd = integrate_step(s, neg, t, h);

            double rate = (lyapunov_v0(RawErrorState{fwd.q, fwd.w}, J, g) -
                           lyapunov_v0(RawErrorState{bwd.q, bwd.w}, J, g)) /
                          (2.0 * h);
            double expect = -g.kd * s.w.norm2();
            CHECK(std::abs(rate - expect) < 1e-6);
        }
    }
}

TEST_CASE("closed-loop RK4 keeps 4th-order accuracy through the controller") {
    DualInertia J(13.5, marco_inertia());
    Gains g(0.2, 0.3);
    RestReference ref;
    auto rhs = [&](double t, const SimState& st) { return closed_loop(J, g, ref, t, st); };

    TrackingError x0{pose_from_parts(UnitQuaternion::from_axis_angle(Vec3(1, 2, 0), 1.2),
                                     Vec3(0.5, 0.5, -0.5)),
                     DualVector(Vec3(0.8, -0.6, 0.4), Vec3(0.3, 0.0, -0.2))};

    auto end_state = [&](double dt) {
        SimState s{x0.q_err.dq(), x0.w_err};
        int n = static_cast<int>(std::llround(2.0 / dt));
        for (int i = 0; i < n; ++i) s = integrate_step(s, rhs, i * dt, dt);
        return s;
    };

    SimState fine = end_state(1e-4);
    auto err = [&](const SimState& s) {
        return std::max((s.q.to_vec8() - fine.q.to_vec8()).cwiseAbs().maxCoeff(),
                        (s.w - fine.w).as_dq().to_vec8().cwiseAbs().maxCoeff());
    };
    double e_coarse = err(end_state(2e-2));
    double e_half = err(end_state(1e-2));
    CHECK(e_coarse / e_half >= 14.0);
}

TEST_CASE("QP solver survives adversarial geometry") {
    SUBCASE("duplicated rows") {
        QpProblem p;
        p.u0 = Vec3(1.0, -2.0, 0.5);
        p.rows = {{Vec3(0, 1, 0), -1.0}, {Vec3(0, 1, 0), -1.0}};
        p.box = Box::symmetric(3.0);
        QpSolution sol = solve_filter_qp(p);
        CHECK(sol.u.y() == doctest::Approx(-1.0));
        CHECK(sol.kkt_residual <= 1e-8);
    }
    SUBCASE("row parallel to a box face") {
        QpProblem p;
        p.u0 = Vec3(2.5, 0.0, 0.0);
        p.rows = {{Vec3(-1, 0, 0), -1.0}};   // −x ≥ −1 means x ≤ 1
        p.box = Box::symmetric(2.0);
        QpSolution sol = solve_filter_qp(p);
        CHECK(sol.u.x() == doctest::Approx(1.0));
        CHECK(sol.kkt_residual <= 1e-8);
    }
    SUBCASE("nominal exactly on a face stays untouched") {
        QpProblem p;
        p.u0 = Vec3(2.0, 0.0, 0.0);
        p.rows = {{Vec3(1, 0, 0), 2.0}};
        p.box = Box::symmetric(2.0);
        QpSolution sol = solve_filter_qp(p);
        CHECK_FALSE(sol.modified);
        CHECK(sol.u.x() == 2.0);
    }
    SUBCASE("feasible only at a single corner") {
        QpProblem p;
        p.u0 = Vec3::Zero();
        p.rows = {{Vec3(1, 1, 1), 3.0}};
        p.box = Box::symmetric(1.0);
        QpSolution sol = solve_filter_qp(p);
        CHECK((sol.u - Vec3(1, 1, 1)).norm() < 1e-8);
        CHECK(sol.kkt_residual <= 1e-8);
    }
    SUBCASE("nearly parallel rows agree with the oracle") {
        Rng rng(31337);
        for (int it = 0; it < 200; ++it) {
            QpProblem p;
            p.u0 = Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
            Vec3 g1(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            if (g1.norm() < 0.2) g1 = Vec3(0, 0, 1);
            Vec3 g2 = g1 + 1e-8 * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                       rng.uniform(-1, 1));
            p.rows = {{g1, rng.uniform(-1, 1)}, {g2, rng.uniform(-1, 1)}};
            p.box = Box::symmetric(2.5);

            Vec3 expect;
            if (!qp_oracle(p, expect)) {
                CHECK_THROWS_AS(solve_filter_qp(p), QpInfeasible);
                continue;
            }
            QpSolution sol = solve_filter_qp(p);
            CHECK(std::abs((sol.u - p.u0).squaredNorm() - (expect - p.u0).squaredNorm()) <
                  1e-6);
            CHECK(sol.kkt_residual <= 1e-8);
        }
    }
}
