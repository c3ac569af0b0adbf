#include "dqtrack/sim.hpp"

#include <algorithm>

#include "dqtrack/rng.hpp"

namespace dqtrack {

std::vector<TrackingError> sample_ball(double R, int n, std::uint64_t seed) {
    if (!(R > 0.0)) throw DomainError("sample_ball: R must be positive");
    if (n < 0) throw DomainError("sample_ball: n must be nonnegative");

    Rng rng(seed);
    std::vector<TrackingError> out;
    out.reserve(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        // Radius as for a uniform draw in a 12-d ball, kept strictly inside.
        double radius = R * std::pow(rng.uniform(), 1.0 / 12.0) * (1.0 - 1e-9);
        double r2 = radius * radius;

        // Split the norm budget: pose vs twist, then rotation vs translation.
        double pose2 = rng.uniform() * r2;
        double twist2 = r2 - pose2;

        // Rotation contributes 2(1 − cos(angle/2)) ≤ 4 to ‖q̂−1‖².
        double rot2 = rng.uniform() * pose2;
        if (rot2 > 3.999) rot2 = 3.999;
        double trans2 = pose2 - rot2;

        double cos_half = 1.0 - 0.5 * rot2;
        double angle = 2.0 * std::acos(std::clamp(cos_half, -1.0, 1.0));
        UnitQuaternion q_rot = angle > 1e-12
                                   ? UnitQuaternion::from_axis_angle(rng.unit_vector3(), angle)
                                   : UnitQuaternion();

        Vec3 t_body = 2.0 * std::sqrt(trans2) * rng.unit_vector3();

        // Twist direction uniform on S⁵.
        Eigen::Matrix<double, 6, 1> dir;
        for (int k = 0; k < 6; ++k) dir[k] = rng.normal();
        double dn = dir.norm();
        if (dn < 1e-12) dir << 1, 0, 0, 0, 0, 0; else dir /= dn;
        dir *= std::sqrt(twist2);

        TrackingError x{pose_from_parts(q_rot, t_body),
                        DualVector(dir.head<3>(), dir.tail<3>())};
        out.push_back(x);
    }
    return out;
}

std::vector<double> fuel_consumed(const TrajectoryRecord& rec, const FuelModel& model) {
    std::vector<double> out;
    out.reserve(rec.rows.size());
    double mass = model.m0;
    for (std::size_t i = 0; i < rec.rows.size(); ++i) {
        if (i > 0) {
            double dt = rec.rows[i].t - rec.rows[i - 1].t;
            double f0 = std::sqrt(rec.rows[i - 1].force.squaredNorm() +
                                  rec.rows[i - 1].torque.squaredNorm());
            double f1 = std::sqrt(rec.rows[i].force.squaredNorm() +
                                  rec.rows[i].torque.squaredNorm());
            mass += model.c1 * 0.5 * (f0 + f1) * dt;
        }
        out.push_back(mass);
    }
    return out;
}

namespace {

// Box-corner maximizer of g·u, the fallback when the QP reports infeasible.
Vec3 clamp_to_best(const Vec3& g_row, const Box& box) {
    Vec3 u;
    for (int i = 0; i < 3; ++i) u[i] = g_row[i] > 0.0 ? box.hi[i] : box.lo[i];
    return u;
}

}  // namespace

TrajectoryRecord run_trajectory(const ScenarioParams& P, const DualInertia& J, const Gains& g,
                                const ReferenceTrajectory& ref, const TrackingError& x0,
                                const StabilityEnvelope& env, std::uint64_t disturbance_seed) {
    TrajectoryRecord rec;
    SimState s{x0.q_err.dq(), x0.w_err};
    Rng dist_rng(disturbance_seed);

    const auto steps = static_cast<std::size_t>(std::llround(P.t_final / P.dt));
    const bool disturbed = P.dist_box > 0.0;
    const bool safety = !P.barriers.empty();

    DualVector d1 = DualVector::zero();
    DualVector d2 = DualVector::zero();

    // Closed-loop vector field at a stage state.  The disturbance is frozen
    // over the step, so the per-step field stays smooth for RK4.
    auto rhs = [&](double t, const SimState& st) -> ErrorDerivative {
        RawErrorState rx{st.q, st.w};
        RefSample rs = ref.sample(t);
        DualVector ref_twist_b = sandwich_vec(st.q, rs.twist);
        DualWrench u = P.use_baseline ? baseline_wrench(rx, J, ref_twist_b, rs.accel, g)
                                      : feedback_wrench(rx, J, ref_twist_b, rs.accel, g);
        if (safety) {
            SafetyReport rep;
            try {
                u = safe_wrench(rx, u, P.barriers, *P.poles, J, P.input_box, &rep);
                rec.kkt_max = std::max(rec.kkt_max, rep.kkt_residual);
                if (rep.modified) ++rec.filter_active_steps;
            } catch (const QpInfeasible&) {
                ++rec.infeasible_steps;
                if (P.input_box) {
                    CbfRow row = cbf_constraint(P.barriers.front(), *P.poles,
                                                (2.0 * (st.q.dual * conj(st.q.real))).vec,
                                                Vec3::Zero(), J);
                    u.force = clamp_to_best(row.g_row, *P.input_box);
                }
                rep.h_min = std::numeric_limits<double>::quiet_NaN();
            }
            rec.h_min_overall = std::min(rec.h_min_overall, rep.h_min);
        }
        ErrorDerivative d = error_derivative(rx, u, J, ref_twist_b, rs.accel);
        if (disturbed) {
            d.q_dot = d.q_dot + d1.as_dq();
            d.w_dot = d.w_dot + J.inv_star(d2).swapped();
        }
        return d;
    };

    double fuel = P.fuel.m0;
    double prev_wrench_norm = 0.0;

    for (std::size_t step = 0; step <= steps; ++step) {
        double t = static_cast<double>(step) * P.dt;

        // Row data from the current (renormalized) state via the checked API.
        TrackingError x{UnitDualQuaternion(s.q), s.w};
        RefSample rs = ref.sample(t);
        DualVector ref_twist_b = ref_twist_in_body(x, rs.twist);
        DualWrench u = P.use_baseline ? baseline_wrench(x, J, ref_twist_b, rs.accel, g)
                                      : feedback_wrench(x, J, ref_twist_b, rs.accel, g);
        double h_min = std::numeric_limits<double>::quiet_NaN();
        if (safety) {
            SafetyReport rep;
            try {
                u = safe_wrench(x, u, P.barriers, *P.poles, J, P.input_box, &rep);
                h_min = rep.h_min;
            } catch (const QpInfeasible&) {
                ++rec.infeasible_steps;
                if (P.input_box) {
                    CbfRow row = cbf_constraint(P.barriers.front(), *P.poles,
                                                x.translation_desired_frame(), Vec3::Zero(), J);
                    u.force = clamp_to_best(row.g_row, *P.input_box);
                }
            }
        }

        double wn = u.norm();
        if (step > 0) fuel += P.fuel.c1 * 0.5 * (prev_wrench_norm + wn) * P.dt;
        prev_wrench_norm = wn;

        if (step % static_cast<std::size_t>(P.record_every) == 0 || step == steps) {
            TrajectoryRow row;
            row.t = t;
            row.q_err = s.q;
            row.w_err = s.w;
            row.norm_x = x.norm();
            row.v0 = lyapunov_v0(x, J, g);
            row.v = lyapunov_v(x, J, g, env.c);
            row.force = u.force;
            row.torque = u.torque;
            row.h_min = h_min;
            row.fuel_kg = fuel;
            rec.rows.push_back(row);
        }

        if (step == steps) {
            rec.terminal_axial = std::abs(x.translation_desired_frame().x());
            rec.final_pose_error = std::sqrt(x.pose_norm2());
            break;
        }

        if (disturbed) {
            Vec3 a{dist_rng.uniform(-P.dist_box, P.dist_box),
                   dist_rng.uniform(-P.dist_box, P.dist_box),
                   dist_rng.uniform(-P.dist_box, P.dist_box)};
            Vec3 b{dist_rng.uniform(-P.dist_box, P.dist_box),
                   dist_rng.uniform(-P.dist_box, P.dist_box),
                   dist_rng.uniform(-P.dist_box, P.dist_box)};
            Vec3 c{dist_rng.uniform(-P.dist_box, P.dist_box),
                   dist_rng.uniform(-P.dist_box, P.dist_box),
                   dist_rng.uniform(-P.dist_box, P.dist_box)};
            Vec3 e{dist_rng.uniform(-P.dist_box, P.dist_box),
                   dist_rng.uniform(-P.dist_box, P.dist_box),
                   dist_rng.uniform(-P.dist_box, P.dist_box)};
            d1 = DualVector(a, b);
            d2 = DualVector(c, e);
        }

        s = integrate_step(s, rhs, t, P.dt, step);
        rec.max_unit_drift = std::max(rec.max_unit_drift, unit_violation(s.q));
        if ((step + 1) % static_cast<std::size_t>(P.renormalize_every) == 0)
            s.q = renormalize(s.q).dq();
    }
    return rec;
}

}  // namespace dqtrack
