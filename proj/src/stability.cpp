#include "dqtrack/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dqtrack {

double lyapunov_v0(const RawErrorState& x, const DualInertia& J, const Gains& g) {
    DualVector ws = x.w_err.swapped();
    return g.kp * std::log1p(x.pose_norm2()) + 0.5 * circle(ws, J.star(ws));
}

double lyapunov_v0(const TrackingError& x, const DualInertia& J, const Gains& g) {
    return lyapunov_v0(RawErrorState(x), J, g);
}

double lyapunov_v(const RawErrorState& x, const DualInertia& J, const Gains& g, double c) {
    DualQuaternion p = proportional_term(x.q_err);
    double n_cross = circle(p, J.star(x.w_err.swapped()).as_dq());
    return c * std::expm1(lyapunov_v0(x, J, g) / g.kp) + n_cross;
}

double lyapunov_v(const TrackingError& x, const DualInertia& J, const Gains& g, double c) {
    return lyapunov_v(RawErrorState(x), J, g, c);
}

double lemma_gap(const UnitDualQuaternion& q_err) {
    double lhs = norm2(proportional_term(q_err));
    double rhs = norm2(q_err.dq() - DualQuaternion::one());
    return lhs - 0.5 * rhs;
}

StabilityEnvelope make_envelope(double R, const DualInertia& J, const Gains& g, double delta,
                                const EnvelopeOverrides& overrides) {
    if (!(R > 0.0)) throw DomainError("make_envelope: R must be positive");
    if (delta < 0.0) throw DomainError("make_envelope: delta must be nonnegative");

    const double jM = J.j_max();
    const double jm = J.j_min();
    const double onePlusR = 1.0 + R;

    double k0 = 2.25 * jM * onePlusR +
                std::pow(1.5 * g.kd + 4.5 * jM * delta * onePlusR, 2) *
                    std::pow(onePlusR, 3) / g.kp;

    double c_lo = std::max({4.0 * g.kp * k0 / g.kd, 0.75 * jM * onePlusR * onePlusR,
                            jM * g.kp / jm});
    double c = overrides.c.value_or(1.0001 * c_lo);

    double beta_hi = std::min({c / (2.0 * g.kp),
                               g.kp / (2.0 * onePlusR * g.kd *
                                       (1.5 * onePlusR * onePlusR + c / jM)),
                               1.0});
    double beta = overrides.beta.value_or(0.999 * beta_hi);

    double k1 = std::min(c - 0.75 * jM * onePlusR * onePlusR,
                         c * jm / (2.0 * g.kp) - 0.5 * jM);
    if (!(k1 > 0.0)) throw DomainError("make_envelope: k1 not positive (c too small)");
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("make_envelope: beta outside (0,1)");

    double alpha = beta * g.kd / (2.0 * jM);

    // m(R) involves e^{J_M R²/(2kp)}, which overflows double for extreme R;
    // keep the log form alongside the direct value.
    double expo = jM * R * R / (2.0 * g.kp);
    double tail = std::sqrt(1.5) * onePlusR * 0.5 * jM * R * R;
    double inner = (1.0 + R * R) * std::exp(expo) - 1.0 + tail;
    double m_env, log_m;
    if (std::isfinite(inner)) {
        m_env = std::sqrt(inner) / (R * std::sqrt(k1));
        log_m = std::log(m_env);
    } else {
        log_m = 0.5 * (expo + std::log1p(R * R)) - std::log(R * std::sqrt(k1));
        m_env = std::numeric_limits<double>::infinity();
    }

    return {R, delta, k0, c, beta, alpha, k1, m_env, log_m};
}

EnvelopeVerdict check_envelope(std::span<const NormSample> traj, const StabilityEnvelope& env) {
    if (traj.empty()) throw DomainError("check_envelope: empty trajectory");
    double n0 = traj.front().norm;
    if (n0 > env.R) throw ContractViolation("check_envelope: initial state outside B_R");
    double t0 = traj.front().t;

    EnvelopeVerdict v{true, std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double bound = std::isfinite(env.m_env)
                           ? env.m_env * std::exp(-env.alpha * (traj[i].t - t0)) * n0
                           : std::exp(env.log_m_env - env.alpha * (traj[i].t - t0)) * n0;
        double margin = bound - traj[i].norm;
        if (margin < v.margin) v.margin = margin;
        if (traj[i].norm > bound && v.pass) {
            v.pass = false;
            v.first_violation = i;
        }
    }
    return v;
}

IssBound make_iss_bound(const StabilityEnvelope& env, const Gains& g, double d_m) {
    if (d_m < 0.0) throw DomainError("make_iss_bound: d_m must be nonnegative");
    double onePlusR = 1.0 + env.R;
    double pose_term = 4.0 * onePlusR * onePlusR * std::sqrt(3.0) / (std::sqrt(2.0) * g.kp);
    double rate_term = 2.0 * (1.0 + g.kp) / ((1.0 - env.beta) * g.kd);
    double psi = std::hypot(pose_term, rate_term);
    return {psi, d_m, psi * d_m};
}

IssVerdict check_iss(std::span<const NormSample> traj, const IssBound& bound,
                     double settle_fraction) {
    if (traj.empty()) throw DomainError("check_iss: empty trajectory");
    if (!(settle_fraction > 0.0 && settle_fraction <= 1.0))
        throw DomainError("check_iss: settle_fraction must be in (0,1]");
    double t_begin = traj.front().t;
    double t_end = traj.back().t;
    double window_start = t_end - settle_fraction * (t_end - t_begin);

    IssVerdict v{true, std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj[i].t < window_start) continue;
        double margin = bound.ball_radius - traj[i].norm;
        if (margin < v.margin) v.margin = margin;
        if (margin < 0.0 && v.pass) {
            v.pass = false;
            v.first_violation = i;
        }
    }
    return v;
}

}  // namespace dqtrack
