#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dqtrack/controller.hpp"

namespace dqtrack {

/// Closed-form constants of the semi-global exponential envelope
///   ‖x(t)‖ ≤ m_env · e^{−alpha·t} · ‖x(0)‖  for ‖x(0)‖ ≤ R.
struct StabilityEnvelope {
    double R;
    double delta;    // sup‖ω̂^B_D/I‖ over the horizon
    double k0;
    double c;
    double beta;     // in (0,1)
    double alpha;    // 1/s
    double k1;       // V ≥ k1‖x‖²
    double m_env;    // may overflow to +inf for extreme R; see log_m_env
    double log_m_env;
};

/// ISS ultimate bound: trajectories end inside a ball of radius psi·d_m.
///
/// Outside that ball the disturbed analysis certifies the decay rate
/// beta·kd/(2 J_M), half the nominal rate beta·kd/J_M; only the ultimate
/// ball enters the numerical verdicts here.
struct IssBound {
    double psi;
    double d_m;
    double ball_radius;
};

struct EnvelopeOverrides {
    std::optional<double> c;
    std::optional<double> beta;
};

/// One sampled point of a trajectory's state norm.
struct NormSample {
    double t;
    double norm;
};

struct EnvelopeVerdict {
    bool pass;
    double margin;                 // min over samples of (bound − value)
    std::size_t first_violation;   // index of first violating sample (when !pass)
};

struct IssVerdict {
    bool pass;
    double margin;                 // min over window of (ball_radius − value)
    std::size_t first_violation;
};

/// V₀ = kp ln(1 + (q̂−1)∘(q̂−1)) + ½ (ω̂ˢ)∘(J⋆ω̂ˢ).
double lyapunov_v0(const RawErrorState& x, const DualInertia& J, const Gains& g);
double lyapunov_v0(const TrackingError& x, const DualInertia& J, const Gains& g);

/// V = c[exp(V₀/kp) − 1] + q̂*(q̂ˢ−1ˢ) ∘ (J⋆ω̂ˢ); the cross term pairs the
/// proportional direction with the swapped momentum.
double lyapunov_v(const RawErrorState& x, const DualInertia& J, const Gains& g, double c);
double lyapunov_v(const TrackingError& x, const DualInertia& J, const Gains& g, double c);

/// ‖q̂*(q̂ˢ−1ˢ)‖² − ‖q̂−1‖²/2, nonnegative for every unit dual quaternion.
double lemma_gap(const UnitDualQuaternion& q_err);

/// Evaluates every envelope constant.  c and beta sit at their bound
/// extremes with small safety margins (×1.0001 / ×0.999) unless overridden.
StabilityEnvelope make_envelope(double R, const DualInertia& J, const Gains& g, double delta,
                                const EnvelopeOverrides& overrides = {});

/// Checks ‖x(tᵢ)‖ ≤ m_env·e^{−alpha·tᵢ}·‖x(0)‖ at every sample.
/// Precondition: ‖x(0)‖ ≤ R.  The ‖x(0)‖ = 0 edge passes (bound 0 ≥ value 0).
EnvelopeVerdict check_envelope(std::span<const NormSample> traj, const StabilityEnvelope& env);

/// psi = sqrt((4(1+R)²√3/(√2 kp))² + (2(1+kp)/((1−beta)kd))²).
IssBound make_iss_bound(const StabilityEnvelope& env, const Gains& g, double d_m);

/// Passes iff ‖x(t)‖ ≤ psi·d_m over the trailing `settle_fraction` of the
/// time span.
IssVerdict check_iss(std::span<const NormSample> traj, const IssBound& bound,
                     double settle_fraction = 0.2);

}  // namespace dqtrack
