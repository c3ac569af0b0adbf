#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dqtrack/safety.hpp"
#include "dqtrack/stability.hpp"

namespace dqtrack {

/// Integrator state: the tracking error in raw coordinates.
struct SimState {
    DualQuaternion q;
    DualVector w;

    bool finite() const {
        return q.to_vec8().allFinite() && w.real_vec().allFinite() && w.dual_vec().allFinite();
    }
};

/// Classical RK4 over the stacked (q̂, ω̂) state.  The derivative callback
/// receives stage states that sit slightly off the unit manifold;
/// renormalization is the caller's job (done once per accepted step).
template <typename F>
SimState integrate_step(const SimState& s, F&& deriv, double t, double dt,
                        std::size_t step_index = 0) {
    if (!(dt > 0.0)) throw DomainError("integrate_step: dt must be positive");

    auto advance = [](const SimState& st, const ErrorDerivative& k, double h) {
        return SimState{st.q + h * k.q_dot, st.w + h * k.w_dot};
    };

    ErrorDerivative k1 = deriv(t, s);
    ErrorDerivative k2 = deriv(t + 0.5 * dt, advance(s, k1, 0.5 * dt));
    ErrorDerivative k3 = deriv(t + 0.5 * dt, advance(s, k2, 0.5 * dt));
    ErrorDerivative k4 = deriv(t + dt, advance(s, k3, dt));

    SimState out{
        s.q + (dt / 6.0) * (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot + k4.q_dot),
        s.w + (dt / 6.0) * (k1.w_dot + 2.0 * k2.w_dot + 2.0 * k3.w_dot + k4.w_dot)};
    if (!out.finite()) throw SimulationDiverged(step_index, "non-finite state after RK4 step");
    return out;
}

/// Fuel bookkeeping: m(t) = m0 + ∫ c1 ‖f̂‖ dt.
struct FuelModel {
    double c1{1.3e-3};   // kg/(N·s)
    double m0{0.0};      // kg
};

/// n tracking errors drawn inside the mixed-norm ball B_R, deterministic in
/// the seed.  The radius is spread as for a uniform draw in the 12-d ball
/// and split randomly across the rotation/translation/twist channels.
std::vector<TrackingError> sample_ball(double R, int n, std::uint64_t seed);

struct TrajectoryRow {
    double t;
    DualQuaternion q_err;
    DualVector w_err;
    double norm_x;
    double v0;
    double v;
    Vec3 force;
    Vec3 torque;
    double h_min;     // NaN when no barrier is active
    double fuel_kg;
};

struct TrajectoryRecord {
    std::vector<TrajectoryRow> rows;
    double max_unit_drift{0.0};    // pre-renormalization constraint violation
    double h_min_overall{std::numeric_limits<double>::infinity()};
    double kkt_max{0.0};
    int infeasible_steps{0};
    int filter_active_steps{0};    // stage evaluations where the QP modified the force
    double terminal_axial{0.0};    // |x-position| in the desired frame at t_final
    double final_pose_error{0.0};  // ‖q̂−1‖ at t_final
};

std::vector<double> fuel_consumed(const TrajectoryRecord& rec, const FuelModel& model);

/// Fully resolved scenario parameters (presets + overrides applied).
struct ScenarioParams {
    std::string name;
    double mass{1.0};
    Mat3 inertia{Mat3::Identity()};
    double kp{1.0};
    double kd{1.0};
    double R{1.0};                  // sampling ball radius (ignored with fixed x0)
    int n{1};
    double dt{1e-2};
    double t_final{10.0};
    std::uint64_t seed{42};
    int renormalize_every{1};
    int record_every{1};
    bool use_baseline{false};

    double dist_box{0.0};           // per-component disturbance amplitude
    double settle_fraction{0.2};
    EnvelopeOverrides envelope_overrides;   // experimental c / beta pins

    bool has_fixed_x0{false};
    std::vector<TrackingError> fixed_x0;

    std::vector<BarrierSpec> barriers;
    std::optional<CbfPoles> poles;
    std::optional<Box> input_box;

    FuelModel fuel;
    std::vector<double> fuel_milestones;

    double terminal_axial_limit{0.0};   // apollo_docking acceptance threshold
    double pose_error_limit{0.0};       // apollo_transposition threshold

    // Which verdicts this scenario reports.
    bool verdict_envelope{false};
    bool verdict_iss{false};
    bool verdict_safety{false};
};

struct TrajectoryVerdict {
    int index{0};
    bool pass{true};
    std::string detail;
    double envelope_margin{std::numeric_limits<double>::infinity()};
    double iss_margin{std::numeric_limits<double>::infinity()};
    double h_min{std::numeric_limits<double>::infinity()};
    double kkt_max{0.0};
    double terminal_axial{0.0};
    double final_pose_error{0.0};
};

struct ScenarioResult {
    ScenarioParams params;
    StabilityEnvelope envelope;
    std::optional<IssBound> iss;
    std::vector<TrajectoryRecord> records;
    std::vector<TrajectoryVerdict> verdicts;
    std::vector<double> fuel_milestone_times;   // milestones inside the horizon
    std::vector<double> fuel_at_milestones;
    double max_unit_drift{0.0};
    bool all_pass{true};
};

/// Known scenario names, in the order they are documented.
const std::vector<std::string>& scenario_names();

/// Builds the preset for `name` and applies key=value overrides.
/// Unknown names or keys raise ConfigError.
ScenarioParams resolve_scenario(const std::string& name,
                                const std::map<std::string, std::string>& overrides = {});

/// Runs every trajectory of the scenario and attaches verdicts.
ScenarioResult run_scenario(const ScenarioParams& params);

/// Single-trajectory core, exposed for tests and probes.
TrajectoryRecord run_trajectory(const ScenarioParams& params, const DualInertia& J,
                                const Gains& g, const ReferenceTrajectory& ref,
                                const TrackingError& x0, const StabilityEnvelope& env,
                                std::uint64_t disturbance_seed);

}  // namespace dqtrack
