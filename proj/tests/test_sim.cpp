#include <doctest.h>

#include "dqtrack/io.hpp"
#include "dqtrack/sim.hpp"
#include "support.hpp"

using namespace dqtest;

TEST_CASE("integrator: zero derivative leaves the state unchanged") {
    Rng rng(601);
    SimState s{random_unit_dq(rng).dq(), random_dual_vector(rng)};
    auto zero = [](double, const SimState&) {
        return ErrorDerivative{DualQuaternion::zero(), DualVector::zero()};
    };
    SimState out = integrate_step(s, zero, 0.0, 0.1);
    CHECK((out.q.to_vec8() - s.q.to_vec8()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.w - s.w).norm() == 0.0);

    CHECK_THROWS_AS(integrate_step(s, zero, 0.0, 0.0), DomainError);
}

TEST_CASE("integrator: constant single-axis spin matches the closed form") {
    const double rate = 1.7;
    auto kinematics = [&](double, const SimState& st) {
        return ErrorDerivative{0.5 * (st.q * DualVector(Vec3(rate, 0, 0), Vec3::Zero()).as_dq()),
                               DualVector::zero()};
    };

    SimState s{DualQuaternion::one(), DualVector(Vec3(rate, 0, 0), Vec3::Zero())};
    const double dt = 1e-3;
    double t = 0.0;
    for (int i = 0; i < 1000; ++i, t += dt) s = integrate_step(s, kinematics, t, dt);

    Quaternion expect{Vec3(std::sin(0.5 * rate * 1.0), 0, 0), std::cos(0.5 * rate * 1.0)};
    CHECK((s.q.real.to_vec4() - expect.to_vec4()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("integrator: step halving shows at least 4th-order convergence") {
    const double rate = 2.0;
    auto kinematics = [&](double, const SimState& st) {
        return ErrorDerivative{0.5 * (st.q * DualVector(Vec3(0, rate, 0), Vec3::Zero()).as_dq()),
                               DualVector::zero()};
    };
    Quaternion exact{Vec3(0, std::sin(0.5 * rate), 0), std::cos(0.5 * rate)};

    auto end_error = [&](double dt) {
        SimState s{DualQuaternion::one(), DualVector::zero()};
        int n = static_cast<int>(std::llround(1.0 / dt));
        for (int i = 0; i < n; ++i) s = integrate_step(s, kinematics, i * dt, dt);
        return (s.q.real.to_vec4() - exact.to_vec4()).cwiseAbs().maxCoeff();
    };

    double coarse = end_error(1e-2);
    double fine = end_error(5e-3);
    CHECK(coarse / fine >= 14.0);
}

TEST_CASE("integrator: non-finite derivatives raise a diverged error") {
    SimState s{DualQuaternion::one(), DualVector::zero()};
    auto bad = [](double, const SimState&) {
        return ErrorDerivative{DualQuaternion::zero(),
                               DualVector(Vec3(std::numeric_limits<double>::quiet_NaN(), 0, 0),
                                          Vec3::Zero())};
    };
    CHECK_THROWS_AS(integrate_step(s, bad, 0.0, 0.1, 17), SimulationDiverged);
    try {
        integrate_step(s, bad, 0.0, 0.1, 17);
    } catch (const SimulationDiverged& e) {
        CHECK(e.step_index == 17);
    }
}

TEST_CASE("sample_ball: containment, determinism, coverage") {
    CHECK_THROWS_AS(sample_ball(0.0, 5, 1), DomainError);

    auto one = sample_ball(2.5, 1, 99);
    REQUIRE(one.size() == 1);
    CHECK(one[0].norm() <= 2.5);

    auto a = sample_ball(2.5, 64, 1234);
    auto b = sample_ball(2.5, 64, 1234);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((a[i].q_err.dq().to_vec8() - b[i].q_err.dq().to_vec8()).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK((a[i].w_err - b[i].w_err).norm() == 0.0);
    }

    auto big = sample_ball(2.5, 10000, 4321);
    double max_norm = 0.0;
    for (const auto& x : big) {
        CHECK(x.norm() <= 2.5);
        max_norm = std::max(max_norm, x.norm());
    }
    CHECK(max_norm > 0.95 * 2.5);
}

TEST_CASE("fuel accounting: zero, constant thrust, monotone") {
    FuelModel model;   // c1 = 1.3e-3, m0 = 0

    TrajectoryRecord rec;
    for (int i = 0; i <= 10; ++i) {
        TrajectoryRow row{};
        row.t = 0.5 * i;
        row.force = Vec3::Zero();
        row.torque = Vec3::Zero();
        rec.rows.push_back(row);
    }
    auto zero = fuel_consumed(rec, model);
    CHECK(zero.back() == 0.0);

    // constant ‖f‖ = 7 over 5 s: trapezoid is exact, c1*F*T
    for (auto& row : rec.rows) row.force = Vec3(7.0, 0.0, 0.0);
    auto constant = fuel_consumed(rec, model);
    CHECK(constant.back() == doctest::Approx(1.3e-3 * 7.0 * 5.0).epsilon(1e-14));
    for (std::size_t i = 1; i < constant.size(); ++i) CHECK(constant[i] >= constant[i - 1]);
}

TEST_CASE("scenario resolution: presets, overrides, and config errors") {
    CHECK_THROWS_AS(resolve_scenario("nope"), ConfigError);
    CHECK_THROWS_AS(resolve_scenario("marco_track", {{"n", "0"}}), ConfigError);
    CHECK_THROWS_AS(resolve_scenario("marco_track", {{"bogus_key", "1"}}), ConfigError);
    CHECK_THROWS_AS(resolve_scenario("marco_track", {{"dt", "abc"}}), ConfigError);
    CHECK_THROWS_AS(resolve_scenario("apollo_transposition", {{"n", "3"}}), ConfigError);

    ScenarioParams p = resolve_scenario("marco_track", {{"n", "7"}, {"seed", "11"},
                                                        {"t_final", "5"}});
    CHECK(p.n == 7);
    CHECK(p.seed == 11);
    CHECK(p.t_final == 5.0);
    CHECK(p.kp == 0.2);
    CHECK(p.kd == 0.3);
    CHECK(p.mass == 13.5);

    ScenarioParams base = resolve_scenario("marco_track", {{"controller", "baseline"}});
    CHECK(base.use_baseline);

    // experimental c / beta pins reach the envelope construction
    ScenarioParams pinned = resolve_scenario("marco_track", {{"c", "500"}, {"beta", "0.001"}});
    CHECK(pinned.envelope_overrides.c == doctest::Approx(500.0));
    CHECK(pinned.envelope_overrides.beta == doctest::Approx(0.001));

    // barrier variant key is validated against the scenario
    CHECK_NOTHROW(resolve_scenario("corridor_dock", {{"variant", "corridor"}}));
    CHECK_THROWS_AS(resolve_scenario("corridor_dock", {{"variant", "sphere_keepout"}}),
                    ConfigError);
    CHECK_THROWS_AS(resolve_scenario("marco_track", {{"variant", "corridor"}}), ConfigError);
}

TEST_CASE("run_scenario: equilibrium start stays flat and passes") {
    ScenarioParams p = resolve_scenario("marco_track");
    p.has_fixed_x0 = true;
    p.fixed_x0 = {TrackingError{UnitDualQuaternion::identity(), DualVector::zero()}};
    p.n = 1;
    p.t_final = 1.0;
    p.record_every = 10;

    ScenarioResult r = run_scenario(p);
    REQUIRE(r.records.size() == 1);
    CHECK(r.all_pass);
    for (const auto& row : r.records[0].rows) {
        CHECK(row.norm_x < 1e-12);
        CHECK(std::abs(row.v0) < 1e-15);
        CHECK(row.force.norm() < 1e-12);
    }
}

TEST_CASE("run_scenario: nominal MarCO runs decay V0 and keep drift small") {
    ScenarioParams p = resolve_scenario("marco_track", {{"t_final", "8"}});
    p.n = 6;
    ScenarioResult r = run_scenario(p);

    CHECK(r.max_unit_drift < 1e-8);
    for (const auto& rec : r.records) {
        for (std::size_t i = 1; i < rec.rows.size(); ++i)
            CHECK(rec.rows[i].v0 <= rec.rows[i - 1].v0 + 1e-8);
        for (std::size_t i = 1; i < rec.rows.size(); ++i)
            CHECK(rec.rows[i].fuel_kg >= rec.rows[i - 1].fuel_kg);
    }
    for (const auto& v : r.verdicts) CHECK(v.pass);
}

TEST_CASE("run_scenario: identical configs give bit-identical artifacts") {
    ScenarioParams p = resolve_scenario("marco_iss", {{"t_final", "3"}});
    p.n = 3;
    ScenarioResult a = run_scenario(p);
    ScenarioResult b = run_scenario(p);

    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i)
        CHECK(trajectory_csv_string(a.records[i]) == trajectory_csv_string(b.records[i]));
    CHECK(summary_json_string(a, {}) == summary_json_string(b, {}));
}

TEST_CASE("reference trajectories: spin reference transports are consistent") {
    SpinReference ref(Vec3(0.0, 0.0, 0.4), Vec3(1.0, 0.0, 0.0));
    // finite-difference the pose against the stated twist, and the twist
    // against the stated acceleration
    double t = 0.7, h = 1e-6;
    RefSample mid = ref.sample(t);
    RefSample lo = ref.sample(t - h);
    RefSample hi = ref.sample(t + h);
    DualQuaternion fd = (1.0 / (2.0 * h)) * (hi.pose.dq() - lo.pose.dq());
    DualQuaternion expect = 0.5 * (mid.pose.dq() * mid.twist.as_dq());
    CHECK((fd.to_vec8() - expect.to_vec8()).cwiseAbs().maxCoeff() < 1e-6);

    DualVector twist_fd = (1.0 / (2.0 * h)) * (hi.twist - lo.twist);
    CHECK((twist_fd - mid.accel).norm() < 1e-6 * h);

    CHECK(ref.twist_sup(10.0) == doctest::Approx(1.05 * 0.4).epsilon(1e-12));
}

TEST_CASE("baseline controller runs the full loop") {
    ScenarioParams p = resolve_scenario("marco_track",
                                        {{"controller", "baseline"}, {"t_final", "4"}});
    p.n = 2;
    ScenarioResult r = run_scenario(p);
    REQUIRE(r.records.size() == 2);
    CHECK(r.all_pass);   // the loose envelope holds for the baseline law too
    for (const auto& rec : r.records)
        for (const auto& row : rec.rows) CHECK(std::isfinite(row.norm_x));
}
