#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dqtrack/dynamics.hpp"

namespace dqtrack {

/// Barrier geometry.  The corridor variant is the composite docking surface:
/// a cissoid approach tube for x ∈ [0,r1], a keep-out sphere of radius r3,
/// and a sinusoidally-flared link surface joining them over x ∈ (r1,r2].
///
/// Region rule (the pieces' x-intervals overlap in the source definition):
/// piece 1 governs on [0,r1] while ȳ²+z̄² lies inside the cissoid tube,
/// piece 3 governs on (r1,r2], the sphere governs elsewhere on [−r3,r2].
struct BarrierSpec {
    enum class Variant { corridor, half_space, ceiling, sphere_keepout };

    Variant variant;

    // corridor
    double r1{0.0}, r2{0.0}, r3{0.0};
    double theta{0.0};    // half-angle of the approach cone, rad
    double r_star{0.0};   // derived so the surface is continuous at the mouth
    Vec3 origin{Vec3::Zero()};   // corridor apex in the evaluation frame

    // half_space: h = normal·r − offset
    Vec3 normal{Vec3::UnitZ()};
    double offset{0.0};

    // ceiling: h = height − z
    double height{0.0};

    // sphere_keepout: h = ‖r − center‖² − radius²
    Vec3 center{Vec3::Zero()};
    double radius{0.0};

    static BarrierSpec corridor(double r1, double r2, double r3, double theta,
                                const Vec3& origin = Vec3::Zero());
    static BarrierSpec half_space(const Vec3& normal, double offset);
    static BarrierSpec ceiling(double height);
    static BarrierSpec sphere_keepout(const Vec3& center, double radius);
};

struct BarrierEval {
    double h;
    Vec3 grad;
    Mat3 hess;
    int piece;   // 1 = cissoid, 2 = sphere, 3 = link; 0 for non-corridor variants
};

/// Value, gradient and Hessian of the active piece at r.  Throws
/// DomainError when r exits the corridor domain (x < −r3 or x > r2).
BarrierEval barrier_eval(const BarrierSpec& spec, const Vec3& r);

/// Pole parameters of the relative-degree-2 exponential CBF constraint
/// ḧ + a1 ḣ + a2 h ≥ 0: both roots of λ² + a1 λ + a2 must be negative reals.
struct CbfPoles {
    double a1;
    double a2;

    CbfPoles(double a1_, double a2_) : a1(a1_), a2(a2_) {
        if (!(a1 > 0.0) || !(a2 > 0.0) || a1 * a1 < 4.0 * a2)
            throw DomainError("CbfPoles: roots of the pole polynomial must be negative reals");
    }
};

/// One half-space row g_row·u ≥ rhs of the safety QP.
struct CbfRow {
    Vec3 g_row;
    double rhs;
};

/// Builds the exponential-CBF row for translational double-integrator
/// dynamics r̈ = u/m + drift:
///   ḣ = ∇h·v,  ḧ = vᵀHv + ∇h·(u/m + drift),
///   g_row = ∇h/m,  rhs = −a1 ḣ − a2 h − vᵀHv − ∇h·drift.
CbfRow cbf_constraint(const BarrierSpec& spec, const CbfPoles& poles, const Vec3& r,
                      const Vec3& v, const DualInertia& J, const Vec3& drift = Vec3::Zero());

/// Componentwise input bounds (the admissible set 𝒰).
struct Box {
    Vec3 lo;
    Vec3 hi;

    Box(const Vec3& lo_, const Vec3& hi_) : lo(lo_), hi(hi_) {
        if ((hi - lo).minCoeff() < 0.0) throw DomainError("Box: lower bound exceeds upper");
    }
    static Box symmetric(double f_max) {
        return {Vec3::Constant(-f_max), Vec3::Constant(f_max)};
    }
};

/// argmin ‖u − u0‖² over {u : g_row·u ≥ rhs per row} ∩ box.
struct QpProblem {
    Vec3 u0;
    std::vector<CbfRow> rows;
    std::optional<Box> box;
};

struct QpSolution {
    Vec3 u;
    double kkt_residual;        // max of stationarity/feasibility/complementarity residuals
    int iterations;
    bool modified;              // false when u0 was already feasible
    std::vector<int> active;    // indices into the expanded constraint list
};

/// Dual active-set solve (constraints added one at a time from the
/// unconstrained optimum u0).  Feasible u0 is returned bit-identical.
/// Throws QpInfeasible when no box point satisfies a row.
QpSolution solve_filter_qp(const QpProblem& p);

struct SafetyReport {
    std::vector<double> h;      // barrier values at the current position
    double h_min;
    double kkt_residual;
    bool modified;
};

/// Replaces the force with the QP-filtered value; the torque passes through
/// unchanged.  Positions/velocities are taken from the tracking error and
/// expressed in the desired frame, where the barrier geometry lives.
DualWrench safe_wrench(const RawErrorState& x, const DualWrench& nominal,
                       const std::vector<BarrierSpec>& specs, const CbfPoles& poles,
                       const DualInertia& J, const std::optional<Box>& box,
                       SafetyReport* report = nullptr, const Vec3& drift = Vec3::Zero());
DualWrench safe_wrench(const TrackingError& x, const DualWrench& nominal,
                       const std::vector<BarrierSpec>& specs, const CbfPoles& poles,
                       const DualInertia& J, const std::optional<Box>& box,
                       SafetyReport* report = nullptr, const Vec3& drift = Vec3::Zero());

}  // namespace dqtrack
