#include <cmath>

#include "dqtrack/safety.hpp"

namespace dqtrack {

BarrierSpec BarrierSpec::corridor(double r1, double r2, double r3, double theta,
                                  const Vec3& origin) {
    if (!(0.0 < r1 && r1 < r2 && r2 < r3))
        throw DomainError("BarrierSpec: corridor radii must satisfy 0 < r1 < r2 < r3");
    if (!(theta > 0.0 && theta < M_PI / 2.0))
        throw DomainError("BarrierSpec: corridor half-angle must lie in (0, pi/2)");
    BarrierSpec s;
    s.variant = Variant::corridor;
    s.r1 = r1;
    s.r2 = r2;
    s.r3 = r3;
    s.theta = theta;
    s.origin = origin;
    double t2 = std::tan(theta) * std::tan(theta);
    s.r_star = (r3 * r3 - r1 * r1 * (1.0 + t2)) /
               (r1 * r1 * std::sin(M_PI * r1 / r2) * t2);
    return s;
}

BarrierSpec BarrierSpec::half_space(const Vec3& normal, double offset) {
    if (normal.norm() < 1e-12) throw DomainError("BarrierSpec: half-space normal near zero");
    BarrierSpec s;
    s.variant = Variant::half_space;
    s.normal = normal;
    s.offset = offset;
    return s;
}

BarrierSpec BarrierSpec::ceiling(double height) {
    BarrierSpec s;
    s.variant = Variant::ceiling;
    s.height = height;
    return s;
}

BarrierSpec BarrierSpec::sphere_keepout(const Vec3& center, double radius) {
    if (!(radius > 0.0)) throw DomainError("BarrierSpec: keep-out radius must be positive");
    BarrierSpec s;
    s.variant = Variant::sphere_keepout;
    s.center = center;
    s.radius = radius;
    return s;
}

namespace {

BarrierEval eval_corridor(const BarrierSpec& s, const Vec3& r) {
    const double x = r.x(), y = r.y(), z = r.z();
    const double rho2 = y * y + z * z;
    const double t2 = std::tan(s.theta) * std::tan(s.theta);

    if (x < -s.r3 || x > s.r2)
        throw DomainError("barrier_eval: position outside the corridor domain");

    if (x >= 0.0 && x <= s.r1) {
        double denom = 2.0 * s.r1 - x;
        double ciss = t2 * x * x * x / denom;
        if (rho2 <= ciss) {
            // piece 1: cissoid tube
            double g = t2 * x * x * x / denom;
            double gp = t2 * (6.0 * s.r1 * x * x - 2.0 * x * x * x) / (denom * denom);
            double gpp = t2 * ((12.0 * s.r1 * x - 6.0 * x * x) / (denom * denom) +
                               (12.0 * s.r1 * x * x - 4.0 * x * x * x) /
                                   (denom * denom * denom));
            BarrierEval e;
            e.h = g - rho2;
            e.grad = Vec3(gp, -2.0 * y, -2.0 * z);
            e.hess = Mat3::Zero();
            e.hess(0, 0) = gpp;
            e.hess(1, 1) = -2.0;
            e.hess(2, 2) = -2.0;
            e.piece = 1;
            return e;
        }
    }
    if (x > s.r1) {
        // piece 3: link surface
        double arg = M_PI * x / s.r2;
        double sn = std::sin(arg), cs = std::cos(arg);
        double w = 1.0 + s.r_star * sn;
        double wp = s.r_star * (M_PI / s.r2) * cs;
        double wpp = -s.r_star * (M_PI / s.r2) * (M_PI / s.r2) * sn;
        BarrierEval e;
        e.h = x * x + rho2 * w - s.r3 * s.r3;
        e.grad = Vec3(2.0 * x + rho2 * wp, 2.0 * y * w, 2.0 * z * w);
        e.hess << 2.0 + rho2 * wpp, 2.0 * y * wp, 2.0 * z * wp,
                  2.0 * y * wp,     2.0 * w,      0.0,
                  2.0 * z * wp,     0.0,          2.0 * w;
        e.piece = 3;
        return e;
    }
    // piece 2: keep-out sphere
    BarrierEval e;
    e.h = r.squaredNorm() - s.r3 * s.r3;
    e.grad = 2.0 * r;
    e.hess = 2.0 * Mat3::Identity();
    e.piece = 2;
    return e;
}

}  // namespace

BarrierEval barrier_eval(const BarrierSpec& spec, const Vec3& r) {
    switch (spec.variant) {
        case BarrierSpec::Variant::corridor:
            return eval_corridor(spec, r - spec.origin);
        case BarrierSpec::Variant::half_space:
            return {spec.normal.dot(r) - spec.offset, spec.normal, Mat3::Zero(), 0};
        case BarrierSpec::Variant::ceiling:
            return {spec.height - r.z(), Vec3(0.0, 0.0, -1.0), Mat3::Zero(), 0};
        case BarrierSpec::Variant::sphere_keepout: {
            Vec3 d = r - spec.center;
            return {d.squaredNorm() - spec.radius * spec.radius, 2.0 * d,
                    2.0 * Mat3::Identity(), 0};
        }
    }
    throw DomainError("barrier_eval: unknown variant");
}

CbfRow cbf_constraint(const BarrierSpec& spec, const CbfPoles& poles, const Vec3& r,
                      const Vec3& v, const DualInertia& J, const Vec3& drift) {
    BarrierEval e = barrier_eval(spec, r);
    double h_dot = e.grad.dot(v);
    double rhs = -poles.a1 * h_dot - poles.a2 * e.h - v.dot(e.hess * v) - e.grad.dot(drift);
    return {e.grad / J.mass(), rhs};
}

}  // namespace dqtrack
