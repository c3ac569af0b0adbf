#include <algorithm>
#include <cmath>
#include <limits>

#include "dqtrack/safety.hpp"

namespace dqtrack {

namespace {

constexpr double kFeasTol = 1e-11;

struct Constraint {
    Vec3 c;
    double d;   // c·u ≥ d
};

// Expands CBF rows plus box faces into one ≥-constraint list.
std::vector<Constraint> expand(const QpProblem& p) {
    std::vector<Constraint> cs;
    for (const auto& row : p.rows) cs.push_back({row.g_row, row.rhs});
    if (p.box) {
        for (int i = 0; i < 3; ++i) {
            Vec3 e = Vec3::Zero();
            e[i] = 1.0;
            cs.push_back({e, p.box->lo[i]});
            cs.push_back({-e, -p.box->hi[i]});
        }
    }
    return cs;
}

double kkt_residual(const Vec3& u, const Vec3& u0, const std::vector<Constraint>& cs,
                    const std::vector<double>& lambda) {
    Vec3 grad = u - u0;
    double res = 0.0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        grad -= lambda[i] * cs[i].c;
        double slack = cs[i].c.dot(u) - cs[i].d;
        res = std::max(res, -slack);                        // primal feasibility
        res = std::max(res, -lambda[i]);                    // dual feasibility
        res = std::max(res, std::abs(lambda[i] * slack));   // complementarity
    }
    return std::max(res, grad.norm());                      // stationarity
}

}  // namespace

QpSolution solve_filter_qp(const QpProblem& p) {
    std::vector<Constraint> cs = expand(p);

    // Per-row reachability over the box: a row no box corner can satisfy
    // makes the problem infeasible outright.
    if (p.box) {
        for (const auto& row : p.rows) {
            double best = 0.0;
            for (int i = 0; i < 3; ++i)
                best += row.g_row[i] * (row.g_row[i] > 0.0 ? p.box->hi[i] : p.box->lo[i]);
            if (best < row.rhs - kFeasTol) throw QpInfeasible(best, row.rhs);
        }
    }

    std::vector<double> lambda(cs.size(), 0.0);

    // Already feasible: hand u0 back untouched.
    bool feasible = true;
    for (const auto& c : cs)
        if (c.c.dot(p.u0) < c.d) { feasible = false; break; }
    if (feasible) return {p.u0, kkt_residual(p.u0, p.u0, cs, lambda), 0, false, {}};

    // Dual active-set iteration from the unconstrained optimum.
    Vec3 u = p.u0;
    std::vector<int> active;
    int iters = 0;
    const int max_iters = 100;

    while (true) {
        if (++iters > max_iters)
            throw std::runtime_error("solve_filter_qp: iteration limit exceeded");

        // Most violated constraint (actives sit at |slack| <= tol, so they
        // are only re-picked if numerical drift pushed them off the face).
        int pidx = -1;
        double worst = -kFeasTol;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            double slack = cs[i].c.dot(u) - cs[i].d;
            if (slack < worst) { worst = slack; pidx = static_cast<int>(i); }
        }
        if (pidx < 0) break;

        // A re-picked active leaves the working set; its multiplier keeps
        // accumulating so the dual state stays consistent.
        double lam_p = 0.0;
        if (auto it = std::find(active.begin(), active.end(), pidx); it != active.end()) {
            lam_p = lambda[pidx];
            lambda[pidx] = 0.0;
            active.erase(it);
        }

        const Vec3& np = cs[pidx].c;
        const double np2 = np.squaredNorm();

        // Work on constraint pidx until it is satisfied or proven infeasible.
        while (true) {
            int na = static_cast<int>(active.size());
            Eigen::MatrixXd N(3, na);
            for (int k = 0; k < na; ++k) N.col(k) = cs[active[k]].c;

            Eigen::VectorXd r(na);
            Vec3 z;
            if (na > 0) {
                Eigen::MatrixXd gram = N.transpose() * N;
                r = gram.ldlt().solve(N.transpose() * np);
                z = np - N * r;
            } else {
                z = np;
            }

            double slack = np.dot(u) - cs[pidx].d;
            if (slack >= -kFeasTol) {
                if (lam_p > 0.0) { active.push_back(pidx); lambda[pidx] += lam_p; }
                break;
            }

            // np·z = ‖z‖²; classify the null direction relative to the
            // constraint scale, not machine epsilon, so near-degenerate
            // geometry yields the Farkas certificate instead of a huge step.
            double t2 = std::numeric_limits<double>::infinity();
            double znp = np.dot(z);
            if (znp > 1e-10 * np2) t2 = -slack / znp;

            double t1 = std::numeric_limits<double>::infinity();
            int blocker = -1;
            for (int k = 0; k < na; ++k) {
                if (r[k] > 1e-12) {
                    double cand = lambda[active[k]] / r[k];
                    if (cand < t1) { t1 = cand; blocker = k; }
                }
            }

            double t = std::min(t1, t2);
            if (!std::isfinite(t))
                throw QpInfeasible(np.dot(u), cs[pidx].d);

            u += t * z;
            for (int k = 0; k < na; ++k) lambda[active[k]] -= t * r[k];
            lam_p += t;

            if (t == t2 && t2 <= t1) {
                active.push_back(pidx);
                lambda[pidx] += lam_p;
                break;
            }
            // Dual step hit zero on a blocking multiplier: drop it.
            lambda[active[blocker]] = 0.0;
            active.erase(active.begin() + blocker);
        }
    }

    double res = kkt_residual(u, p.u0, cs, lambda);
    if (!(res <= 1e-8))
        throw std::runtime_error("solve_filter_qp: KKT verification failed, residual " +
                                 std::to_string(res));
    return {u, res, iters, true, active};
}

DualWrench safe_wrench(const RawErrorState& x, const DualWrench& nominal,
                       const std::vector<BarrierSpec>& specs, const CbfPoles& poles,
                       const DualInertia& J, const std::optional<Box>& box,
                       SafetyReport* report, const Vec3& drift) {
    UnitQuaternion q_att = UnitQuaternion::normalized(x.q_err.real);
    Vec3 r = (2.0 * (x.q_err.dual * conj(x.q_err.real))).vec;
    Vec3 v = q_att.rotate(x.w_err.dual_vec());

    QpProblem qp;
    qp.u0 = q_att.rotate(nominal.force);
    qp.box = box;
    std::vector<double> h_vals;
    for (const auto& spec : specs) {
        h_vals.push_back(barrier_eval(spec, r).h);
        qp.rows.push_back(cbf_constraint(spec, poles, r, v, J, drift));
    }

    QpSolution sol = solve_filter_qp(qp);
    if (report) {
        report->h = h_vals;
        report->h_min = h_vals.empty() ? std::numeric_limits<double>::infinity()
                                       : *std::min_element(h_vals.begin(), h_vals.end());
        report->kkt_residual = sol.kkt_residual;
        report->modified = sol.modified;
    }
    if (!sol.modified) return nominal;   // bit-identical pass-through
    return {q_att.rotate_back(sol.u), nominal.torque};
}

DualWrench safe_wrench(const TrackingError& x, const DualWrench& nominal,
                       const std::vector<BarrierSpec>& specs, const CbfPoles& poles,
                       const DualInertia& J, const std::optional<Box>& box,
                       SafetyReport* report, const Vec3& drift) {
    return safe_wrench(RawErrorState(x), nominal, specs, poles, J, box, report, drift);
}

}  // namespace dqtrack
