// Newton inversion of the normal exponential map. The unknowns live in the
// normal bundle of the leaf (leaf position, horizontal covector); the exact
// Jacobian columns are F-Jacobi fields evaluated at unit time.
#include <cmath>

#include "folia/jacobi.hpp"
#include "folia/metric_core.hpp"

namespace folia {

namespace {

struct NewtonState {
    VectorXd lambda;  // leaf coordinates
    VectorXd y;       // base point
    VectorXd u;       // horizontal initial velocity, |u|_g = rho
};

VectorXd project_horizontal(const FoliatedChart& chart, const VectorXd& y,
                            const VectorXd& u) {
    return project(chart, y, u).h_part;
}

// Arc-length estimate along the unit-speed ray from y0: scan the coordinate
// distance to the target and refine the best node parabolically. Cheap and
// robust against the coordinate-difference heuristic overshooting on
// exponentially distorted charts.
double estimate_rho_along(const FoliatedChart& chart, const VectorXd& y0,
                          const VectorXd& unit, const VectorXd& target,
                          double rho_cap) {
    GeodesicPath path;
    double t_max = rho_cap;
    try {
        path = integrate_geodesic(chart, y0, unit, t_max, 1e-8);
    } catch (const LeftDomain& e) {
        t_max = std::max(1e-3, 0.9 * e.t_exit);
        path = integrate_geodesic(chart, y0, unit, t_max, 1e-8);
    }
    const int N = 512;
    double best_t = t_max, best_d = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= N; ++i) {
        const double t = t_max * i / N;
        const double dist = (path.position(t) - target).norm();
        if (dist < best_d) {
            best_d = dist;
            best_t = t;
        }
    }
    // three-point parabolic refinement
    const double h = t_max / N;
    if (best_t > h && best_t < t_max - h) {
        const double dm = (path.position(best_t - h) - target).norm();
        const double dp = (path.position(best_t + h) - target).norm();
        const double denom = dm - 2 * best_d + dp;
        if (denom > 1e-300)
            best_t += 0.5 * h * (dm - dp) / denom;
    }
    return std::max(best_t, 1e-6);
}

// Deterministic direction set on the horizontal unit sphere for restarts.
std::vector<VectorXd> multistart_directions(const FoliatedChart& chart,
                                            const VectorXd& y, int count) {
    const AdaptedFrame f = adapted_frame(chart, y);
    const int n = chart.hdim();
    std::vector<VectorXd> dirs;
    dirs.reserve(count);
    if (n == 1) {
        dirs.push_back(f.horizontal(0));
        dirs.push_back(-f.horizontal(0));
        return dirs;
    }
    Rng rng(0x8f1bbcdcULL);
    for (int k = 0; k < count; ++k) {
        VectorXd c(n);
        for (int i = 0; i < n; ++i) c[i] = rng.normal();
        if (c.norm() < 1e-12) c[0] = 1.0;
        c /= c.norm();
        VectorXd dir = VectorXd::Zero(chart.dim());
        for (int i = 0; i < n; ++i) dir += c[i] * f.horizontal(i);
        dirs.push_back(dir);
    }
    return dirs;
}

}  // namespace

ShootingResult invert_normal_exp(const FoliatedChart& chart,
                                 const LeafPatch& leaf, const VectorXd& target,
                                 const ShootingOptions& opt) {
    chart.require_interior(target);
    const int d = chart.dim();
    const int n = chart.hdim();
    const int m = chart.vdim();

    // Radial straight-line heuristic in coordinates.
    const VectorXd lambda0 = leaf.lambda_of(target);
    const VectorXd y0 = leaf.point(lambda0);
    VectorXd u0 = project_horizontal(chart, y0, target - y0);

    // Target on the leaf: nothing to solve.
    if (chart.norm(y0, u0) < 1e-13 && (target - y0).norm() < 1e-13) {
        ShootingResult res;
        res.base = y0;
        res.u = project(chart, y0, VectorXd::Zero(d));
        res.rho = 0.0;
        res.iterations = 0;
        res.residual = (target - y0).norm();
        res.path.chart = &chart;
        res.path.t_end = 0.0;
        res.path.sol.t = {0.0};
        VectorXd st(2 * d);
        st.head(d) = y0;
        st.tail(d).setZero();
        res.path.sol.y = {st};
        res.path.sol.f = {VectorXd::Zero(2 * d)};
        return res;
    }

    const MatrixXd leaf_jac = leaf.jacobian();
    const Eigen::ColPivHouseholderQR<MatrixXd> leaf_solver(leaf_jac);

    auto run_newton = [&](NewtonState state,
                          int max_iter) -> std::optional<ShootingResult> {
        GeodesicPath path;
        try {
            path = integrate_geodesic(chart, state.y, state.u, 1.0, opt.ode_tol);
        } catch (const Error&) {
            return std::nullopt;
        }
        VectorXd resid = path.position(1.0) - target;
        int iter = 0;
        while (iter < max_iter) {
            if (resid.norm() < opt.tol) {
                ShootingResult res;
                res.base = state.y;
                const double rho = chart.norm(state.y, state.u);
                res.rho = rho;
                res.u = project(chart, state.y, state.u);
                res.iterations = iter;
                res.residual = resid.norm();
                res.path = integrate_geodesic(chart, state.y, state.u / rho,
                                              rho, opt.ode_tol);
                return res;
            }
            ++iter;

            // Exact Jacobian from F-Jacobi fields: columns for horizontal
            // covector moves (E_i) then leaf moves (F_a).
            const MatrixXd F0 = [&] {
                const AdaptedFrame f = adapted_frame(chart, state.y);
                return f.vectors;
            }();
            std::vector<JacobiInitial> init;
            init.reserve(d);
            for (int i = 0; i < n; ++i)
                init.push_back({VectorXd::Zero(d), F0.col(i)});
            for (int a = 0; a < m; ++a)
                init.push_back({F0.col(n + a), VectorXd::Zero(d)});
            const double rho = std::max(chart.norm(state.y, state.u), 1e-6);
            const JacobiBatch batch =
                propagate_jacobi(chart, path, init, opt.table_step / rho,
                                 1e-10, std::numeric_limits<double>::infinity());
            MatrixXd J(d, d);
            VectorXd V, W;
            for (int c = 0; c < d; ++c) {
                batch.field(1.0, c, V, W);
                J.col(c) = V;
            }
            const VectorXd delta = J.colPivHouseholderQr().solve(-resid);

            // Damped update with step halving.
            bool accepted = false;
            for (int half = 0; half <= opt.max_halvings && !accepted; ++half) {
                const double scale = std::ldexp(1.0, -half);
                VectorXd dh = VectorXd::Zero(d);
                for (int i = 0; i < n; ++i) dh += scale * delta[i] * F0.col(i);
                VectorXd dv = VectorXd::Zero(d);
                for (int a = 0; a < m; ++a)
                    dv += scale * delta[n + a] * F0.col(n + a);
                const VectorXd dlambda = leaf_solver.solve(dv);
                NewtonState trial;
                trial.lambda = state.lambda + dlambda;
                trial.y = leaf.point(trial.lambda);
                VectorXd u_try = state.u + dh;
                if (dlambda.norm() > 1e-14) {
                    const VectorXd from = state.y;
                    const VectorXd step = trial.y - state.y;
                    u_try = parallel_transport(
                        chart, [&](double s) { return VectorXd(from + s * step); },
                        [&](double) { return step; }, u_try, 1e-12);
                }
                trial.u = project_horizontal(chart, trial.y, u_try);
                if (chart.norm(trial.y, trial.u) < 1e-12) continue;
                try {
                    GeodesicPath trial_path = integrate_geodesic(
                        chart, trial.y, trial.u, 1.0, opt.ode_tol);
                    const VectorXd trial_res = trial_path.position(1.0) - target;
                    if (trial_res.norm() < resid.norm() * (1.0 - 1e-4) ||
                        trial_res.norm() < opt.tol) {
                        state = trial;
                        path = std::move(trial_path);
                        resid = trial_res;
                        accepted = true;
                    }
                } catch (const LeftDomain&) {
                    // halve and retry
                } catch (const DegenerateMetric&) {
                } catch (const StepFailure&) {
                }
            }
            if (!accepted) return std::nullopt;
        }
        if (resid.norm() < opt.tol) {
            ShootingResult res;
            res.base = state.y;
            const double rho = chart.norm(state.y, state.u);
            res.rho = rho;
            res.u = project(chart, state.y, state.u);
            res.iterations = iter;
            res.residual = resid.norm();
            res.path =
                integrate_geodesic(chart, state.y, state.u / rho, rho, opt.ode_tol);
            return res;
        }
        return std::nullopt;
    };

    const double u0_norm = chart.norm(y0, u0);
    NewtonState first{lambda0, y0, u0};
    if (u0_norm < 1e-10) {
        // Degenerate heuristic (target vertically above the leaf seed in
        // coordinates); nudge along the first horizontal frame direction.
        const AdaptedFrame f = adapted_frame(chart, y0);
        first.u = 1e-3 * f.horizontal(0);
    } else {
        const VectorXd unit = u0 / u0_norm;
        const double rho_est = estimate_rho_along(
            chart, y0, unit, target, std::min(1.5 * u0_norm + 1.0, 60.0));
        first.u = rho_est * unit;
    }
    if (auto res = run_newton(first, opt.max_iterations)) return *res;

    for (const VectorXd& dir : multistart_directions(chart, y0, opt.multistart)) {
        const double rho_est = estimate_rho_along(chart, y0, dir, target, 60.0);
        NewtonState start{lambda0, y0, rho_est * dir};
        if (auto res = run_newton(start, opt.max_iterations)) return *res;
    }
    throw NoConvergence(opt.max_iterations,
                        "invert_normal_exp: Newton failed from all starts");
}

double distance_to_leaf(const FoliatedChart& chart, const LeafPatch& leaf,
                        const VectorXd& target, const ShootingOptions& opt) {
    return invert_normal_exp(chart, leaf, target, opt).rho;
}

}  // namespace folia
