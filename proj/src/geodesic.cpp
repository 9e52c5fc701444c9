#include "folia/geodesic.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "folia/connection.hpp"
#include "folia/metric_core.hpp"

namespace folia {

namespace {

// Geodesic acceleration -Gamma^k_{ij} v^i v^j without forming the symbols:
// b_l = (d_i g_{lj} - d_l g_{ij}/2) v^i v^j, a = -g^{-1} b. The LDLT pivots
// double as the positivity check along the flow.
struct GeodesicRhs {
    const FoliatedChart* chart;
    mutable MetricDerivs md;
    mutable VectorXd b;

    void operator()(double /*t*/, const VectorXd& y, VectorXd& dy) const {
        const int d = chart->dim();
        const auto x = y.head(d);
        const auto v = y.tail(d);
        chart->metric(x, 1, md);
        b.resize(d);
        for (int l = 0; l < d; ++l) {
            double acc = 0.0;
            for (int i = 0; i < d; ++i) {
                const double vi = v[i];
                if (vi == 0.0) continue;
                acc += vi * (v.dot(md.dg[i].col(l))) -
                       0.5 * vi * (v.dot(md.dg[l].col(i)));
            }
            b[l] = acc;
        }
        Eigen::LDLT<MatrixXd> ldlt(md.g);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            throw DegenerateMetric("metric lost positivity along geodesic");
        dy.resize(2 * d);
        dy.head(d) = v;
        dy.tail(d) = -ldlt.solve(b);
    }
};

}  // namespace

VectorXd GeodesicPath::position(double t) const {
    const int d = chart->dim();
    return sol.eval(t).head(d);
}

VectorXd GeodesicPath::velocity(double t) const {
    const int d = chart->dim();
    return sol.eval(t).tail(d);
}

void GeodesicPath::state(double t, VectorXd& pos, VectorXd& vel) const {
    const int d = chart->dim();
    VectorXd y;
    sol.eval(t, y);
    pos = y.head(d);
    vel = y.tail(d);
}

double GeodesicPath::initial_speed() const {
    const int d = chart->dim();
    const VectorXd& y0 = sol.y.front();
    return chart->norm(y0.head(d), y0.tail(d));
}

GeodesicPath integrate_geodesic(const FoliatedChart& chart, const VectorXd& p,
                                const VectorXd& u, double t_end, double tol) {
    chart.require_interior(p);
    if (u.norm() == 0.0 && t_end > 0.0)
        throw BadParameters("geodesic needs a nonzero initial velocity");
    const int d = chart.dim();

    GeodesicRhs rhs{&chart, {}, {}};
    VectorXd y0(2 * d);
    y0.head(d) = p;
    y0.tail(d) = u;

    OdeOptions opt;
    opt.abs_tol = tol;
    opt.rel_tol = tol;
    const Box& box = chart.domain();
    bool exited = false;
    StepMonitor monitor = [&box, &exited, d](double, const VectorXd& y) {
        if (!box.contains(y.head(d))) {
            exited = true;
            return false;
        }
        return true;
    };

    GeodesicPath path;
    path.chart = &chart;
    path.sol = integrate_ode(
        [&rhs](double t, const VectorXd& y, VectorXd& dy) { rhs(t, y, dy); },
        y0, 0.0, t_end, opt, monitor);
    if (exited) {
        // Localize the boundary crossing on the last dense-output segment.
        const auto& ts = path.sol.t;
        double lo = ts.size() >= 2 ? ts[ts.size() - 2] : ts.back();
        double hi = ts.back();
        for (int it = 0; it < 60 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (box.contains(path.sol.eval(mid).head(d)))
                lo = mid;
            else
                hi = mid;
        }
        throw LeftDomain(hi, "geodesic left the chart domain");
    }
    path.t_end = t_end;
    path.tolerance = tol;

    const double speed0 = chart.norm(p, u);
    MetricDerivs md;
    FrameDerivs fd;
    for (std::size_t i = 0; i < path.sol.t.size(); ++i) {
        const auto x = path.sol.y[i].head(d);
        const auto v = path.sol.y[i].tail(d);
        chart.metric(x, 0, md);
        chart.vertical_frame(x, 0, fd);
        const double speed = std::sqrt(std::max(0.0, v.dot(md.g * v)));
        path.speed_drift = std::max(path.speed_drift, std::abs(speed - speed0));
        const MatrixXd gram = fd.Z.transpose() * md.g * fd.Z;
        const VectorXd c = gram.ldlt().solve(fd.Z.transpose() * (md.g * v));
        const VectorXd vv = fd.Z * c;
        path.vertical_drift = std::max(
            path.vertical_drift, std::sqrt(std::max(0.0, vv.dot(md.g * vv))));
    }
    return path;
}

VectorXd LeafPatch::point(const VectorXd& lambda) const {
    VectorXd x = seed;
    for (std::size_t a = 0; a < vertical_coords.size(); ++a)
        x[vertical_coords[a]] = lambda[a];
    return x;
}

MatrixXd LeafPatch::jacobian() const {
    MatrixXd J = MatrixXd::Zero(seed.size(), rank());
    for (std::size_t a = 0; a < vertical_coords.size(); ++a)
        J(vertical_coords[a], a) = 1.0;
    return J;
}

VectorXd LeafPatch::lambda_of(const VectorXd& target) const {
    VectorXd lambda(rank());
    for (std::size_t a = 0; a < vertical_coords.size(); ++a)
        lambda[a] = target[vertical_coords[a]];
    return lambda;
}

VectorXd normal_exp(const FoliatedChart& chart, const VectorXd& y,
                    const VectorXd& u) {
    if (u.norm() == 0.0) return y;
    const SplitVector s = project(chart, y, u);
    if (chart.norm(y, s.v_part) >= 1e-8)
        throw NotHorizontal("normal_exp requires a horizontal covector");
    const GeodesicPath path = integrate_geodesic(chart, y, u, 1.0);
    return path.position(1.0);
}

VectorXd parallel_transport(const FoliatedChart& chart,
                            const std::function<VectorXd(double)>& curve,
                            const std::function<VectorXd(double)>& curve_dot,
                            const VectorXd& u, double ode_tol) {
    const int d = chart.dim();
    OdeOptions opt;
    opt.abs_tol = ode_tol;
    opt.rel_tol = ode_tol;
    opt.h_init = 0.1;
    const auto rhs = [&](double s, const VectorXd& U, VectorXd& dU) {
        const PointGeometry geom = point_geometry(chart, curve(s));
        const VectorXd cd = curve_dot(s);
        dU = VectorXd::Zero(d);
        for (int a = 0; a < d; ++a)
            if (cd[a] != 0.0) dU -= cd[a] * (geom.nabla[a] * U);
    };
    const OdeSolution sol = integrate_ode(rhs, u, 0.0, 1.0, opt);
    return sol.y.back();
}

}  // namespace folia
