#include "folia/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "folia/connection.hpp"
#include "folia/metric_core.hpp"

namespace folia {

double comparison_bound(int d_horizontal, double K, double r) {
    if (K > 0.0)
        return (d_horizontal - 1) * std::sqrt(K) / std::tanh(std::sqrt(K) * r);
    return (d_horizontal - 1) / r;
}

LaplacianValue laplacian_r(const FoliatedChart& chart, const LeafPatch& leaf,
                           const VectorXd& target, const ShootingOptions& opt) {
    const DistanceHessian dh(chart, leaf, target, opt);
    const int n = chart.hdim();
    const VectorXd pos = dh.shooting().path.position(dh.rho());
    const VectorXd grad_r = dh.shooting().path.velocity(dh.rho());
    const MatrixXd g = chart.metric_at(pos);

    // Orthonormal horizontal frame with the radial direction first; the
    // radial term of the trace vanishes.
    const MatrixXd frame = dh.basis().frame(dh.rho());
    double delta_h = 0.0;
    for (int i = 1; i < n; ++i) delta_h += dh.quadratic_form(frame.col(i));

    const SplitVector H = mean_curvature(chart, pos);
    const double correction = H.components.dot(g * grad_r);

    LaplacianValue out;
    out.delta_h_r = delta_h;
    out.delta_r = delta_h - correction;
    out.r = dh.rho();
    return out;
}

ComparisonReport check_laplacian_comparison(const FoliatedChart& chart,
                                            const LeafPatch& leaf, double K,
                                            int samples, std::uint64_t seed,
                                            double r_min, double r_max,
                                            const ShootingOptions& opt) {
    ComparisonReport report;
    Rng rng(seed);
    const int n = chart.hdim();
    const int m = chart.vdim();
    report.min_margin = std::numeric_limits<double>::infinity();

    for (int s = 0; s < samples; ++s) {
        // Sample a target by shooting from a random leaf point.
        VectorXd lambda = leaf.lambda_of(leaf.seed);
        for (int a = 0; a < m; ++a) lambda[a] += rng.uniform(-1.0, 1.0);
        const VectorXd y = leaf.point(lambda);
        const AdaptedFrame f = adapted_frame(chart, y);
        VectorXd c(n);
        for (int i = 0; i < n; ++i) c[i] = rng.normal();
        c /= c.norm();
        const double rho = rng.uniform(r_min, r_max);
        VectorXd u = VectorXd::Zero(chart.dim());
        for (int i = 0; i < n; ++i) u += rho * c[i] * f.horizontal(i);
        VectorXd target;
        try {
            target = normal_exp(chart, y, u);
        } catch (const LeftDomain&) {
            continue;
        }
        if (!chart.domain().interior(target)) continue;

        const LaplacianValue lv = laplacian_r(chart, leaf, target, opt);
        ComparisonRow row;
        row.target = target;
        row.r = lv.r;
        row.delta_r = lv.delta_r;
        row.delta_h_r = lv.delta_h_r;
        row.bound = comparison_bound(n, K, lv.r);
        row.margin = lv.delta_h_r - row.bound;
        report.rows.push_back(row);
        report.min_margin = std::min(report.min_margin, row.margin);
        report.max_vertical_defect = std::max(
            report.max_vertical_defect, std::abs(lv.delta_r - lv.delta_h_r));
    }
    report.pass = !report.rows.empty() && report.min_margin > -1e-6;
    return report;
}

// ---------------------------------------------------------------------------
// Bump functions and quadrature

double BumpFunction::value(const VectorXd& x) const {
    const double s2 = (x - center).squaredNorm() / (radius * radius);
    if (s2 >= 1.0) return 0.0;
    return amplitude * std::exp(-1.0 / (1.0 - s2));
}

VectorXd BumpFunction::gradient(const VectorXd& x) const {
    const VectorXd dx = x - center;
    const double s2 = dx.squaredNorm() / (radius * radius);
    if (s2 >= 1.0) return VectorXd::Zero(x.size());
    const double f = amplitude * std::exp(-1.0 / (1.0 - s2));
    const double q = 1.0 - s2;
    return f * (-2.0 / (q * q)) / (radius * radius) * dx;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

struct TensorGrid {
    std::vector<std::vector<double>> nodes;    // per axis
    std::vector<std::vector<double>> weights;  // per axis
    int dim() const { return static_cast<int>(nodes.size()); }
};

TensorGrid bump_grid(const BumpFunction& f, int nodes_per_axis) {
    TensorGrid grid;
    const int d = static_cast<int>(f.center.size());
    std::vector<double> xs, ws;
    gauss_legendre(nodes_per_axis, xs, ws);
    grid.nodes.resize(d);
    grid.weights.resize(d);
    for (int i = 0; i < d; ++i) {
        const double a = f.center[i] - f.radius;
        const double b = f.center[i] + f.radius;
        grid.nodes[i].resize(nodes_per_axis);
        grid.weights[i].resize(nodes_per_axis);
        for (int k = 0; k < nodes_per_axis; ++k) {
            grid.nodes[i][k] = 0.5 * (a + b) + 0.5 * (b - a) * xs[k];
            grid.weights[i][k] = 0.5 * (b - a) * ws[k];
        }
    }
    return grid;
}

// Visits every tensor node: cb(point, weight, index tuple).
template <class Cb>
void for_each_node(const TensorGrid& grid, Cb&& cb) {
    const int d = grid.dim();
    std::vector<int> idx(d, 0);
    VectorXd x(d);
    while (true) {
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
            x[i] = grid.nodes[i][idx[i]];
            w *= grid.weights[i][idx[i]];
        }
        cb(x, w, idx);
        int i = 0;
        for (; i < d; ++i) {
            if (++idx[i] < static_cast<int>(grid.nodes[i].size())) break;
            idx[i] = 0;
        }
        if (i == d) break;
    }
}

RayleighQuotient rayleigh_raw(const FoliatedChart& chart,
                              const BumpFunction& f, int nodes_per_axis) {
    double mass = 0.0, full = 0.0, horiz = 0.0;
    const TensorGrid grid = bump_grid(f, nodes_per_axis);
    MetricDerivs md;
    FrameDerivs fd;
    for_each_node(grid, [&](const VectorXd& x, double w, const std::vector<int>&) {
        const double fv = f.value(x);
        if (fv == 0.0) return;
        chart.metric(x, 0, md);
        chart.vertical_frame(x, 0, fd);
        const double dens = std::sqrt(md.g.determinant());
        const VectorXd df = f.gradient(x);
        const VectorXd grad = md.g.ldlt().solve(df);  // metric gradient
        // vertical projection
        const MatrixXd gram = fd.Z.transpose() * md.g * fd.Z;
        const VectorXd c = gram.ldlt().solve(fd.Z.transpose() * (md.g * grad));
        const VectorXd grad_h = grad - fd.Z * c;
        mass += w * dens * fv * fv;
        full += w * dens * grad.dot(md.g * grad);
        horiz += w * dens * grad_h.dot(md.g * grad_h);
    });
    RayleighQuotient out;
    out.mass = mass;
    out.full = full / mass;
    out.horizontal = horiz / mass;
    return out;
}

}  // namespace

RayleighQuotient rayleigh_quotient(const FoliatedChart& chart,
                                   const BumpFunction& f,
                                   const QuadratureOptions& opt) {
    for (int i = 0; i < f.center.size(); ++i) {
        if (!(f.center[i] - f.radius > chart.domain().lo[i]) ||
            !(f.center[i] + f.radius < chart.domain().hi[i]))
            throw BadParameters("bump support must lie inside the chart domain");
    }
    const RayleighQuotient fine = rayleigh_raw(chart, f, opt.nodes_per_axis);
    if (opt.check_resolution) {
        const RayleighQuotient coarse =
            rayleigh_raw(chart, f, std::max(4, opt.nodes_per_axis / 2));
        const double df =
            std::abs(fine.full - coarse.full) / std::max(1e-300, fine.full);
        const double dh = std::abs(fine.horizontal - coarse.horizontal) /
                          std::max(1e-300, fine.horizontal);
        if (df > opt.resolution_tol || dh > opt.resolution_tol)
            throw QuadratureUnderresolved(
                "Rayleigh quotient changes by more than the resolution "
                "tolerance under grid refinement");
    }
    return fine;
}

PoincareProofCheck poincare_proof_check(const FoliatedChart& chart,
                                        const LeafPatch& leaf, double K,
                                        const BumpFunction& f,
                                        int nodes_per_axis,
                                        const ShootingOptions& opt) {
    const int d = chart.dim();
    const int n = chart.hdim();
    const TensorGrid grid = bump_grid(f, nodes_per_axis);

    // r and its derivatives are constant along the vertical slice
    // coordinates (zoo metrics are invariant under vertical translations),
    // so shooting results are cached per horizontal footprint.
    std::vector<int> horizontal_axes;
    for (int i = 0; i < d; ++i) {
        if (std::find(leaf.vertical_coords.begin(), leaf.vertical_coords.end(),
                      i) == leaf.vertical_coords.end())
            horizontal_axes.push_back(i);
    }
    struct RData {
        VectorXd grad_r;
        double delta_h_r;
        double r;
    };
    std::map<long long, RData> cache;
    auto footprint = [&](const std::vector<int>& idx) {
        long long key = 0;
        for (int axis : horizontal_axes) key = key * 4096 + idx[axis];
        return key;
    };

    double lhs = 0.0, rhs = 0.0, mass = 0.0, henergy = 0.0;
    double min_r_seen = std::numeric_limits<double>::infinity();
    MetricDerivs md;
    FrameDerivs fd;
    for_each_node(grid, [&](const VectorXd& x, double w,
                            const std::vector<int>& idx) {
        const double fv = f.value(x);
        if (fv == 0.0) return;
        chart.metric(x, 0, md);
        chart.vertical_frame(x, 0, fd);
        const double dens = std::sqrt(md.g.determinant());
        const VectorXd df = f.gradient(x);
        const VectorXd grad = md.g.ldlt().solve(df);
        const MatrixXd gram = fd.Z.transpose() * md.g * fd.Z;
        const VectorXd c = gram.ldlt().solve(fd.Z.transpose() * (md.g * grad));
        const VectorXd grad_h = grad - fd.Z * c;

        const long long key = footprint(idx);
        auto it = cache.find(key);
        if (it == cache.end()) {
            const LaplacianValue lv = laplacian_r(chart, leaf, x, opt);
            const DistanceHessian dh(chart, leaf, x, opt);
            RData rd;
            rd.grad_r = dh.shooting().path.velocity(dh.rho());
            rd.delta_h_r = lv.delta_h_r;
            rd.r = lv.r;
            it = cache.emplace(key, std::move(rd)).first;
        }
        const RData& rd = it->second;
        min_r_seen = std::min(min_r_seen, rd.r);

        mass += w * dens * fv * fv;
        henergy += w * dens * grad_h.dot(md.g * grad_h);
        // grad_H f^2 = 2 f grad_H f
        lhs += -w * dens * 2.0 * fv * grad_h.dot(md.g * rd.grad_r);
        rhs += w * dens * fv * fv * rd.delta_h_r;
    });

    PoincareProofCheck out;
    out.lhs = lhs;
    out.rhs = rhs;
    out.residual_rel = std::abs(lhs - rhs) / std::max(1e-300, std::abs(rhs));
    out.mass = mass;
    out.horizontal_energy = henergy;
    out.cauchy_schwarz_ok =
        lhs <= 2.0 * std::sqrt(mass) * std::sqrt(henergy) + 1e-10;
    out.pointwise_bound_ok =
        rhs >= (n - 1) * std::sqrt(std::max(0.0, K)) * mass - 1e-10;
    return out;
}

// ---------------------------------------------------------------------------
// Radial Dirichlet eigenvalue

double tridiagonal_smallest_eigenvalue(const std::vector<double>& a,
                                       const std::vector<double>& b) {
    const int n = static_cast<int>(a.size());
    if (n == 0) throw EigensolveFailure("empty tridiagonal matrix");
    // Gershgorin bounds
    double lo = a[0], hi = a[0];
    for (int i = 0; i < n; ++i) {
        double radius = 0.0;
        if (i > 0) radius += std::abs(b[i - 1]);
        if (i < n - 1) radius += std::abs(b[i]);
        lo = std::min(lo, a[i] - radius);
        hi = std::max(hi, a[i] + radius);
    }
    // Sturm count: number of eigenvalues below x.
    const auto count_below = [&](double x) {
        int count = 0;
        double q = a[0] - x;
        if (q < 0.0) ++count;
        for (int i = 1; i < n; ++i) {
            const double denom =
                (std::abs(q) < 1e-300) ? std::copysign(1e-300, q == 0.0 ? -1.0 : q)
                                       : q;
            q = a[i] - x - b[i - 1] * b[i - 1] / denom;
            if (q < 0.0) ++count;
        }
        return count;
    };
    for (int iter = 0; iter < 200 && hi - lo > 1e-10 * std::max(1.0, std::abs(hi));
         ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

SpectrumResult radial_dirichlet_eigenvalue(int d_horizontal, double K,
                                           double R, int grid_n) {
    if (!(R > 0.0)) throw BadParameters("radial eigenvalue needs R > 0");
    if (grid_n < 100) throw BadParameters("radial eigenvalue needs grid_n >= 100");
    if (d_horizontal < 2)
        throw BadParameters("radial eigenvalue needs d_horizontal >= 2");
    if (K < 0.0) throw BadParameters("radial eigenvalue needs K >= 0");

    const int N = grid_n;
    const double h = R / N;
    const auto weight = [&](double r) {
        if (K > 0.0) return std::pow(std::sinh(std::sqrt(K) * r), d_horizontal - 1);
        return std::pow(r, d_horizontal - 1);
    };

    // Flux discretization on nodes r_i = (i + 1/2) h against the weight; the
    // weight vanishes at r = 0, so the inner boundary is natural. Dirichlet
    // at r = R through the ghost-node midpoint condition.
    std::vector<double> diag(N), off(std::max(0, N - 1));
    for (int i = 0; i < N; ++i) {
        const double ri = (i + 0.5) * h;
        const double wi = weight(ri);
        const double w_left = weight(i * h);
        const double w_right = weight((i + 1) * h);
        double dval = (w_left + w_right) / (h * h * wi);
        if (i == N - 1) dval = (w_left + 2.0 * w_right) / (h * h * wi);
        diag[i] = dval;
        if (i + 1 < N) {
            const double wj = weight((i + 1.5) * h);
            off[i] = -w_right / (h * h * std::sqrt(wi * wj));
        }
    }
    SpectrumResult res;
    res.d_horizontal = d_horizontal;
    res.K = K;
    res.R = R;
    res.grid = grid_n;
    res.lambda = tridiagonal_smallest_eigenvalue(diag, off);
    res.bound = (d_horizontal - 1) * (d_horizontal - 1) * K / 4.0;
    res.gap = res.lambda - res.bound;
    return res;
}

double mckean_bound(int d_total, int d_vertical, double K) {
    if (d_total <= d_vertical + 1)
        throw BadDimensions("McKean bound needs d_total > d_vertical + 1");
    if (K < 0.0) throw BadDimensions("McKean bound needs K >= 0");
    const double k = d_total - d_vertical - 1;
    return 0.25 * k * k * K;
}

}  // namespace folia
