#include "folia/metric_core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "geometry_core.hpp"

namespace folia {

SplitVector project(const FoliatedChart& chart, const VectorXd& p,
                    const VectorXd& u) {
    chart.require_interior(p);
    MetricDerivs md;
    FrameDerivs fd;
    chart.metric(p, 0, md);
    chart.vertical_frame(p, 0, fd);
    chart.check_positive_definite(p, md.g);

    const MatrixXd& Z = fd.Z;
    const MatrixXd gram = Z.transpose() * md.g * Z;
    Eigen::FullPivLU<MatrixXd> lu(gram);
    if (!lu.isInvertible())
        throw SingularVerticalFrame("vertical frame Gram matrix is singular");
    const VectorXd c = lu.solve(Z.transpose() * (md.g * u));

    SplitVector s;
    s.point = p;
    s.components = u;
    s.v_part = Z * c;
    s.h_part = u - s.v_part;
    return s;
}

AdaptedFrame adapted_frame(const FoliatedChart& chart, const VectorXd& p) {
    chart.require_interior(p);
    MetricDerivs md;
    FrameDerivs fd;
    chart.metric(p, 0, md);
    chart.vertical_frame(p, 0, fd);
    chart.check_positive_definite(p, md.g);

    detail::GeomInputs<double> in;
    in.d = chart.dim();
    in.m = chart.vdim();
    in.g = from_eigen(md.g);
    in.Z = from_eigen(fd.Z);
    const SMat<double> frame = detail::adapted_frame_core(in);

    AdaptedFrame out;
    out.point = p;
    out.vectors = to_eigen(frame);
    out.dim_horizontal = chart.hdim();
    out.dim_vertical = chart.vdim();
    return out;
}

double volume_density(const FoliatedChart& chart, const VectorXd& p) {
    chart.require_interior(p);
    const MatrixXd g = chart.metric_at(p);
    chart.check_positive_definite(p, g);
    return std::sqrt(g.determinant());
}

double lie_derivative_residual(const FoliatedChart& chart, const VectorXd& p,
                               const VectorXd& z_coeffs, const VectorXd& x) {
    MetricDerivs md;
    FrameDerivs fd;
    chart.metric(p, 1, md);
    chart.vertical_frame(p, 1, fd);
    const int d = chart.dim();
    const int m = chart.vdim();

    // Field Z = sum_a c_a Z_a with constant coefficients.
    VectorXd zval = fd.Z * z_coeffs;
    MatrixXd zjac = MatrixXd::Zero(d, d);  // zjac(k, b) = d_b Z^k
    for (int b = 0; b < d; ++b)
        for (int k = 0; k < d; ++k)
            for (int a = 0; a < m; ++a)
                zjac(k, b) += z_coeffs[a] * fd.dZ[b](k, a);

    double acc = 0.0;
    for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) {
            double t = 0.0;
            for (int k = 0; k < d; ++k) {
                t += zval[k] * md.dg[k](b, c);
                t += md.g(k, c) * zjac(k, b);
                t += md.g(b, k) * zjac(k, c);
            }
            acc += t * x[b] * x[c];
        }
    return std::abs(acc);
}

BundleLikeReport check_bundle_like(const FoliatedChart& chart,
                                   const std::vector<VectorXd>& sample_points,
                                   int directions_per_point, std::uint64_t seed,
                                   double tolerance) {
    BundleLikeReport report;
    report.tolerance = tolerance;
    Rng rng(seed);
    const int m = chart.vdim();
    for (const auto& p : sample_points) {
        chart.require_interior(p);
        double worst = 0.0;
        for (int k = 0; k < directions_per_point; ++k) {
            VectorXd zc = rng.vector(m);
            const VectorXd u = rng.vector(chart.dim());
            SplitVector su = project(chart, p, u);
            VectorXd x = su.h_part;
            const double xn = chart.norm(p, x);
            if (xn < 1e-12) continue;
            x /= xn;
            // normalize the vertical field at p
            FrameDerivs fd;
            chart.vertical_frame(p, 0, fd);
            const VectorXd zv = fd.Z * zc;
            const double zn = chart.norm(p, zv);
            if (zn < 1e-12) continue;
            zc /= zn;
            worst = std::max(worst, lie_derivative_residual(chart, p, zc, x));
        }
        report.samples.push_back({p, worst});
        report.max_residual = std::max(report.max_residual, worst);
    }
    report.pass = report.max_residual < tolerance;
    return report;
}

BundleLikeReport check_bundle_like(const FoliatedChart& chart, const Box& box,
                                   int sample_count, std::uint64_t seed,
                                   double tolerance) {
    Rng rng(seed ^ 0x517cc1b727220a95ULL);
    std::vector<VectorXd> pts;
    pts.reserve(sample_count);
    for (int i = 0; i < sample_count; ++i) pts.push_back(rng.point_in(box, 0.0));
    return check_bundle_like(chart, pts, 4, seed, tolerance);
}

}  // namespace folia
