#include "folia/jacobi.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "folia/metric_core.hpp"
#include "geometry_core.hpp"

namespace folia {

namespace {

// Adapted orthonormal frame at p whose first horizontal vector points along
// dir; remaining horizontal vectors complete by Gram-Schmidt over the
// projected coordinate basis. Columns: [dir^, H_2..H_n, F_1..F_m].
MatrixXd frame_along(const FoliatedChart& chart, const VectorXd& p,
                     const VectorXd& dir) {
    const int d = chart.dim();
    const int m = chart.vdim();
    const int n = chart.hdim();
    const MatrixXd g = chart.metric_at(p);
    const AdaptedFrame base = adapted_frame(chart, p);

    MatrixXd out(d, d);
    // vertical block unchanged
    for (int a = 0; a < m; ++a) out.col(n + a) = base.vertical(a);
    const SplitVector sd = project(chart, p, dir);
    VectorXd h1 = sd.h_part;
    const double nrm = std::sqrt(h1.dot(g * h1));
    if (nrm < 1e-12)
        throw NotHorizontal("frame direction has no horizontal part");
    h1 /= nrm;
    out.col(0) = h1;
    int filled = 1;
    for (int i = 0; i < n && filled < n; ++i) {
        VectorXd v = base.horizontal(i);
        for (int c = 0; c < filled; ++c)
            v -= (out.col(c).dot(g * v)) * out.col(c);
        for (int a = 0; a < m; ++a)
            v -= (out.col(n + a).dot(g * v)) * out.col(n + a);
        const double vn = std::sqrt(std::max(0.0, v.dot(g * v)));
        if (vn < 1e-8) continue;
        out.col(filled++) = v / vn;
    }
    if (filled != n) throw DegenerateMetric("could not complete frame along direction");
    return out;
}

}  // namespace

CoefficientTable::CoefficientTable(const FoliatedChart& chart,
                                   const GeodesicPath& path, double step) {
    const int d = chart.dim();
    d_ = d;
    t0_ = 0.0;
    const double T = path.t_end;
    n_ = std::max(2, static_cast<int>(std::ceil(T / step)) + 1);
    h_ = T / (n_ - 1);

    B_.resize(n_);
    T_.resize(n_);
    A_.resize(n_);
    MetricDerivs md;
    FrameDerivs fd;
    VectorXd pos, vel;
    for (int i = 0; i < n_; ++i) {
        const double t = t0_ + i * h_;
        path.state(t, pos, vel);
        chart.metric(pos, 2, md);
        chart.vertical_frame(pos, 2, fd);
        const auto jets = detail::inputs_jets(md, fd);
        const auto der = detail::derive_geometry(jets, /*with_nabla=*/true);

        MatrixXd N_val[8];
        for (int a = 0; a < d; ++a) {
            N_val[a].resize(d, d);
            for (int k = 0; k < d; ++k)
                for (int j = 0; j < d; ++j) N_val[a](k, j) = der.nabla[a](k, j).a;
        }
        MatrixXd B = MatrixXd::Zero(d, d);
        for (int a = 0; a < d; ++a)
            if (vel[a] != 0.0) B += vel[a] * N_val[a];
        // Tor(e_b, v)^k = (N^k_{b a} - N^k_{a b}) v^a
        MatrixXd T = MatrixXd::Zero(d, d);
        for (int b = 0; b < d; ++b)
            for (int k = 0; k < d; ++k) {
                double acc = 0.0;
                for (int a = 0; a < d; ++a)
                    acc += (N_val[b](k, a) - N_val[a](k, b)) * vel[a];
                T(k, b) = acc;
            }
        // A = R(P_H ., v) v
        const auto R = detail::curvature_from_jets(der.nabla, d);
        MatrixXd Rc = MatrixXd::Zero(d, d);  // Rc(l, i) = R^l_{ijk} v^j v^k
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (i == j) continue;
                const double vj = vel[j];
                if (vj == 0.0) continue;
                Rc.col(i) += vj * (R[i][j] * vel);
            }
        MatrixXd PH(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) PH(i, j) = der.P_H(i, j).a;
        B_[i] = B;
        T_[i] = T;
        A_[i] = Rc * PH;
    }

    // node tangents by 4th-order finite differences (lower order only when
    // the table is very short)
    auto tangents = [this](const std::vector<MatrixXd>& v) {
        std::vector<MatrixXd> dv(n_);
        const double h = h_;
        if (n_ < 5) {
            for (int i = 0; i < n_; ++i) {
                if (i == 0)
                    dv[i] = (v[1] - v[0]) / h;
                else if (i == n_ - 1)
                    dv[i] = (v[n_ - 1] - v[n_ - 2]) / h;
                else
                    dv[i] = (v[i + 1] - v[i - 1]) / (2 * h);
            }
            return dv;
        }
        for (int i = 0; i < n_; ++i) {
            if (i >= 2 && i <= n_ - 3) {
                dv[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) /
                        (12 * h);
            } else if (i == 0) {
                dv[i] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] +
                         16.0 * v[3] - 3.0 * v[4]) /
                        (12 * h);
            } else if (i == 1) {
                dv[i] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] +
                         v[4]) /
                        (12 * h);
            } else if (i == n_ - 2) {
                dv[i] = (3.0 * v[n_ - 1] + 10.0 * v[n_ - 2] - 18.0 * v[n_ - 3] +
                         6.0 * v[n_ - 4] - v[n_ - 5]) /
                        (12 * h);
            } else {
                dv[i] = (25.0 * v[n_ - 1] - 48.0 * v[n_ - 2] + 36.0 * v[n_ - 3] -
                         16.0 * v[n_ - 4] + 3.0 * v[n_ - 5]) /
                        (12 * h);
            }
        }
        return dv;
    };
    dB_ = tangents(B_);
    dT_ = tangents(T_);
    dA_ = tangents(A_);
}

void CoefficientTable::interp(const std::vector<MatrixXd>& v,
                              const std::vector<MatrixXd>& dv, double t,
                              MatrixXd& out) const {
    double s = (t - t0_) / h_;
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, n_ - 2);
    s -= i;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    out = h00 * v[i] + (h10 * h_) * dv[i] + h01 * v[i + 1] + (h11 * h_) * dv[i + 1];
}

void CoefficientTable::eval(double t, MatrixXd& B, MatrixXd& T,
                            MatrixXd& A) const {
    interp(B_, dB_, t, B);
    interp(T_, dT_, t, T);
    interp(A_, dA_, t, A);
}

// ---------------------------------------------------------------------------

MatrixXd JacobiBatch::frame(double t) const {
    const VectorXd y = sol.eval(t);
    MatrixXd F(d, d);
    for (int c = 0; c < d; ++c) F.col(c) = y.segment(c * d, d);
    return F;
}

void JacobiBatch::field(double t, int i, VectorXd& V, VectorXd& W) const {
    const VectorXd y = sol.eval(t);
    const int base = d * d + i * 2 * d;
    V = y.segment(base, d);
    W = y.segment(base + d, d);
}

VectorXd JacobiBatch::components(double t, const VectorXd& v) const {
    const MatrixXd g = path->chart->metric_at(path->position(t));
    return frame(t).transpose() * (g * v);
}

JacobiBatch propagate_jacobi(const FoliatedChart& chart,
                             const GeodesicPath& path,
                             const std::vector<JacobiInitial>& initial,
                             double table_step, double ode_tol, double h_max) {
    const int d = chart.dim();
    const int nf = static_cast<int>(initial.size());
    const CoefficientTable table(chart, path, table_step);

    JacobiBatch batch;
    batch.path = &path;
    batch.d = d;
    batch.count = nf;

    VectorXd y0(d * d + nf * 2 * d);
    const VectorXd p0 = path.position(0.0);
    const MatrixXd F0 = frame_along(chart, p0, path.velocity(0.0));
    for (int c = 0; c < d; ++c) y0.segment(c * d, d) = F0.col(c);
    for (int i = 0; i < nf; ++i) {
        y0.segment(d * d + i * 2 * d, d) = initial[i].V0;
        y0.segment(d * d + i * 2 * d + d, d) = initial[i].W0;
    }

    MatrixXd B(d, d), T(d, d), A(d, d);
    const auto rhs = [&](double t, const VectorXd& y, VectorXd& dy) {
        table.eval(t, B, T, A);
        dy.resize(y.size());
        for (int c = 0; c < d; ++c)
            dy.segment(c * d, d) = -B * y.segment(c * d, d);
        for (int i = 0; i < nf; ++i) {
            const int base = d * d + i * 2 * d;
            const auto V = y.segment(base, d);
            const auto W = y.segment(base + d, d);
            dy.segment(base, d) = -B * V - T * V + W;
            dy.segment(base + d, d) = -B * W - A * V;
        }
    };
    OdeOptions opt;
    opt.abs_tol = ode_tol;
    opt.rel_tol = ode_tol;
    opt.h_max = h_max;
    batch.sol = integrate_ode(rhs, y0, 0.0, path.t_end, opt);
    return batch;
}

JacobiSample JacobiField::at(double t) const {
    const FoliatedChart& chart = *batch.path->chart;
    const int n = chart.hdim();
    const int m = chart.vdim();
    VectorXd V, W;
    batch.field(t, 0, V, W);
    const VectorXd cv = batch.components(t, V);
    const VectorXd cw = batch.components(t, W);
    JacobiSample s;
    s.t = t;
    s.v_horizontal = cv.head(n);
    s.v_vertical = cv.tail(m);
    s.w = cw.head(n);
    return s;
}

std::vector<JacobiSample> JacobiField::samples(double step) const {
    std::vector<JacobiSample> out;
    const double T = batch.path->t_end;
    const int n = std::max(2, static_cast<int>(std::ceil(T / step)) + 1);
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(at(T * i / (n - 1)));
    return out;
}

JacobiField integrate_jacobi(const FoliatedChart& chart,
                             const GeodesicPath& path, const SplitVector& V0,
                             const VectorXd& W0, double table_step,
                             double ode_tol) {
    JacobiInitial init{V0.components, W0};
    JacobiField field;
    field.initial = init;
    field.batch = propagate_jacobi(chart, path, {init}, table_step, ode_tol);
    return field;
}

SplitVector exp_differential(const FoliatedChart& chart, const VectorXd& y,
                             const VectorXd& u, const VectorXd& v_vertical,
                             const VectorXd& v_horizontal) {
    const SplitVector su = project(chart, y, u);
    if (chart.norm(y, su.v_part) >= 1e-8)
        throw NotHorizontal("exp_differential needs (y, u) in the normal bundle");
    const GeodesicPath path = integrate_geodesic(chart, y, u, 1.0);
    const JacobiBatch batch =
        propagate_jacobi(chart, path, {{v_vertical, v_horizontal}});
    VectorXd V, W;
    batch.field(1.0, 0, V, W);
    return project(chart, path.position(1.0), V);
}

// ---------------------------------------------------------------------------

namespace {

// Basis of the scanned space: fields with V_H(0) = 0, the tangential
// direction excluded. m vertical starters plus n-1 horizontal ones.
std::vector<JacobiInitial> focal_basis(const FoliatedChart& chart,
                                       const GeodesicPath& path) {
    const int d = chart.dim();
    const int n = chart.hdim();
    const int m = chart.vdim();
    const VectorXd p0 = path.position(0.0);
    const MatrixXd F0 = frame_along(chart, p0, path.velocity(0.0));
    std::vector<JacobiInitial> basis;
    basis.reserve(m + n - 1);
    for (int a = 0; a < m; ++a)
        basis.push_back({F0.col(n + a), VectorXd::Zero(d)});
    for (int i = 1; i < n; ++i)
        basis.push_back({VectorXd::Zero(d), F0.col(i)});
    return basis;
}

// Components of all basis fields at time t, rows restricted to the
// complement of the tangent direction (row 0 of the parallel frame).
MatrixXd focal_matrix(const JacobiBatch& batch, double t) {
    const int d = batch.d;
    const int nb = batch.count;
    const MatrixXd g = batch.path->chart->metric_at(batch.path->position(t));
    const MatrixXd Ft = batch.frame(t);
    MatrixXd M(d - 1, nb);
    VectorXd V, W;
    for (int i = 0; i < nb; ++i) {
        batch.field(t, i, V, W);
        const VectorXd c = Ft.transpose() * (g * V);
        M.col(i) = c.tail(d - 1);
    }
    return M;
}

double focal_det(const JacobiBatch& batch, double t) {
    return focal_matrix(batch, t).determinant();
}

double focal_sigma_min(const JacobiBatch& batch, double t) {
    Eigen::JacobiSVD<MatrixXd> svd(focal_matrix(batch, t));
    return svd.singularValues().minCoeff();
}

}  // namespace

FocalReport detect_focal(const FoliatedChart& chart, const GeodesicPath& path,
                         double t_max, double grid_step) {
    FocalReport report;
    report.t_max = t_max;
    report.grid_step = grid_step;

    const auto basis = focal_basis(chart, path);
    const JacobiBatch batch = propagate_jacobi(chart, path, basis,
                                               std::min(grid_step, 0.01));

    const int steps = std::max(2, static_cast<int>(std::ceil(t_max / grid_step)));
    double sigma_ref = -1.0;
    double prev_det = 0.0, prev_t = 0.0;
    for (int j = 1; j <= steps; ++j) {
        const double t = t_max * j / steps;
        const double det = focal_det(batch, t);
        const double sigma = focal_sigma_min(batch, t);
        report.scan_t.push_back(t);
        report.scan_sigma.push_back(sigma);
        if (sigma_ref < 0.0) sigma_ref = sigma;  // first grid node sets scale
        const double threshold = 1e-6 * sigma_ref;

        const bool sign_change = (j > 1) && (det * prev_det < 0.0);
        const bool sigma_drop = sigma < threshold;
        if (sign_change || sigma_drop) {
            double lo = (j > 1) ? prev_t : 0.0, hi = t;
            if (sign_change) {
                double flo = prev_det;
                while (hi - lo > 1e-4) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = focal_det(batch, mid);
                    if (fm * flo <= 0.0) {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
            }
            const double tf = 0.5 * (lo + hi);
            report.candidates.push_back(
                {tf, focal_sigma_min(batch, tf), true});
        }
        prev_det = det;
        prev_t = t;
    }
    std::sort(report.candidates.begin(), report.candidates.end(),
              [](const FocalCandidate& a, const FocalCandidate& b) {
                  return a.t < b.t;
              });
    return report;
}

// ---------------------------------------------------------------------------

DistanceHessian::DistanceHessian(const FoliatedChart& chart,
                                 const LeafPatch& leaf, const VectorXd& target,
                                 const ShootingOptions& opt)
    : DistanceHessian(chart, invert_normal_exp(chart, leaf, target, opt)) {}

DistanceHessian::DistanceHessian(const FoliatedChart& chart,
                                 ShootingResult shot, double table_step,
                                 double ode_tol)
    : chart_(&chart), shot_(std::move(shot)) {
    if (shot_.rho <= 0.0)
        throw SingularBVP("distance Hessian needs a target off the leaf");
    basis_ = propagate_jacobi(chart, shot_.path, focal_basis(chart, shot_.path),
                              table_step, ode_tol);
    end_matrix_ = focal_matrix(basis_, shot_.rho);
    end_solver_.compute(end_matrix_);
    Eigen::JacobiSVD<MatrixXd> svd(end_matrix_);
    const auto& sv = svd.singularValues();
    if (sv.minCoeff() <= 1e-10 * sv.maxCoeff())
        throw SingularBVP("focal matrix numerically singular at rho");
    frame_rho_ = basis_.frame(shot_.rho);
    gd_rho_ = shot_.path.velocity(shot_.rho);
}

VectorXd DistanceHessian::perp_components(const VectorXd& X) const {
    const MatrixXd g = chart_->metric_at(shot_.path.position(shot_.rho));
    const VectorXd c = frame_rho_.transpose() * (g * X);
    return c.tail(chart_->dim() - 1);
}

VectorXd DistanceHessian::bvp_coefficients(const VectorXd& X_end) const {
    return end_solver_.solve(perp_components(X_end));
}

void DistanceHessian::bvp_field(const VectorXd& coeffs, double t, VectorXd& V,
                                VectorXd& W) const {
    const int d = chart_->dim();
    V = VectorXd::Zero(d);
    W = VectorXd::Zero(d);
    VectorXd Vi, Wi;
    for (int i = 0; i < basis_.count; ++i) {
        basis_.field(t, i, Vi, Wi);
        V += coeffs[i] * Vi;
        W += coeffs[i] * Wi;
    }
}

double DistanceHessian::quadratic_form(const VectorXd& X) const {
    const int n = chart_->hdim();
    const VectorXd pos = shot_.path.position(shot_.rho);
    const MatrixXd g = chart_->metric_at(pos);
    // split X into radial + perpendicular horizontal + vertical
    const VectorXd c = frame_rho_.transpose() * (g * X);
    VectorXd cperp = VectorXd::Zero(c.size());
    cperp.segment(1, n - 1) = c.segment(1, n - 1);
    if (cperp.norm() < 1e-14) return 0.0;
    VectorXd X_perp = VectorXd::Zero(chart_->dim());
    for (int i = 1; i < n; ++i) X_perp += c[i] * frame_rho_.col(i);

    const VectorXd coeffs = end_solver_.solve(cperp.tail(chart_->dim() - 1));
    VectorXd V, W;
    bvp_field(coeffs, shot_.rho, V, W);
    return X_perp.dot(g * W);
}

double DistanceHessian::riccati_ratio(const VectorXd& X_end, double t) const {
    const VectorXd coeffs = bvp_coefficients(X_end);
    VectorXd V, W;
    bvp_field(coeffs, t, V, W);
    const VectorXd pos = shot_.path.position(t);
    const SplitVector sv = project(*chart_, pos, V);
    const MatrixXd g = chart_->metric_at(pos);
    const double vh2 = sv.h_part.dot(g * sv.h_part);
    if (vh2 < 1e-14)
        throw DivisionNearZero("Riccati ratio undefined: |V_H|^2 below 1e-14");
    return sv.h_part.dot(g * W) / vh2;
}

double hessian_distance(const FoliatedChart& chart, const LeafPatch& leaf,
                        const VectorXd& target, const VectorXd& X,
                        const ShootingOptions& opt) {
    const DistanceHessian dh(chart, leaf, target, opt);
    return dh.quadratic_form(X);
}

}  // namespace folia
