#include "folia/chart.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

namespace folia {

void MetricDerivs::resize(int d) {
    g.resize(d, d);
    dg.assign(d, MatrixXd::Zero(d, d));
    d2g.assign(d, std::vector<MatrixXd>(d, MatrixXd::Zero(d, d)));
}

void FrameDerivs::resize(int d, int m) {
    Z.resize(d, m);
    dZ.assign(d, MatrixXd::Zero(d, m));
    d2Z.assign(d, std::vector<MatrixXd>(d, MatrixXd::Zero(d, m)));
}

namespace {

// Oracles fill only their nonzero entries; clear reused buffers first.
void zero_metric(MetricDerivs& out, int order) {
    out.g.setZero();
    if (order >= 1)
        for (auto& m : out.dg) m.setZero();
    if (order >= 2)
        for (auto& row : out.d2g)
            for (auto& m : row) m.setZero();
}

void zero_frame(FrameDerivs& out, int order) {
    out.Z.setZero();
    if (order >= 1)
        for (auto& m : out.dZ) m.setZero();
    if (order >= 2)
        for (auto& row : out.d2Z)
            for (auto& m : row) m.setZero();
}

}  // namespace

FoliatedChart::FoliatedChart(ChartDef def) : def_(std::move(def)) {
    if (def_.dim_vertical < 1 || def_.dim_total - def_.dim_vertical < 1)
        throw BadDimensions("chart needs dim_horizontal >= 1 and dim_vertical >= 1");
    if (def_.domain.dim() != def_.dim_total)
        throw BadDimensions("domain box dimension mismatch");
}

namespace {

// Centered finite differences of the value oracle; O(step^2).
void fd_metric(const MetricFn& raw, const VectorXd& x, double h, int order,
               MetricDerivs& out) {
    const int d = static_cast<int>(x.size());
    auto fn = [&raw, d](const VectorXd& xx, int, MetricDerivs& o) {
        if (o.g.rows() != d) o.resize(d);
        o.g.setZero();
        raw(xx, 0, o);
    };
    fn(x, 0, out);
    MetricDerivs plus, minus, pp, pm, mp, mm;
    if (order >= 1) {
        for (int k = 0; k < d; ++k) {
            VectorXd xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            fn(xp, 0, plus);
            fn(xm, 0, minus);
            out.dg[k] = (plus.g - minus.g) / (2.0 * h);
        }
    }
    if (order >= 2) {
        for (int k = 0; k < d; ++k) {
            for (int l = 0; l <= k; ++l) {
                MatrixXd v;
                if (k == l) {
                    VectorXd xp = x, xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    fn(xp, 0, plus);
                    fn(xm, 0, minus);
                    MetricDerivs mid;
                    fn(x, 0, mid);
                    v = (plus.g - 2.0 * mid.g + minus.g) / (h * h);
                } else {
                    VectorXd a = x, b = x, c = x, e = x;
                    a[k] += h; a[l] += h;
                    b[k] += h; b[l] -= h;
                    c[k] -= h; c[l] += h;
                    e[k] -= h; e[l] -= h;
                    fn(a, 0, pp);
                    fn(b, 0, pm);
                    fn(c, 0, mp);
                    fn(e, 0, mm);
                    v = (pp.g - pm.g - mp.g + mm.g) / (4.0 * h * h);
                }
                out.d2g[k][l] = v;
                out.d2g[l][k] = v;
            }
        }
    }
}

void fd_frame(const FrameFn& raw, const VectorXd& x, double h, int order,
              FrameDerivs& out) {
    const int d = static_cast<int>(x.size());
    const int m = static_cast<int>(out.Z.cols());
    auto fn = [&raw, d, m](const VectorXd& xx, int, FrameDerivs& o) {
        if (o.Z.rows() != d || o.Z.cols() != m) o.resize(d, m);
        o.Z.setZero();
        raw(xx, 0, o);
    };
    fn(x, 0, out);
    FrameDerivs plus, minus, pp, pm, mp, mm;
    if (order >= 1) {
        for (int k = 0; k < d; ++k) {
            VectorXd xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            fn(xp, 0, plus);
            fn(xm, 0, minus);
            out.dZ[k] = (plus.Z - minus.Z) / (2.0 * h);
        }
    }
    if (order >= 2) {
        for (int k = 0; k < d; ++k) {
            for (int l = 0; l <= k; ++l) {
                MatrixXd v;
                if (k == l) {
                    VectorXd xp = x, xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    fn(xp, 0, plus);
                    fn(xm, 0, minus);
                    FrameDerivs mid;
                    fn(x, 0, mid);
                    v = (plus.Z - 2.0 * mid.Z + minus.Z) / (h * h);
                } else {
                    VectorXd a = x, b = x, c = x, e = x;
                    a[k] += h; a[l] += h;
                    b[k] += h; b[l] -= h;
                    c[k] -= h; c[l] += h;
                    e[k] -= h; e[l] -= h;
                    fn(a, 0, pp);
                    fn(b, 0, pm);
                    fn(c, 0, mp);
                    fn(e, 0, mm);
                    v = (pp.Z - pm.Z - mp.Z + mm.Z) / (4.0 * h * h);
                }
                out.d2Z[k][l] = v;
                out.d2Z[l][k] = v;
            }
        }
    }
}

}  // namespace

void FoliatedChart::metric(const VectorXd& x, int order, MetricDerivs& out) const {
    if (out.g.rows() != dim()) out.resize(dim());
    zero_metric(out, order);
    if (def_.mode == DerivativeMode::analytic || order == 0) {
        def_.metric(x, order, out);
    } else {
        fd_metric(def_.metric, x, def_.fd_step, order, out);
    }
}

void FoliatedChart::vertical_frame(const VectorXd& x, int order,
                                   FrameDerivs& out) const {
    if (out.Z.rows() != dim() || out.Z.cols() != vdim()) out.resize(dim(), vdim());
    zero_frame(out, order);
    if (def_.mode == DerivativeMode::analytic || order == 0) {
        def_.vertical_frame(x, order, out);
    } else {
        fd_frame(def_.vertical_frame, x, def_.fd_step, order, out);
    }
}

MatrixXd FoliatedChart::metric_at(const VectorXd& x) const {
    MetricDerivs md;
    md.resize(dim());
    metric(x, 0, md);
    return md.g;
}

double FoliatedChart::inner(const VectorXd& x, const VectorXd& u,
                            const VectorXd& w) const {
    return u.dot(metric_at(x) * w);
}

double FoliatedChart::norm(const VectorXd& x, const VectorXd& u) const {
    return std::sqrt(std::max(0.0, inner(x, u, u)));
}

void FoliatedChart::require_interior(const VectorXd& x, double margin) const {
    if (!def_.domain.interior(x, margin)) {
        std::ostringstream os;
        os << "point outside chart interior: [";
        for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
        os << "]";
        throw OutsideDomain(os.str());
    }
}

void FoliatedChart::check_positive_definite(const VectorXd& /*x*/,
                                            const MatrixXd& g,
                                            double floor) const {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= floor) {
        throw DegenerateMetric("metric not positive definite (eigenvalue floor)");
    }
}

}  // namespace folia
