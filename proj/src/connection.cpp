#include "folia/connection.hpp"

#include <algorithm>
#include <cmath>

#include "folia/metric_core.hpp"
#include "geometry_core.hpp"

namespace folia {

namespace {

detail::GeomInputs<double> load_values(const FoliatedChart& chart,
                                       const VectorXd& x) {
    MetricDerivs md;
    FrameDerivs fd;
    chart.metric(x, 1, md);
    chart.vertical_frame(x, 1, fd);
    return detail::inputs_values(md, fd);
}

detail::GeomInputs<Jet> load_jets(const FoliatedChart& chart, const VectorXd& x) {
    MetricDerivs md;
    FrameDerivs fd;
    chart.metric(x, 2, md);
    chart.vertical_frame(x, 2, fd);
    return detail::inputs_jets(md, fd);
}

MatrixXd jet_values(const SMat<Jet>& m) {
    MatrixXd out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).a;
    return out;
}

}  // namespace

PointGeometry point_geometry(const FoliatedChart& chart, const VectorXd& x) {
    const auto in = load_values(chart, x);
    const auto der = detail::derive_geometry(in, /*with_nabla=*/true);
    PointGeometry out;
    out.x = x;
    out.g = to_eigen(in.g);
    out.g_inv = to_eigen(der.g_inv);
    out.dg.reserve(in.d);
    for (int k = 0; k < in.d; ++k) out.dg.push_back(to_eigen(in.dg[k]));
    out.Z = to_eigen(in.Z);
    out.P_V = to_eigen(der.P_V);
    out.P_H = to_eigen(der.P_H);
    out.gamma.reserve(in.d);
    out.nabla.reserve(in.d);
    for (int i = 0; i < in.d; ++i) {
        out.gamma.push_back(to_eigen(der.gamma[i]));
        out.nabla.push_back(to_eigen(der.nabla[i]));
    }
    return out;
}

CurvatureTensors curvature_tensors(const FoliatedChart& chart,
                                   const VectorXd& x) {
    const auto in = load_jets(chart, x);
    const auto der = detail::derive_geometry(in, /*with_nabla=*/true);
    CurvatureTensors out;
    out.d = in.d;
    out.R_nabla = detail::curvature_from_jets(der.nabla, in.d);
    out.R_lc = detail::curvature_from_jets(der.gamma, in.d);
    return out;
}

// ---------------------------------------------------------------------------

VectorXd levi_civita(const FoliatedChart& chart, const VectorXd& p,
                     const FieldStencil& X, const FieldStencil& Y) {
    const auto in = load_values(chart, p);
    const auto der = detail::derive_geometry(in, /*with_nabla=*/false);
    const int d = in.d;
    VectorXd out = Y.jac * X.value;
    for (int a = 0; a < d; ++a)
        for (int k = 0; k < d; ++k)
            for (int b = 0; b < d; ++b)
                out[k] += X.value[a] * value(der.gamma[a](k, b)) * Y.value[b];
    return out;
}

VectorXd nabla(const FoliatedChart& chart, const VectorXd& p,
               const FieldStencil& X, const FieldStencil& Y) {
    const PointGeometry geom = point_geometry(chart, p);
    const int d = static_cast<int>(p.size());
    VectorXd out = Y.jac * X.value;
    for (int a = 0; a < d; ++a) out += X.value[a] * (geom.nabla[a] * Y.value);
    return out;
}

namespace {

struct FramePack {
    MatrixXd frame;                 // columns E_i
    std::vector<MatrixXd> dframe;   // [b] = d_b frame
};

FramePack frame_with_derivatives(const FoliatedChart& chart, const VectorXd& p) {
    MetricDerivs md;
    FrameDerivs fd;
    chart.metric(p, 1, md);
    chart.vertical_frame(p, 1, fd);
    // Second derivatives unused by the frame jets; zero blocks are fine.
    const int d = chart.dim();
    md.d2g.assign(d, std::vector<MatrixXd>(d, MatrixXd::Zero(d, d)));
    fd.d2Z.assign(d, std::vector<MatrixXd>(d, MatrixXd::Zero(d, chart.vdim())));
    const auto in = detail::inputs_jets(md, fd);
    const SMat<Jet> fr = detail::adapted_frame_core(in);
    FramePack out;
    out.frame = jet_values(fr);
    out.dframe.assign(d, MatrixXd::Zero(d, d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const Jet& e = fr(i, j);
            for (int b = 0; b < d && b < e.v.size(); ++b)
                out.dframe[b](i, j) = e.v[b];
        }
    return out;
}

// (1/2) g^{-1} P_V^T (L_{X_H} g) Y_V for a horizontal field stencil X_H.
VectorXd c_tensor_field(const detail::GeomInputs<double>& in,
                        const detail::GeomDerived<double>& der,
                        const FieldStencil& Xh, const VectorXd& Yv) {
    const SMat<double> LXg = detail::lie_derivative_metric(
        in, std::vector<double>(Xh.value.data(), Xh.value.data() + in.d),
        from_eigen(Xh.jac));
    const MatrixXd M = to_eigen(LXg);
    const MatrixXd PV = to_eigen(der.P_V);
    const MatrixXd ginv = to_eigen(der.g_inv);
    return 0.5 * (ginv * (PV.transpose() * (M * Yv)));
}

// Constant-coefficient frame extension of the horizontal part of a vector:
// X_H = sum_i c_i E_i over the horizontal frame block.
FieldStencil horizontal_extension(const FramePack& fp, int n,
                                  const VectorXd& coeffs) {
    const int d = static_cast<int>(fp.frame.rows());
    FieldStencil s;
    s.value = VectorXd::Zero(d);
    s.jac = MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        s.value += coeffs[i] * fp.frame.col(i);
        for (int b = 0; b < d; ++b) s.jac.col(b) += coeffs[i] * fp.dframe[b].col(i);
    }
    return s;
}

SplitVector make_split(const MatrixXd& P_V, const VectorXd& p,
                       const VectorXd& u) {
    SplitVector s;
    s.point = p;
    s.components = u;
    s.v_part = P_V * u;
    s.h_part = u - s.v_part;
    return s;
}

}  // namespace

SplitVector c_tensor(const FoliatedChart& chart, const VectorXd& p,
                     const VectorXd& X, const VectorXd& Y) {
    const auto in = load_values(chart, p);
    const auto der = detail::derive_geometry(in, /*with_nabla=*/false);
    const FramePack fp = frame_with_derivatives(chart, p);
    const int n = chart.hdim();
    const MatrixXd g = to_eigen(in.g);
    const VectorXd coeffs = fp.frame.transpose() * (g * X);  // frame components
    const FieldStencil Xh = horizontal_extension(fp, n, coeffs);
    const VectorXd Yv = to_eigen(der.P_V) * Y;
    const VectorXd c = c_tensor_field(in, der, Xh, Yv);
    return make_split(to_eigen(der.P_V), p, c);
}

SplitVector torsion(const FoliatedChart& chart, const VectorXd& p,
                    const VectorXd& X, const VectorXd& Y) {
    const auto in = load_values(chart, p);
    const auto der = detail::derive_geometry(in, /*with_nabla=*/false);
    const FramePack fp = frame_with_derivatives(chart, p);
    const int d = in.d;
    const int n = chart.hdim();
    const MatrixXd g = to_eigen(in.g);
    const MatrixXd PV = to_eigen(der.P_V);

    const VectorXd cx = fp.frame.transpose() * (g * X);
    const VectorXd cy = fp.frame.transpose() * (g * Y);
    const FieldStencil Xh = horizontal_extension(fp, n, cx);
    const FieldStencil Yh = horizontal_extension(fp, n, cy);
    const VectorXd Xv = PV * X;
    const VectorXd Yv = PV * Y;

    // -[X_H, Y_H]_V (tensorial through the frame extension)
    VectorXd bracket = VectorXd::Zero(d);
    for (int a = 0; a < d; ++a)
        bracket += Xh.value[a] * Yh.jac.col(a) - Yh.value[a] * Xh.jac.col(a);
    VectorXd tor = -(PV * bracket);
    // mixed parts through C
    tor += c_tensor_field(in, der, Xh, Yv);
    tor -= c_tensor_field(in, der, Yh, Xv);
    return make_split(PV, p, tor);
}

SplitVector j_map(const FoliatedChart& chart, const VectorXd& p,
                  const VectorXd& Z, const VectorXd& X) {
    const auto in = load_values(chart, p);
    const auto der = detail::derive_geometry(in, /*with_nabla=*/false);
    const MatrixXd g = to_eigen(in.g);
    const MatrixXd PV = to_eigen(der.P_V);
    const AdaptedFrame fr = adapted_frame(chart, p);
    const int d = in.d;
    const VectorXd Zv = PV * Z;

    // T(i,j) = <Z_V, Tor(E_i, E_j)>; J_Z E_i = sum_j T(i,j) E_j.
    MatrixXd T = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const SplitVector t =
                torsion(chart, p, fr.vectors.col(i), fr.vectors.col(j));
            const double v = Zv.dot(g * t.components);
            T(i, j) = v;
            T(j, i) = -v;
        }
    const VectorXd cx = fr.vectors.transpose() * (g * X);
    VectorXd out = VectorXd::Zero(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out += cx[i] * T(i, j) * fr.vectors.col(j);
    return make_split(PV, p, out);
}

SplitVector curvature_R(const FoliatedChart& chart, const VectorXd& p,
                        const VectorXd& X, const VectorXd& Y,
                        const VectorXd& Z) {
    const CurvatureTensors ct = curvature_tensors(chart, p);
    const int d = ct.d;
    VectorXd out = VectorXd::Zero(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            const double xy = X[i] * Y[j];
            if (xy == 0.0) continue;
            out += xy * (ct.R_nabla[i][j] * Z);
        }
    const PointGeometry geom = point_geometry(chart, p);
    return make_split(geom.P_V, p, out);
}

namespace {

void validate_orthonormal_horizontal(const FoliatedChart& chart,
                                     const VectorXd& p, const VectorXd& X,
                                     const VectorXd& Y) {
    const MatrixXd g = chart.metric_at(p);
    const SplitVector sx = project(chart, p, X);
    const SplitVector sy = project(chart, p, Y);
    const double tol = 1e-8;
    if (std::sqrt(sx.v_part.dot(g * sx.v_part)) > tol ||
        std::sqrt(sy.v_part.dot(g * sy.v_part)) > tol)
        throw NotHorizontal("sectional inputs must be horizontal");
    if (std::abs(X.dot(g * X) - 1.0) > tol || std::abs(Y.dot(g * Y) - 1.0) > tol ||
        std::abs(X.dot(g * Y)) > tol)
        throw NotOrthonormal("sectional inputs must be orthonormal");
}

}  // namespace

double transverse_sectional(const FoliatedChart& chart, const VectorXd& p,
                            const VectorXd& X, const VectorXd& Y) {
    validate_orthonormal_horizontal(chart, p, X, Y);
    const MatrixXd g = chart.metric_at(p);
    const SplitVector r = curvature_R(chart, p, X, Y, Y);
    return X.dot(g * r.components);
}

double lc_sectional(const FoliatedChart& chart, const VectorXd& p,
                    const VectorXd& X, const VectorXd& Y) {
    const CurvatureTensors ct = curvature_tensors(chart, p);
    const MatrixXd g = chart.metric_at(p);
    const int d = ct.d;
    VectorXd ryy = VectorXd::Zero(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            ryy += X[i] * Y[j] * (ct.R_lc[i][j] * Y);
        }
    const double gxx = X.dot(g * X), gyy = Y.dot(g * Y), gxy = X.dot(g * Y);
    return X.dot(g * ryy) / (gxx * gyy - gxy * gxy);
}

double oneill_check(const FoliatedChart& chart, const VectorXd& p,
                    const VectorXd& X, const VectorXd& Y) {
    validate_orthonormal_horizontal(chart, p, X, Y);
    const MatrixXd g = chart.metric_at(p);
    const double sect_nabla = transverse_sectional(chart, p, X, Y);
    const double sect_lc = lc_sectional(chart, p, X, Y);
    const SplitVector tor = torsion(chart, p, X, Y);
    const double tor2 = tor.components.dot(g * tor.components);
    return sect_nabla - sect_lc - 0.75 * tor2;
}

SplitVector mean_curvature(const FoliatedChart& chart, const VectorXd& p) {
    const FramePack fp = frame_with_derivatives(chart, p);
    const int d = chart.dim();
    const int n = chart.hdim();
    const int m = chart.vdim();
    VectorXd sum = VectorXd::Zero(d);
    for (int a = 0; a < m; ++a) {
        FieldStencil Fa;
        Fa.value = fp.frame.col(n + a);
        Fa.jac = MatrixXd::Zero(d, d);
        for (int b = 0; b < d; ++b) Fa.jac.col(b) = fp.dframe[b].col(n + a);
        sum += levi_civita(chart, p, Fa, Fa);
    }
    const PointGeometry geom = point_geometry(chart, p);
    SplitVector s = make_split(geom.P_V, p, sum);
    // Report the horizontal part as the mean curvature vector.
    SplitVector out;
    out.point = p;
    out.components = s.h_part;
    out.h_part = s.h_part;
    out.v_part = VectorXd::Zero(d);
    return out;
}

ConnectionCoefficients connection_coefficients(const FoliatedChart& chart,
                                               const VectorXd& p) {
    const PointGeometry geom = point_geometry(chart, p);
    const FramePack fp = frame_with_derivatives(chart, p);
    const int d = chart.dim();

    ConnectionCoefficients out;
    out.point = p;
    out.frame.point = p;
    out.frame.vectors = fp.frame;
    out.frame.dim_horizontal = chart.hdim();
    out.frame.dim_vertical = chart.vdim();
    out.frame_derivatives = fp.dframe;
    out.gamma_lc.assign(d, MatrixXd::Zero(d, d));
    out.gamma_nabla.assign(d, MatrixXd::Zero(d, d));

    for (int k = 0; k < d; ++k) {
        const VectorXd Ek = fp.frame.col(k);
        for (int i = 0; i < d; ++i) {
            // conn_{E_k} E_i in coordinates
            VectorXd dlc = VectorXd::Zero(d);
            VectorXd dnb = VectorXd::Zero(d);
            for (int a = 0; a < d; ++a) {
                dlc += Ek[a] * (fp.dframe[a].col(i) + geom.gamma[a] * fp.frame.col(i));
                dnb += Ek[a] * (fp.dframe[a].col(i) + geom.nabla[a] * fp.frame.col(i));
            }
            for (int j = 0; j < d; ++j) {
                out.gamma_lc[k](i, j) = fp.frame.col(j).dot(geom.g * dlc);
                out.gamma_nabla[k](i, j) = fp.frame.col(j).dot(geom.g * dnb);
            }
        }
    }
    return out;
}

CurvatureSample curvature_sample(const FoliatedChart& chart, const VectorXd& p,
                                 const VectorXd& X, const VectorXd& Y,
                                 const VectorXd& Z) {
    CurvatureSample s;
    s.point = p;
    s.X = project(chart, p, X);
    s.Y = project(chart, p, Y);
    s.Z = project(chart, p, Z);
    s.value = curvature_R(chart, p, X, Y, Z);
    s.torsion_xy = torsion(chart, p, X, Y);
    const MatrixXd g = chart.metric_at(p);
    const double gxx = X.dot(g * X), gyy = Y.dot(g * Y), gxy = X.dot(g * Y);
    const double denom = gxx * gyy - gxy * gxy;
    if (std::abs(denom) > 1e-14) {
        const SplitVector ryy = curvature_R(chart, p, X, Y, Y);
        s.sectional_nabla = X.dot(g * ryy.components) / denom;
        s.sectional_lc = lc_sectional(chart, p, X, Y);
    }
    return s;
}

// ---------------------------------------------------------------------------

double StructureReport::max_for(const std::string& name) const {
    double m = 0.0;
    for (const auto& r : rows)
        if (r.name == name) m = std::max(m, r.residual);
    return m;
}

StructureReport verify_structure_identities(const FoliatedChart& chart,
                                            const Box& sample_box,
                                            int sample_count, std::uint64_t seed,
                                            double tolerance) {
    StructureReport report;
    report.tolerance = tolerance;
    Rng rng(seed);
    const int d = chart.dim();

    for (int s = 0; s < sample_count; ++s) {
        const VectorXd p = rng.point_in(sample_box, 0.0);
        const MatrixXd g = chart.metric_at(p);
        const PointGeometry geom = point_geometry(chart, p);
        auto gnorm = [&](const VectorXd& v) { return std::sqrt(std::abs(v.dot(g * v))); };
        auto unit = [&](VectorXd v) {
            const double n = gnorm(v);
            return (n > 1e-12) ? VectorXd(v / n) : v;
        };

        const VectorXd X = unit(rng.vector(d));
        const VectorXd Y = unit(rng.vector(d));
        const VectorXd Zv = unit(rng.vector(d));

        // (a) relation between D and nabla
        {
            const FieldStencil Xs = FieldStencil::constant(X);
            const FieldStencil Ys = FieldStencil::constant(Y);
            const VectorXd lhs = nabla(chart, p, Xs, Ys);
            const VectorXd dxy = levi_civita(chart, p, Xs, Ys);
            const SplitVector tor = torsion(chart, p, X, Y);
            const SplitVector jxy = j_map(chart, p, X, Y);
            const SplitVector jyx = j_map(chart, p, Y, X);
            const VectorXd rhs = dxy + 0.5 * tor.components -
                                 0.5 * jxy.components - 0.5 * jyx.components;
            report.rows.push_back({"levi_civita_relation", p, gnorm(lhs - rhs)});
        }
        // (b) horizontal part of the first Bianchi sum
        {
            const SplitVector a = curvature_R(chart, p, X, Y, Zv);
            const SplitVector b = curvature_R(chart, p, Y, Zv, X);
            const SplitVector c = curvature_R(chart, p, Zv, X, Y);
            const VectorXd sum = a.h_part + b.h_part + c.h_part;
            report.rows.push_back({"bianchi_horizontal", p, gnorm(sum)});
        }
        // (c) metric compatibility of nabla against random linear fields
        {
            const MatrixXd Ay = MatrixXd::NullaryExpr(
                d, d, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
            const MatrixXd Az = MatrixXd::NullaryExpr(
                d, d, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1, 1); });
            const FieldStencil Ys = FieldStencil::linear(Y, Ay);
            const FieldStencil Zs = FieldStencil::linear(Zv, Az);
            double xg = 0.0;  // X applied to g(Y, Z)
            for (int k = 0; k < d; ++k) {
                double term = Y.dot(geom.dg[k] * Zv);
                term += (Ay.col(k)).dot(g * Zv);
                term += Y.dot(g * Az.col(k));
                xg += X[k] * term;
            }
            const VectorXd ny = nabla(chart, p, FieldStencil::constant(X), Ys);
            const VectorXd nz = nabla(chart, p, FieldStencil::constant(X), Zs);
            const double resid = xg - ny.dot(g * Zv) - Y.dot(g * nz);
            report.rows.push_back({"nabla_metric", p, std::abs(resid)});
        }
        // (d) R(Y, X) X = 0 for vertical Y, horizontal X
        {
            const VectorXd Xh = unit(geom.P_H * X);
            const VectorXd Yv = unit(geom.P_V * Y);
            const SplitVector r = curvature_R(chart, p, Yv, Xh, Xh);
            report.rows.push_back({"vertical_horizontal_flat", p,
                                   gnorm(r.components)});
        }
        // torsion verticality
        {
            const SplitVector tor = torsion(chart, p, X, Y);
            report.rows.push_back({"torsion_vertical", p, gnorm(tor.h_part)});
        }
        // J-map skew-symmetry
        {
            const SplitVector jx = j_map(chart, p, Zv, X);
            const SplitVector jy = j_map(chart, p, Zv, Y);
            const double skew = jx.components.dot(g * Y) + jy.components.dot(g * X);
            report.rows.push_back({"jmap_skew", p, std::abs(skew)});
        }
    }
    for (const auto& r : report.rows)
        report.max_residual = std::max(report.max_residual, r.residual);
    report.pass = report.max_residual < tolerance;
    return report;
}

}  // namespace folia
