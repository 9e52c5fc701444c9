// Internal: the connection pipeline templated over the scalar. Instantiated
// with double for values and with Jet for exact coordinate gradients (which
// feed the curvature assembly). Every derivative the formulas need is taken
// from explicit oracle data, never from the jet gradients themselves, so a
// single first-order jet pass yields first derivatives of the outputs.
#pragma once

#include <vector>

#include "folia/chart.hpp"
#include "folia/jet.hpp"

namespace folia::detail {

template <class S>
struct GeomInputs {
    int d = 0, m = 0;
    SMat<S> g;                // d x d
    std::vector<SMat<S>> dg;  // [k] -> d_k g
    SMat<S> Z;                // d x m
    std::vector<SMat<S>> dZ;  // [k] -> d_k Z
};

inline GeomInputs<double> inputs_values(const MetricDerivs& md,
                                        const FrameDerivs& fd) {
    GeomInputs<double> in;
    in.d = static_cast<int>(md.g.rows());
    in.m = static_cast<int>(fd.Z.cols());
    in.g = from_eigen(md.g);
    in.Z = from_eigen(fd.Z);
    in.dg.reserve(in.d);
    in.dZ.reserve(in.d);
    for (int k = 0; k < in.d; ++k) {
        in.dg.push_back(from_eigen(md.dg[k]));
        in.dZ.push_back(from_eigen(fd.dZ[k]));
    }
    return in;
}

// Jets seeded so that gradients are the oracle first/second partials.
inline GeomInputs<Jet> inputs_jets(const MetricDerivs& md,
                                   const FrameDerivs& fd) {
    const int d = static_cast<int>(md.g.rows());
    const int m = static_cast<int>(fd.Z.cols());
    GeomInputs<Jet> in;
    in.d = d;
    in.m = m;
    auto seed = [d](double v, auto&& grad_at) {
        Jet j(v);
        j.v.resize(d);
        for (int l = 0; l < d; ++l) j.v[l] = grad_at(l);
        return j;
    };
    in.g = SMat<Jet>(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            in.g(i, j) = seed(md.g(i, j),
                              [&](int l) { return md.dg[l](i, j); });
    in.Z = SMat<Jet>(d, m);
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < m; ++a)
            in.Z(i, a) = seed(fd.Z(i, a),
                              [&](int l) { return fd.dZ[l](i, a); });
    in.dg.resize(d);
    in.dZ.resize(d);
    for (int k = 0; k < d; ++k) {
        in.dg[k] = SMat<Jet>(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                in.dg[k](i, j) = seed(md.dg[k](i, j),
                                      [&](int l) { return md.d2g[k][l](i, j); });
        in.dZ[k] = SMat<Jet>(d, m);
        for (int i = 0; i < d; ++i)
            for (int a = 0; a < m; ++a)
                in.dZ[k](i, a) = seed(fd.dZ[k](i, a),
                                      [&](int l) { return fd.d2Z[k][l](i, a); });
    }
    return in;
}

template <class S>
struct GeomDerived {
    SMat<S> g_inv;
    SMat<S> gram, gram_inv;
    SMat<S> P_V, P_H;
    std::vector<SMat<S>> dP_V;   // [k]
    std::vector<SMat<S>> gamma;  // [i](k,j) = Gamma^k_{ij}
    std::vector<SMat<S>> nabla;  // [i](k,j) = N^k_{ij}
};

// (L_A g)(b,c) for a field A given by value/jacobian (jacA(k,b) = d_b A^k).
template <class S>
SMat<S> lie_derivative_metric(const GeomInputs<S>& in, const std::vector<S>& A,
                              const SMat<S>& jacA) {
    const int d = in.d;
    SMat<S> M(d, d);
    for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) {
            S acc{};
            for (int k = 0; k < d; ++k) {
                acc += A[k] * in.dg[k](b, c);
                acc += in.g(k, c) * jacA(k, b);
                acc += in.g(b, k) * jacA(k, c);
            }
            M(b, c) = acc;
        }
    return M;
}

template <class S>
GeomDerived<S> derive_geometry(const GeomInputs<S>& in, bool with_nabla) {
    const int d = in.d;
    GeomDerived<S> out;

    out.g_inv = inverse(in.g, "metric inverse");

    // Vertical projector P_V = Z gram^{-1} Z^T g and its partials.
    const SMat<S> Zt = in.Z.transpose();
    const SMat<S> ZtG = Zt * in.g;
    out.gram = ZtG * in.Z;
    {
        // Pivot failure here means the Z_a are dependent.
        try {
            out.gram_inv = inverse(out.gram, "vertical Gram");
        } catch (const DegenerateMetric&) {
            throw SingularVerticalFrame("vertical frame Gram matrix is singular");
        }
    }
    out.P_V = in.Z * out.gram_inv * ZtG;
    out.P_H = SMat<S>::identity(d) - out.P_V;

    out.dP_V.resize(d);
    for (int k = 0; k < d; ++k) {
        const SMat<S> dZt = in.dZ[k].transpose();
        SMat<S> dGram = dZt * in.g * in.Z + Zt * in.dg[k] * in.Z + ZtG * in.dZ[k];
        SMat<S> dGramInv = (out.gram_inv * dGram * out.gram_inv).scaled(S(-1.0));
        out.dP_V[k] = in.dZ[k] * out.gram_inv * ZtG +
                      in.Z * dGramInv * ZtG +
                      in.Z * out.gram_inv * (dZt * in.g + Zt * in.dg[k]);
    }

    // Christoffel symbols of g.
    out.gamma.assign(d, SMat<S>(d, d));
    const S half(0.5);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                S acc{};
                for (int l = 0; l < d; ++l)
                    acc += out.g_inv(k, l) *
                           (in.dg[i](l, j) + in.dg[j](l, i) - in.dg[l](i, j));
                out.gamma[i](k, j) = half * acc;
            }

    if (!with_nabla) return out;

    // Adapted-connection coefficients N^k_{ij} on coordinate fields, through
    // the case formula applied to the projected coordinate fields.
    std::vector<std::vector<S>> PVcol(d), PHcol(d);
    for (int j = 0; j < d; ++j) {
        PVcol[j] = out.P_V.col(j);
        PHcol[j] = out.P_H.col(j);
    }
    // dPV[a][j][k] = d_a (P_V)^k_j
    auto dPV = [&](int a, int j, int k) -> const S& { return out.dP_V[a](k, j); };

    out.nabla.assign(d, SMat<S>(d, d));
    std::vector<S> Dvec(d), br(d), tmp(d), Mv(d);
    for (int i = 0; i < d; ++i) {
        const auto& Xv = PVcol[i];
        const auto& Xh = PHcol[i];
        // (L_{X_H} g) for the field X_H = P_H e_i; jac(k,b) = -d_b (P_V)^k_i.
        SMat<S> jacXh(d, d);
        for (int k = 0; k < d; ++k)
            for (int b = 0; b < d; ++b) jacXh(k, b) = -dPV(b, i, k);
        const SMat<S> LXg = lie_derivative_metric(in, Xh, jacXh);

        for (int j = 0; j < d; ++j) {
            const auto& Yv = PVcol[j];
            const auto& Yh = PHcol[j];

            // (D_{X_H} Y_H)_H with dY_h[a]^k = -d_a (P_V)^k_j.
            for (int k = 0; k < d; ++k) {
                S acc{};
                for (int a = 0; a < d; ++a) {
                    S inner = -dPV(a, j, k);
                    for (int b = 0; b < d; ++b)
                        inner += out.gamma[a](k, b) * Yh[b];
                    acc += Xh[a] * inner;
                }
                Dvec[k] = acc;
            }
            std::vector<S> col = matvec(out.P_H, Dvec);

            // [X_V, Y_H]_H
            for (int k = 0; k < d; ++k) {
                S acc{};
                for (int a = 0; a < d; ++a)
                    acc += Xv[a] * (-dPV(a, j, k)) - Yh[a] * dPV(a, i, k);
                br[k] = acc;
            }
            tmp = matvec(out.P_H, br);
            for (int k = 0; k < d; ++k) col[k] += tmp[k];

            // [X_H, Y_V]_V
            for (int k = 0; k < d; ++k) {
                S acc{};
                for (int a = 0; a < d; ++a)
                    acc += Xh[a] * dPV(a, j, k) - Yv[a] * (-dPV(a, i, k));
                br[k] = acc;
            }
            tmp = matvec(out.P_V, br);
            for (int k = 0; k < d; ++k) col[k] += tmp[k];

            // C_{X_H} Y_V = (1/2) g^{-1} P_V^T (L_{X_H} g) Y_V
            Mv = matvec(LXg, Yv);
            tmp = matvec(out.P_V.transpose(), Mv);
            tmp = matvec(out.g_inv, tmp);
            for (int k = 0; k < d; ++k) col[k] += half * tmp[k];

            // (D_{X_V} Y_V)_V
            for (int k = 0; k < d; ++k) {
                S acc{};
                for (int a = 0; a < d; ++a) {
                    S inner = dPV(a, j, k);
                    for (int b = 0; b < d; ++b)
                        inner += out.gamma[a](k, b) * Yv[b];
                    acc += Xv[a] * inner;
                }
                Dvec[k] = acc;
            }
            tmp = matvec(out.P_V, Dvec);
            for (int k = 0; k < d; ++k) col[k] += tmp[k];

            for (int k = 0; k < d; ++k) out.nabla[i](k, j) = col[k];
        }
    }
    return out;
}

// Curvature components R^l_{ijk} (R(e_i,e_j)e_k = R^l_{ijk} e_l) from
// jet-valued connection coefficients coef[i](k,j).
// R^l_{ijk} = d_i C^l_{jk} - d_j C^l_{ik} + C^s_{jk} C^l_{is} - C^s_{ik} C^l_{js}.
inline std::vector<std::vector<MatrixXd>> curvature_from_jets(
    const std::vector<SMat<Jet>>& coef, int d) {
    std::vector<std::vector<MatrixXd>> R(
        d, std::vector<MatrixXd>(d, MatrixXd::Zero(d, d)));
    auto dcoef = [&](int a, int i, int l, int k) {
        const Jet& j = coef[i](l, k);
        return j.v.size() ? j.v[a] : 0.0;
    };
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (j == i) continue;
            MatrixXd& Rij = R[i][j];
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double acc = dcoef(i, j, l, k) - dcoef(j, i, l, k);
                    for (int s = 0; s < d; ++s)
                        acc += coef[j](s, k).a * coef[i](l, s).a -
                               coef[i](s, k).a * coef[j](l, s).a;
                    Rij(l, k) = acc;
                }
        }
    return R;
}

// Gram-Schmidt adapted frame: vertical oracle frame first, then coordinate
// basis vectors projected to H, in coordinate order. Returns d columns,
// horizontal block first. Throws SingularVerticalFrame / DegenerateMetric on
// rank loss.
template <class S>
SMat<S> adapted_frame_core(const GeomInputs<S>& in) {
    const int d = in.d;
    const int m = in.m;
    const int n = d - m;
    std::vector<std::vector<S>> vertical, horizontal;
    auto inner = [&](const std::vector<S>& u, const std::vector<S>& w) {
        S acc{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) acc += u[i] * in.g(i, j) * w[j];
        return acc;
    };
    for (int a = 0; a < m; ++a) {
        std::vector<S> v = in.Z.col(a);
        for (const auto& f : vertical) {
            const S c = inner(v, f);
            for (int i = 0; i < d; ++i) v[i] -= c * f[i];
        }
        const S n2 = inner(v, v);
        if (!(value(n2) > 1e-24))
            throw SingularVerticalFrame("vertical frame dependent at point");
        const S nrm = sqrt(n2);
        for (int i = 0; i < d; ++i) v[i] = v[i] / nrm;
        vertical.push_back(std::move(v));
    }
    for (int e = 0; e < d && static_cast<int>(horizontal.size()) < n; ++e) {
        std::vector<S> v(d, S{});
        v[e] = S(1.0);
        for (const auto& f : vertical) {
            const S c = inner(v, f);
            for (int i = 0; i < d; ++i) v[i] -= c * f[i];
        }
        for (const auto& f : horizontal) {
            const S c = inner(v, f);
            for (int i = 0; i < d; ++i) v[i] -= c * f[i];
        }
        const S n2 = inner(v, v);
        if (!(value(n2) > 1e-16)) continue;  // projected norm < 1e-8
        const S nrm = sqrt(n2);
        for (int i = 0; i < d; ++i) v[i] = v[i] / nrm;
        horizontal.push_back(std::move(v));
    }
    if (static_cast<int>(horizontal.size()) != n)
        throw DegenerateMetric("could not complete horizontal frame");
    SMat<S> frame(d, d);
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < d; ++i) frame(i, c) = horizontal[c][i];
    for (int a = 0; a < m; ++a)
        for (int i = 0; i < d; ++i) frame(i, n + a) = vertical[a][i];
    return frame;
}

}  // namespace folia::detail
