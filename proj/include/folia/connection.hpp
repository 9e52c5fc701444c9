// folia: the Levi-Civita connection D, the tensor C, the adapted connection
// nabla (metric, H/V-parallel, with torsion), the J-map, and the curvature
// tensors of both connections.
//
// Coordinate connection coefficients are assembled once per point from the
// oracle data; curvature comes from jet-valued coefficients, so all
// derivatives are exact given analytic oracles.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "folia/chart.hpp"
#include "folia/jet.hpp"
#include "folia/types.hpp"

namespace folia {

// Value-level geometry at a point. gamma[i](k,j) = Gamma^k_{ij} (Levi-Civita),
// nabla[i](k,j) = N^k_{ij} (adapted connection on coordinate fields).
struct PointGeometry {
    VectorXd x;
    MatrixXd g, g_inv;
    std::vector<MatrixXd> dg;
    MatrixXd Z;
    MatrixXd P_V, P_H;
    std::vector<MatrixXd> gamma;
    std::vector<MatrixXd> nabla;
};

PointGeometry point_geometry(const FoliatedChart& chart, const VectorXd& x);

// Curvature tensors: R[i][j] has columns R(e_i, e_j) e_k, i.e.
// R[i][j](l,k) = R^l_{ijk}. Both the adapted connection and Levi-Civita
// versions are produced from one jet evaluation.
struct CurvatureTensors {
    int d = 0;
    std::vector<std::vector<MatrixXd>> R_nabla;
    std::vector<std::vector<MatrixXd>> R_lc;
};

CurvatureTensors curvature_tensors(const FoliatedChart& chart, const VectorXd& x);

// ---------------------------------------------------------------------------
// Pointwise operations

// D_X Y at p from Christoffel symbols; X, Y are field stencils.
VectorXd levi_civita(const FoliatedChart& chart, const VectorXd& p,
                     const FieldStencil& X, const FieldStencil& Y);

// nabla_X Y at p through the case formula (coordinate coefficients N).
VectorXd nabla(const FoliatedChart& chart, const VectorXd& p,
               const FieldStencil& X, const FieldStencil& Y);

// C_X Y: vertical-valued, <C_X Y, W> = (1/2)(L_{X_H} g)(Y_V, W_V).
SplitVector c_tensor(const FoliatedChart& chart, const VectorXd& p,
                     const VectorXd& X, const VectorXd& Y);

// Tor(X, Y) through the case formula; always vertical.
SplitVector torsion(const FoliatedChart& chart, const VectorXd& p,
                    const VectorXd& X, const VectorXd& Y);

// J_Z X, the skew endomorphism dual to Tor against the vertical part of Z.
SplitVector j_map(const FoliatedChart& chart, const VectorXd& p,
                  const VectorXd& Z, const VectorXd& X);

// R(X, Y) Z of the adapted connection.
SplitVector curvature_R(const FoliatedChart& chart, const VectorXd& p,
                        const VectorXd& X, const VectorXd& Y, const VectorXd& Z);

// <R(X,Y)Y, X> for an orthonormal horizontal pair (validated to 1e-8).
double transverse_sectional(const FoliatedChart& chart, const VectorXd& p,
                            const VectorXd& X, const VectorXd& Y);

// Levi-Civita sectional curvature of span(X, Y), orthonormal pair.
double lc_sectional(const FoliatedChart& chart, const VectorXd& p,
                    const VectorXd& X, const VectorXd& Y);

// <R(X,Y)Y,X> - K(X,Y) - (3/4)|Tor(X,Y)|^2 for an orthonormal horizontal
// pair; vanishes on bundle-like foliations (O'Neill).
double oneill_check(const FoliatedChart& chart, const VectorXd& p,
                    const VectorXd& X, const VectorXd& Y);

// Horizontal part of sum_a D_{F_a} F_a over an orthonormal vertical frame.
SplitVector mean_curvature(const FoliatedChart& chart, const VectorXd& p);

// ---------------------------------------------------------------------------
// Connection coefficients in the adapted frame.
// gamma_*(k, i, j) = <conn_{E_k} E_i, E_j>, stored as [k](i,j).

struct ConnectionCoefficients {
    VectorXd point;
    AdaptedFrame frame;
    std::vector<MatrixXd> gamma_lc;
    std::vector<MatrixXd> gamma_nabla;
    std::vector<MatrixXd> frame_derivatives;  // [k] = d_k (frame vectors)
};

ConnectionCoefficients connection_coefficients(const FoliatedChart& chart,
                                               const VectorXd& p);

struct CurvatureSample {
    VectorXd point;
    SplitVector X, Y, Z;
    SplitVector value;      // R(X,Y)Z
    double sectional_nabla = 0.0;
    double sectional_lc = 0.0;
    SplitVector torsion_xy;
};

CurvatureSample curvature_sample(const FoliatedChart& chart, const VectorXd& p,
                                 const VectorXd& X, const VectorXd& Y,
                                 const VectorXd& Z);

// ---------------------------------------------------------------------------
// Structure-identity battery

struct IdentityResidual {
    std::string name;
    VectorXd point;
    double residual = 0.0;
};

struct StructureReport {
    std::vector<IdentityResidual> rows;   // one row per (sample, identity)
    double max_residual = 0.0;
    bool pass = false;
    double tolerance = 0.0;

    double max_for(const std::string& name) const;
};

// Residuals over random samples and inputs of:
//  (a) nabla_X Y = D_X Y + Tor(X,Y)/2 - J_X Y/2 - J_Y X/2
//  (b) horizontal part of the cyclic curvature sum (first Bianchi)
//  (c) metric compatibility of nabla
//  (d) R(Y,X)X = 0 for vertical Y, horizontal X
// plus torsion verticality and J-map skew-symmetry.
StructureReport verify_structure_identities(const FoliatedChart& chart,
                                            const Box& sample_box,
                                            int sample_count, std::uint64_t seed,
                                            double tolerance = 1e-7);

}  // namespace folia
