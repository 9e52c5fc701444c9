// folia: Laplacian of the distance to a leaf, the comparison inequality, the
// Poincare-type Rayleigh quotient checks, and the radial Dirichlet
// eigenvalue converging to the McKean bound.
#pragma once

#include <vector>

#include "folia/jacobi.hpp"

namespace folia {

struct LaplacianValue {
    double delta_r = 0.0;    // Laplace-Beltrami of r at the target
    double delta_h_r = 0.0;  // horizontal Laplacian
    double r = 0.0;
};

// delta_h_r = trace of Hess^nabla(r) over a horizontal orthonormal frame;
// delta_r subtracts <mean curvature, grad r> (vanishes on minimal leaves).
LaplacianValue laplacian_r(const FoliatedChart& chart, const LeafPatch& leaf,
                           const VectorXd& target,
                           const ShootingOptions& opt = {});

struct ComparisonRow {
    VectorXd target;
    double r = 0.0;
    double delta_r = 0.0;
    double delta_h_r = 0.0;
    double bound = 0.0;   // (d_H - 1) sqrt(K) coth(sqrt(K) r), or (d_H - 1)/r
    double margin = 0.0;  // delta_h_r - bound, sign preserved
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double min_margin = 0.0;
    double max_vertical_defect = 0.0;  // max |delta_r - delta_h_r|
    bool pass = false;
};

double comparison_bound(int d_horizontal, double K, double r);

// Samples off-leaf targets at radii in [r_min, r_max]; margins must stay
// above -1e-6 under the assumptions.
ComparisonReport check_laplacian_comparison(const FoliatedChart& chart,
                                            const LeafPatch& leaf, double K,
                                            int samples, std::uint64_t seed,
                                            double r_min = 0.1,
                                            double r_max = 5.0,
                                            const ShootingOptions& opt = {});

// ---------------------------------------------------------------------------
// Rayleigh quotients for compactly supported bumps

// f = amplitude * exp(-1/(1 - s^2)), s = |x - center| / radius (coordinate
// radius), extended by zero; C^2 with compact support.
struct BumpFunction {
    VectorXd center;
    double radius = 1.0;
    double amplitude = 1.0;

    double value(const VectorXd& x) const;
    VectorXd gradient(const VectorXd& x) const;  // coordinate partials
};

struct RayleighQuotient {
    double full = 0.0;        // int |grad f|^2 dm / int f^2 dm
    double horizontal = 0.0;  // int |grad_H f|^2 dm / int f^2 dm
    double mass = 0.0;        // int f^2 dm
};

struct QuadratureOptions {
    int nodes_per_axis = 64;
    bool check_resolution = true;   // compare against half resolution
    double resolution_tol = 1e-3;
};

RayleighQuotient rayleigh_quotient(const FoliatedChart& chart,
                                   const BumpFunction& f,
                                   const QuadratureOptions& opt = {});

// Numeric replication of the integration-by-parts step:
//   -int <grad_H f^2, grad_H r> dm  vs  int f^2 (Delta_H r) dm,
// plus the Cauchy-Schwarz chain. Shooting results are cached per horizontal
// footprint (r is leaf-constant, leaves are vertical slices).
struct PoincareProofCheck {
    double lhs = 0.0;             // -int <grad_H f^2, grad_H r> dm
    double rhs = 0.0;             // int f^2 Delta_H r dm
    double residual_rel = 0.0;    // |lhs - rhs| / |rhs|
    double mass = 0.0;            // int f^2 dm
    double horizontal_energy = 0.0;
    bool cauchy_schwarz_ok = false;
    bool pointwise_bound_ok = false;  // rhs >= (n-1) sqrt(K) * mass
};

PoincareProofCheck poincare_proof_check(const FoliatedChart& chart,
                                        const LeafPatch& leaf, double K,
                                        const BumpFunction& f,
                                        int nodes_per_axis = 32,
                                        const ShootingOptions& opt = {});

// ---------------------------------------------------------------------------
// Radial Dirichlet eigenvalue on (0, R)

struct SpectrumResult {
    std::string model_id;
    int d_horizontal = 0;
    double K = 0.0;
    double R = 0.0;
    int grid = 0;
    double lambda = 0.0;
    double bound = 0.0;  // McKean value
    double gap = 0.0;    // lambda - bound
};

// Smallest Dirichlet eigenvalue of -u'' - (d_H-1) sqrt(K) coth(sqrt(K) r) u'
// (or -u'' - (d_H-1)/r u' when K = 0) on (0, R), discretized in flux form
// against the weight sinh^{d_H-1}(sqrt(K) r) on a half-step-shifted grid and
// solved by Sturm bisection on the symmetric tridiagonal matrix.
SpectrumResult radial_dirichlet_eigenvalue(int d_horizontal, double K,
                                           double R, int grid_n);

// (d_total - d_vertical - 1)^2 K / 4.
double mckean_bound(int d_total, int d_vertical, double K);

// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm-sequence
// bisection (diag a, offdiag b), tolerance 1e-10.
double tridiagonal_smallest_eigenvalue(const std::vector<double>& a,
                                       const std::vector<double>& b);

}  // namespace folia
