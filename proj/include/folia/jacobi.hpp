// folia: F-Jacobi fields along horizontal geodesics, the differential of the
// normal exponential map, focal detection, and the Hessian of the distance
// to a leaf.
//
// The first-order system integrated along gamma (with W = nabla_gd V_H):
//     nabla_gd V_V = -Tor(V, gd)
//     nabla_gd V_H = W
//     nabla_gd W   = -R(V_H, gd) gd
// A nabla-parallel adapted frame is co-integrated so field components are
// reported in it; the connection/torsion/curvature actions along gamma are
// tabulated on a grid (step <= 0.01 for final runs) and interpolated.
#pragma once

#include <vector>

#include "folia/connection.hpp"
#include "folia/geodesic.hpp"

namespace folia {

// Matrix coefficients along a geodesic, Hermite-interpolated between nodes.
// B = nabla-action of gd on coordinates, T = Tor(., gd), A = R(P_H ., gd) gd.
class CoefficientTable {
public:
    CoefficientTable() = default;
    CoefficientTable(const FoliatedChart& chart, const GeodesicPath& path,
                     double step);

    void eval(double t, MatrixXd& B, MatrixXd& T, MatrixXd& A) const;
    double step() const { return h_; }

private:
    double t0_ = 0.0, h_ = 0.0;
    int n_ = 0, d_ = 0;
    std::vector<MatrixXd> B_, T_, A_;     // node values
    std::vector<MatrixXd> dB_, dT_, dA_;  // node tangents (4th-order FD)
    void interp(const std::vector<MatrixXd>& v, const std::vector<MatrixXd>& dv,
                double t, MatrixXd& out) const;
};

struct JacobiInitial {
    VectorXd V0;  // full initial value (coordinates)
    VectorXd W0;  // initial nabla_gd V_H (horizontal, coordinates)
};

// A batch of fields propagated in one solve, sharing the parallel frame.
class JacobiBatch {
public:
    const GeodesicPath* path = nullptr;
    int d = 0, count = 0;
    OdeSolution sol;  // state: [frame (d*d) | per field (V, W) (2d each)]

    MatrixXd frame(double t) const;  // parallel adapted frame columns
    void field(double t, int i, VectorXd& V, VectorXd& W) const;  // coordinates

    // Components in the parallel frame: x = F^T g v.
    VectorXd components(double t, const VectorXd& v) const;
};

// h_max caps the integrator step so dense-output sampling error stays below
// the linearity tolerance even for exponentially growing fields; the Newton
// Jacobian path relaxes it.
JacobiBatch propagate_jacobi(const FoliatedChart& chart,
                             const GeodesicPath& path,
                             const std::vector<JacobiInitial>& initial,
                             double table_step = 0.01, double ode_tol = 1e-11,
                             double h_max = 0.02);

// Single-field view with parallel-frame components, per the JacobiField
// record: samples of (t, V_V comps, V_H comps, W comps).
struct JacobiSample {
    double t;
    VectorXd v_vertical;
    VectorXd v_horizontal;
    VectorXd w;
};

struct JacobiField {
    JacobiBatch batch;  // batch of one
    JacobiInitial initial;

    JacobiSample at(double t) const;
    std::vector<JacobiSample> samples(double step) const;
};

JacobiField integrate_jacobi(const FoliatedChart& chart,
                             const GeodesicPath& path, const SplitVector& V0,
                             const VectorXd& W0, double table_step = 0.01,
                             double ode_tol = 1e-11);

// d exp_xi(v) = V(1) for xi = (y, u) in the normal bundle and
// v = (v_V, v_H); initial data V(0) = v_V, nabla_gd V(0) = v_H + Tor(u, v_V).
SplitVector exp_differential(const FoliatedChart& chart, const VectorXd& y,
                             const VectorXd& u, const VectorXd& v_vertical,
                             const VectorXd& v_horizontal);

// ---------------------------------------------------------------------------
// Focal detection

struct FocalCandidate {
    double t;
    double sigma_min;
    bool confirmed;
};

struct FocalReport {
    double t_max = 0.0;
    double grid_step = 0.0;
    std::vector<FocalCandidate> candidates;
    std::vector<double> scan_t;
    std::vector<double> scan_sigma;
    bool empty() const { return candidates.empty(); }
};

// Scans the (m + n - 1)-dimensional space of fields with V_H(0) = 0
// (tangential direction excluded). Candidates come from sign changes of the
// focal determinant in the orthogonal complement of gd, refined by bisection
// to 1e-4 in t; sigma_min of the focal matrix is reported per candidate.
FocalReport detect_focal(const FoliatedChart& chart, const GeodesicPath& path,
                         double t_max, double grid_step);

// ---------------------------------------------------------------------------
// Hessian of the distance to a leaf

// Boundary-value machinery for one target: basis fields with V_H(0) = 0
// along the minimizing geodesic from the leaf, and the end-time solve.
class DistanceHessian {
public:
    DistanceHessian(const FoliatedChart& chart, const LeafPatch& leaf,
                    const VectorXd& target, const ShootingOptions& opt = {});
    DistanceHessian(const FoliatedChart& chart, ShootingResult shot,
                    double table_step = 0.01, double ode_tol = 1e-11);

    const ShootingResult& shooting() const { return shot_; }
    double rho() const { return shot_.rho; }

    // Hess^nabla(r)(X, X) at the target: radial and vertical parts
    // contribute zero, the orthogonal horizontal part goes through the BVP
    // field with V_H(0) = 0, V(rho) = X_perp.
    double quadratic_form(const VectorXd& X) const;

    // kappa(t) = <V_H, nabla_gd V_H> / |V_H|^2 for the BVP field hitting
    // X_end at rho.
    double riccati_ratio(const VectorXd& X_end, double t) const;

    // BVP field solved against X_end (component space of the basis).
    VectorXd bvp_coefficients(const VectorXd& X_end) const;
    void bvp_field(const VectorXd& coeffs, double t, VectorXd& V,
                   VectorXd& W) const;

    const JacobiBatch& basis() const { return basis_; }
    const FoliatedChart& chart() const { return *chart_; }

private:
    const FoliatedChart* chart_;
    ShootingResult shot_;
    JacobiBatch basis_;
    MatrixXd end_matrix_;  // components of basis fields at rho (perp of gd)
    Eigen::ColPivHouseholderQR<MatrixXd> end_solver_;
    MatrixXd frame_rho_;   // parallel frame at rho
    VectorXd gd_rho_;

    VectorXd perp_components(const VectorXd& X) const;
};

double hessian_distance(const FoliatedChart& chart, const LeafPatch& leaf,
                        const VectorXd& target, const VectorXd& X,
                        const ShootingOptions& opt = {});

}  // namespace folia
