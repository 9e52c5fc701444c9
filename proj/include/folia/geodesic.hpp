// folia: horizontal geodesics, the normal exponential map of a leaf, and its
// inversion by Newton shooting (distance to a leaf).
#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "folia/chart.hpp"
#include "folia/ode.hpp"
#include "folia/types.hpp"

namespace folia {

// A geodesic as a dense (position, velocity) trajectory.
class GeodesicPath {
public:
    const FoliatedChart* chart = nullptr;
    OdeSolution sol;  // state (x, v), 2d components
    double t_end = 0.0;
    double speed_drift = 0.0;     // max | |v|_g - |v(0)|_g | over nodes
    double vertical_drift = 0.0;  // max |v_V|_g over nodes
    double tolerance = 0.0;       // integrator tolerance used

    VectorXd position(double t) const;
    VectorXd velocity(double t) const;
    void state(double t, VectorXd& pos, VectorXd& vel) const;
    double initial_speed() const;
};

// Levi-Civita geodesic from (p, u) over [0, t_end]. Horizontal starts stay
// horizontal on bundle-like charts (checked by the drift diagnostics).
GeodesicPath integrate_geodesic(const FoliatedChart& chart, const VectorXd& p,
                                const VectorXd& u, double t_end,
                                double tol = 1e-10);

// Leaf patch: all zoo leaves are vertical coordinate slices through a seed.
struct LeafPatch {
    VectorXd seed;
    std::vector<int> vertical_coords;

    int rank() const { return static_cast<int>(vertical_coords.size()); }
    VectorXd point(const VectorXd& lambda) const;
    MatrixXd jacobian() const;                         // d x m, unit columns
    VectorXd lambda_of(const VectorXd& target) const;  // slice coordinates
};

// Endpoint of the unit-time geodesic from y with horizontal initial velocity
// u. Throws NotHorizontal if |u_V|_g >= 1e-8.
VectorXd normal_exp(const FoliatedChart& chart, const VectorXd& y,
                    const VectorXd& u);

struct ShootingResult {
    VectorXd base;        // point on the leaf
    SplitVector u;        // initial velocity (horizontal), |u|_g = rho
    double rho = 0.0;     // arc length = distance to the leaf
    int iterations = 0;
    double residual = 0.0;
    GeodesicPath path;    // unit-speed geodesic from base to target
};

struct ShootingOptions {
    double tol = 1e-10;        // coordinate residual target
    int max_iterations = 20;
    int max_halvings = 8;
    int multistart = 16;
    double ode_tol = 1e-12;
    double table_step = 0.05;  // coefficient table spacing for the Jacobian
};

// Newton inversion of the normal exponential map over (leaf position,
// direction, arc length); the Jacobian columns are F-Jacobi fields.
ShootingResult invert_normal_exp(const FoliatedChart& chart,
                                 const LeafPatch& leaf, const VectorXd& target,
                                 const ShootingOptions& opt = {});

double distance_to_leaf(const FoliatedChart& chart, const LeafPatch& leaf,
                        const VectorXd& target,
                        const ShootingOptions& opt = {});

// nabla-parallel transport of u along the curve s -> base(s), s in [0,1].
VectorXd parallel_transport(const FoliatedChart& chart,
                            const std::function<VectorXd(double)>& curve,
                            const std::function<VectorXd(double)>& curve_dot,
                            const VectorXd& u, double ode_tol = 1e-12);

}  // namespace folia
