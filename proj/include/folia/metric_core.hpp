// folia: projections, adapted frames, volume density and the bundle-like
// residual check.
#pragma once

#include <vector>

#include "folia/chart.hpp"
#include "folia/types.hpp"

namespace folia {

// Orthogonal decomposition u = u_H + u_V at p. v_part is the g-orthogonal
// projection of u onto span(Z_a(p)).
SplitVector project(const FoliatedChart& chart, const VectorXd& p,
                    const VectorXd& u);

// Deterministic g-orthonormal frame: the vertical oracle frame is
// orthonormalized first, then the coordinate basis is projected to H and
// orthonormalized in coordinate order, skipping directions whose projected
// norm falls below 1e-8. Output order: horizontal block, then vertical.
AdaptedFrame adapted_frame(const FoliatedChart& chart, const VectorXd& p);

// sqrt(det g_ij(p)).
double volume_density(const FoliatedChart& chart, const VectorXd& p);

struct BundleLikeSample {
    VectorXd point;
    double residual;
};

struct BundleLikeReport {
    std::vector<BundleLikeSample> samples;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// max over samples and random unit horizontal X, unit vertical Z of
// |(L_Z g)(X, X)|, computed from the metric and frame first derivatives.
BundleLikeReport check_bundle_like(const FoliatedChart& chart,
                                   const std::vector<VectorXd>& sample_points,
                                   int directions_per_point, std::uint64_t seed,
                                   double tolerance = 1e-10);

BundleLikeReport check_bundle_like(const FoliatedChart& chart, const Box& box,
                                   int sample_count, std::uint64_t seed,
                                   double tolerance = 1e-10);

// (L_Z g)(X, X) at p for a constant-coefficient vertical field Z (given by
// coefficients against the oracle frame) and a pointwise horizontal X.
double lie_derivative_residual(const FoliatedChart& chart, const VectorXd& p,
                               const VectorXd& z_coeffs, const VectorXd& x);

}  // namespace folia
