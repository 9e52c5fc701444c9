// Full verification battery for a zoo model against its oracle pack.
// Mismatches are aggregated into the report, never thrown.
#include <cmath>

#include "folia/connection.hpp"
#include "folia/geodesic.hpp"
#include "folia/metric_core.hpp"
#include "folia/models.hpp"

namespace folia {

namespace {

void add_row(OracleCheckReport& rep, const std::string& name, double residual,
             double tol) {
    rep.rows.push_back({name, residual, tol, "<", residual < tol});
}

void add_detect(OracleCheckReport& rep, const std::string& name,
                double residual, double tol) {
    rep.rows.push_back({name, residual, tol, ">", residual > tol});
}

}  // namespace

OracleCheckReport oracle_check(const ModelSpec& spec, std::uint64_t seed,
                               int samples) {
    OracleCheckReport rep;
    rep.model_id = spec.id;
    const FoliatedChart& chart = *spec.chart;
    Rng rng(seed);
    const int d = chart.dim();
    const int n = chart.hdim();

    try {
        // Chart invariants: positive definite metric, independent verticals.
        double worst_pd = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < samples; ++k) {
            const VectorXd p = rng.point_in(spec.validation_box, 0.0);
            const MatrixXd g = chart.metric_at(p);
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(g, Eigen::EigenvaluesOnly);
            worst_pd = std::max(worst_pd, 1e-12 - es.eigenvalues().minCoeff());
            project(chart, p, rng.vector(d));  // throws on frame rank loss
        }
        rep.rows.push_back(
            {"metric_positive_definite", worst_pd, 0.0, "<", worst_pd < 0.0});

        // Bundle-like residual.
        const auto bl = check_bundle_like(chart, spec.validation_box,
                                          samples, rng.next_u64());
        if (spec.flags.bundle_like) {
            add_row(rep, "bundle_like_residual", bl.max_residual, 1e-10);
        } else {
            add_detect(rep, "bundle_like_violation_detected", bl.max_residual,
                       0.1);
        }

        // Structure identities (theorems of the bundle-like setting; the
        // perturbed control intentionally breaks them).
        if (spec.flags.bundle_like) {
            const auto ids = verify_structure_identities(
                chart, spec.validation_box, samples, rng.next_u64());
            add_row(rep, "structure_identities", ids.max_residual, 1e-7);
        }

        // C tensor and torsion expectations.
        double worst_c = 0.0, worst_tor = 0.0;
        for (int k = 0; k < samples / 2 + 1; ++k) {
            const VectorXd p = rng.point_in(spec.validation_box, 0.0);
            const VectorXd X = rng.vector(d), Y = rng.vector(d);
            worst_c = std::max(worst_c,
                               c_tensor(chart, p, X, Y).components.norm());
            worst_tor = std::max(worst_tor,
                                 torsion(chart, p, X, Y).components.norm());
        }
        if (spec.oracle.c_vanishes)
            add_row(rep, "c_tensor_vanishes", worst_c, 1e-9);
        else
            add_detect(rep, "c_tensor_nonzero", worst_c, 1e-6);
        if (spec.oracle.torsion_vanishes)
            add_row(rep, "torsion_vanishes", worst_tor, 1e-9);
        else
            add_detect(rep, "torsion_nonzero", worst_tor, 1e-6);

        // Curvature constants and the O'Neill rewrite.
        if (n >= 2) {
            double worst_sect = 0.0, worst_lc = 0.0, worst_oneill = 0.0;
            for (int k = 0; k < samples / 2 + 1; ++k) {
                const VectorXd p = rng.point_in(spec.validation_box, 0.0);
                const AdaptedFrame f = adapted_frame(chart, p);
                const double sect = transverse_sectional(
                    chart, p, f.horizontal(0), f.horizontal(1));
                if (spec.oracle.transverse_curvature)
                    worst_sect = std::max(
                        worst_sect,
                        std::abs(sect - *spec.oracle.transverse_curvature));
                if (spec.oracle.lc_sectional_horizontal)
                    worst_lc = std::max(
                        worst_lc,
                        std::abs(lc_sectional(chart, p, f.horizontal(0),
                                              f.horizontal(1)) -
                                 *spec.oracle.lc_sectional_horizontal));
                worst_oneill = std::max(
                    worst_oneill, std::abs(oneill_check(chart, p, f.horizontal(0),
                                                        f.horizontal(1))));
            }
            if (spec.oracle.transverse_curvature)
                add_row(rep, "transverse_sectional_constant", worst_sect, 1e-7);
            if (spec.oracle.lc_sectional_horizontal)
                add_row(rep, "lc_sectional_constant", worst_lc, 1e-7);
            add_row(rep, "oneill_identity", worst_oneill, 1e-7);
            // positive-control models must report the curvature-bound
            // violation instead of silently passing
            if (!spec.flags.transverse_bound_K &&
                spec.oracle.transverse_curvature)
                add_detect(rep, "transverse_bound_violation_detected",
                           *spec.oracle.transverse_curvature, 0.0);
        }

        // Mean curvature of the leaves.
        double worst_mean = 0.0;
        for (int k = 0; k < samples / 2 + 1; ++k) {
            const VectorXd p = rng.point_in(spec.validation_box, 0.0);
            const SplitVector h = mean_curvature(chart, p);
            worst_mean = std::max(
                worst_mean, std::abs(chart.norm(p, h.components) -
                                     spec.oracle.mean_curvature_norm));
        }
        add_row(rep, "mean_curvature_norm", worst_mean,
                spec.oracle.mean_curvature_norm == 0.0 ? 1e-9 : 1e-6);

        // Horizontal geodesic drifts (bundle-like models only).
        if (spec.flags.bundle_like) {
            const VectorXd p = spec.default_seed;
            const AdaptedFrame f = adapted_frame(chart, p);
            const VectorXd u = spec.safe_cone
                                   ? f.horizontal(spec.safe_cone->first)
                                   : f.horizontal(0);
            const GeodesicPath path = integrate_geodesic(chart, p, u, 10.0);
            add_row(rep, "geodesic_speed_drift", path.speed_drift, 1e-8);
            add_row(rep, "geodesic_vertical_drift", path.vertical_drift, 1e-8);
        }
    } catch (const Error& e) {
        rep.rows.push_back(
            {std::string("exception: ") + e.what(), 1.0, 0.0, "<", false});
    }

    rep.pass = true;
    for (const auto& row : rep.rows) rep.pass = rep.pass && row.pass;
    return rep;
}

}  // namespace folia
