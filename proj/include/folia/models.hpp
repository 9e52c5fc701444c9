// folia: the model zoo. Each model ships a chart with analytic oracles, a
// leaf slice, assumption flags, and hand-derivable ground-truth values.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "folia/chart.hpp"
#include "folia/geodesic.hpp"

namespace folia {

struct AssumptionFlags {
    bool bundle_like = false;
    bool minimal_leaves = false;
    bool totally_geodesic_leaves = false;
    bool simply_connected_leaf_space = false;
    std::optional<double> transverse_bound_K;  // <R(X,Y)Y,X> <= -K
};

struct OraclePack {
    std::optional<double> transverse_curvature;   // constant, when known
    std::optional<double> lc_sectional_horizontal;  // constant, when known
    double mean_curvature_norm = 0.0;
    bool torsion_vanishes = false;
    bool c_vanishes = false;
};

struct ModelSpec {
    std::string id;
    std::shared_ptr<FoliatedChart> chart;
    VectorXd default_seed;            // reference leaf point
    std::vector<int> vertical_coords; // leaf slice coordinates
    AssumptionFlags flags;
    OraclePack oracle;
    Box validation_box;               // where invariants are sampled

    // Long-geodesic experiments restrict directions to a cone around this
    // horizontal frame index so paths stay inside the chart (the sphere
    // chart degenerates at the poles).
    std::optional<std::pair<int, double>> safe_cone;

    LeafPatch leaf_through(const VectorXd& seed) const;
    LeafPatch default_leaf() const { return leaf_through(default_seed); }
};

using ModelParams = std::map<std::string, double>;

// ids: euclidean_product, hyperbolic_product (d, K, m), heisenberg, sol,
// sphere_product (K, m), horosphere_h3, perturbed_product.
ModelSpec build_model(const std::string& id, const ModelParams& params = {});

std::vector<std::string> model_ids();

struct OracleCheckRow {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string comparator = "<";  // "<" residual below tol, ">" detection
    bool pass = false;
};

struct OracleCheckReport {
    std::string model_id;
    std::vector<OracleCheckRow> rows;
    bool pass = false;
};

// Full verification battery against the oracle pack; aggregates mismatches
// into the report instead of throwing.
OracleCheckReport oracle_check(const ModelSpec& spec, std::uint64_t seed,
                               int samples = 50);

}  // namespace folia
