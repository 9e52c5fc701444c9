#include "folia/models.hpp"

#include <cmath>

#include "folia/connection.hpp"
#include "folia/metric_core.hpp"

namespace folia {

LeafPatch ModelSpec::leaf_through(const VectorXd& seed) const {
    LeafPatch lp;
    lp.seed = seed;
    lp.vertical_coords = vertical_coords;
    return lp;
}

namespace {

double param(const ModelParams& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void check_keys(const ModelParams& p, std::initializer_list<const char*> known) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* name : known)
            if (k == name) ok = true;
        if (!ok) throw BadParameters("unknown model parameter: " + k);
    }
}

// Vertical frame of constant coordinate fields.
FrameFn slice_frame(int d, std::vector<int> cols) {
    return [d, cols = std::move(cols)](const VectorXd&, int /*order*/,
                                       FrameDerivs& out) {
        for (std::size_t a = 0; a < cols.size(); ++a) out.Z(cols[a], a) = 1.0;
    };
}

Box make_box(const std::vector<double>& lo, const std::vector<double>& hi) {
    const int d = static_cast<int>(lo.size());
    VectorXd l(d), h(d);
    for (int i = 0; i < d; ++i) {
        l[i] = lo[i];
        h[i] = hi[i];
    }
    return Box(l, h);
}

ModelSpec euclidean_product(const ModelParams& p) {
    check_keys(p, {"n", "m"});
    const int n = static_cast<int>(param(p, "n", 2));
    const int m = static_cast<int>(param(p, "m", 1));
    if (n < 1 || m < 1) throw BadParameters("euclidean_product needs n,m >= 1");
    const int d = n + m;

    ChartDef def;
    def.dim_total = d;
    def.dim_vertical = m;
    def.domain = make_box(std::vector<double>(d, -250.0),
                          std::vector<double>(d, 250.0));
    def.metric = [d](const VectorXd&, int, MetricDerivs& out) {
        out.g = MatrixXd::Identity(d, d);
    };
    std::vector<int> vcols(m);
    for (int a = 0; a < m; ++a) vcols[a] = n + a;
    def.vertical_frame = slice_frame(d, vcols);

    ModelSpec spec;
    spec.id = "euclidean_product";
    spec.chart = std::make_shared<FoliatedChart>(def);
    spec.default_seed = VectorXd::Zero(d);
    spec.vertical_coords = vcols;
    spec.flags = {true, true, true, true, 0.0};
    spec.oracle.transverse_curvature = 0.0;
    spec.oracle.lc_sectional_horizontal = 0.0;
    spec.oracle.torsion_vanishes = true;
    spec.oracle.c_vanishes = true;
    spec.validation_box = make_box(std::vector<double>(d, -10.0),
                                   std::vector<double>(d, 10.0));
    return spec;
}

// H_{d,K} x R^m in half-space coordinates (x_1..x_{d-1}, y, z_1..z_m);
// the hyperbolic block is delta_ij / (K y^2).
ModelSpec hyperbolic_product(const ModelParams& p) {
    check_keys(p, {"d", "K", "m"});
    const int dh = static_cast<int>(param(p, "d", 2));
    const double K = param(p, "K", 1.0);
    const int m = static_cast<int>(param(p, "m", 1));
    if (dh < 2 || m < 1 || !(K > 0))
        throw BadParameters("hyperbolic_product needs d >= 2, m >= 1, K > 0");
    const int d = dh + m;
    const int iy = dh - 1;  // half-space height coordinate

    ChartDef def;
    def.dim_total = d;
    def.dim_vertical = m;
    {
        std::vector<double> lo(d, -1e30), hi(d, 1e30);
        lo[iy] = 1e-30;
        def.domain = make_box(lo, hi);
    }
    def.metric = [d, dh, iy, K](const VectorXd& x, int order, MetricDerivs& out) {
        const double y = x[iy];
        const double q = 1.0 / (K * y * y);
        out.g = MatrixXd::Identity(d, d);
        for (int i = 0; i < dh; ++i) out.g(i, i) = q;
        if (order >= 1) {
            const double dq = -2.0 / (K * y * y * y);
            for (int i = 0; i < dh; ++i) out.dg[iy](i, i) = dq;
        }
        if (order >= 2) {
            const double d2q = 6.0 / (K * y * y * y * y);
            for (int i = 0; i < dh; ++i) out.d2g[iy][iy](i, i) = d2q;
        }
    };
    std::vector<int> vcols(m);
    for (int a = 0; a < m; ++a) vcols[a] = dh + a;
    def.vertical_frame = slice_frame(d, vcols);

    ModelSpec spec;
    spec.id = "hyperbolic_product";
    spec.chart = std::make_shared<FoliatedChart>(def);
    spec.default_seed = VectorXd::Zero(d);
    spec.default_seed[iy] = 1.0;
    spec.vertical_coords = vcols;
    spec.flags = {true, true, true, true, K};
    spec.oracle.transverse_curvature = -K;
    spec.oracle.lc_sectional_horizontal = -K;
    spec.oracle.torsion_vanishes = true;
    spec.oracle.c_vanishes = true;
    {
        std::vector<double> lo(d, -10.0), hi(d, 10.0);
        lo[iy] = 0.05;
        hi[iy] = 20.0;
        spec.validation_box = make_box(lo, hi);
    }
    return spec;
}

// Heisenberg group with the left-invariant metric making
// X = dx - (y/2) dz-dual, Y = dy + (x/2) dz-dual, Z = dz orthonormal;
// center foliation, leaves are the z-lines.
ModelSpec heisenberg(const ModelParams& p) {
    check_keys(p, {});
    const int d = 3;
    ChartDef def;
    def.dim_total = 3;
    def.dim_vertical = 1;
    def.domain = make_box({-250, -250, -8000}, {250, 250, 8000});
    def.metric = [](const VectorXd& x, int order, MetricDerivs& out) {
        const double a = x[1] / 2.0;   // theta^3 = a dx + b dy + dz
        const double b = -x[0] / 2.0;
        out.g(0, 0) = 1.0 + a * a;
        out.g(0, 1) = a * b;
        out.g(0, 2) = a;
        out.g(1, 0) = a * b;
        out.g(1, 1) = 1.0 + b * b;
        out.g(1, 2) = b;
        out.g(2, 0) = a;
        out.g(2, 1) = b;
        out.g(2, 2) = 1.0;
        if (order >= 1) {
            // d/dx: da = 0, db = -1/2
            out.dg[0](0, 1) = out.dg[0](1, 0) = -a / 2.0;
            out.dg[0](1, 1) = -b;
            out.dg[0](1, 2) = out.dg[0](2, 1) = -0.5;
            // d/dy: da = 1/2, db = 0
            out.dg[1](0, 0) = a;
            out.dg[1](0, 1) = out.dg[1](1, 0) = b / 2.0;
            out.dg[1](0, 2) = out.dg[1](2, 0) = 0.5;
        }
        if (order >= 2) {
            out.d2g[0][0](1, 1) = 0.5;
            out.d2g[0][1](0, 1) = out.d2g[0][1](1, 0) = -0.25;
            out.d2g[1][0](0, 1) = out.d2g[1][0](1, 0) = -0.25;
            out.d2g[1][1](0, 0) = 0.5;
        }
    };
    def.vertical_frame = slice_frame(d, {2});

    ModelSpec spec;
    spec.id = "heisenberg";
    spec.chart = std::make_shared<FoliatedChart>(def);
    spec.default_seed = VectorXd::Zero(3);
    spec.vertical_coords = {2};
    spec.flags = {true, true, true, true, 0.0};
    spec.oracle.transverse_curvature = 0.0;
    spec.oracle.lc_sectional_horizontal = -0.75;
    spec.oracle.torsion_vanishes = false;
    spec.oracle.c_vanishes = true;
    spec.validation_box = make_box({-5, -5, -5}, {5, 5, 5});
    return spec;
}

// Sol geometry g = e^{2z} dx^2 + e^{-2z} dy^2 + dz^2, foliated by the planes
// {z = const}: minimal but not totally geodesic (principal curvatures +-1).
ModelSpec sol(const ModelParams& p) {
    check_keys(p, {});
    const int d = 3;
    ChartDef def;
    def.dim_total = 3;
    def.dim_vertical = 2;
    def.domain = make_box({-100, -100, -16}, {100, 100, 16});
    def.metric = [](const VectorXd& x, int order, MetricDerivs& out) {
        const double ep = std::exp(2.0 * x[2]);
        const double em = std::exp(-2.0 * x[2]);
        out.g = MatrixXd::Identity(3, 3);
        out.g(0, 0) = ep;
        out.g(1, 1) = em;
        if (order >= 1) {
            out.dg[2](0, 0) = 2.0 * ep;
            out.dg[2](1, 1) = -2.0 * em;
        }
        if (order >= 2) {
            out.d2g[2][2](0, 0) = 4.0 * ep;
            out.d2g[2][2](1, 1) = 4.0 * em;
        }
    };
    def.vertical_frame = slice_frame(d, {0, 1});

    ModelSpec spec;
    spec.id = "sol";
    spec.chart = std::make_shared<FoliatedChart>(def);
    spec.default_seed = VectorXd::Zero(3);
    spec.vertical_coords = {0, 1};
    spec.flags = {true, true, false, true, 0.0};
    spec.oracle.torsion_vanishes = false;
    spec.oracle.c_vanishes = false;
    spec.oracle.mean_curvature_norm = 0.0;
    spec.validation_box = make_box({-5, -5, -2}, {5, 5, 2});
    return spec;
}

// S^2_K x R^m: transverse curvature +K, violating the negativity assumption;
// focal-point positive control. Chart: (theta, phi, z...), equator at
// theta = pi/2.
ModelSpec sphere_product(const ModelParams& p) {
    check_keys(p, {"K", "m"});
    const double K = param(p, "K", 1.0);
    const int m = static_cast<int>(param(p, "m", 1));
    if (!(K > 0) || m < 1)
        throw BadParameters("sphere_product needs K > 0, m >= 1");
    const int d = 2 + m;

    ChartDef def;
    def.dim_total = d;
    def.dim_vertical = m;
    {
        std::vector<double> lo(d, -100.0), hi(d, 100.0);
        lo[0] = 0.05;
        hi[0] = M_PI - 0.05;
        lo[1] = -45.0;
        hi[1] = 45.0;
        def.domain = make_box(lo, hi);
    }
    def.metric = [d, K](const VectorXd& x, int order, MetricDerivs& out) {
        const double s = std::sin(x[0]);
        const double c = std::cos(x[0]);
        out.g = MatrixXd::Identity(d, d);
        out.g(0, 0) = 1.0 / K;
        out.g(1, 1) = s * s / K;
        if (order >= 1) out.dg[0](1, 1) = 2.0 * s * c / K;
        if (order >= 2) out.d2g[0][0](1, 1) = 2.0 * (c * c - s * s) / K;
    };
    std::vector<int> vcols(m);
    for (int a = 0; a < m; ++a) vcols[a] = 2 + a;
    def.vertical_frame = slice_frame(d, vcols);

    ModelSpec spec;
    spec.id = "sphere_product";
    spec.chart = std::make_shared<FoliatedChart>(def);
    spec.default_seed = VectorXd::Zero(d);
    spec.default_seed[0] = M_PI / 2.0;
    spec.vertical_coords = vcols;
    spec.flags = {true, true, true, true, std::nullopt};
    spec.oracle.transverse_curvature = K;
    spec.oracle.lc_sectional_horizontal = K;
    spec.oracle.torsion_vanishes = true;
    spec.oracle.c_vanishes = true;
    spec.safe_cone = {{1, 0.25}};  // near-equatorial directions
    {
        std::vector<double> lo(d, -2.0), hi(d, 2.0);
        lo[0] = 0.4;
        hi[0] = M_PI - 0.4;
        spec.validation_box = make_box(lo, hi);
    }
    return spec;
}

// Horosphere foliation of H^3 (upper half-space): leaves {z = const} have
// mean curvature of norm 2; non-minimal negative control.
ModelSpec horosphere_h3(const ModelParams& p) {
    check_keys(p, {});
    const int d = 3;
    ChartDef def;
    def.dim_total = 3;
    def.dim_vertical = 2;
    def.domain = make_box({-1e7, -1e7, 1e-7}, {1e7, 1e7, 1e7});
    def.metric = [](const VectorXd& x, int order, MetricDerivs& out) {
        const double z = x[2];
        const double q = 1.0 / (z * z);
        out.g = MatrixXd::Identity(3, 3) * q;
        if (order >= 1) {
            const double dq = -2.0 / (z * z * z);
            for (int i = 0; i < 3; ++i) out.dg[2](i, i) = dq;
        }
        if (order >= 2) {
            const double d2q = 6.0 / (z * z * z * z);
            for (int i = 0; i < 3; ++i) out.d2g[2][2](i, i) = d2q;
        }
    };
    def.vertical_frame = slice_frame(d, {0, 1});

    ModelSpec spec;
    spec.id = "horosphere_h3";
    spec.chart = std::make_shared<FoliatedChart>(def);
    spec.default_seed = VectorXd::Zero(3);
    spec.default_seed[2] = 1.0;
    spec.vertical_coords = {0, 1};
    spec.flags = {true, false, false, true, 0.0};
    spec.oracle.torsion_vanishes = false;
    spec.oracle.c_vanishes = false;
    spec.oracle.mean_curvature_norm = 2.0;
    spec.validation_box = make_box({-3, -3, 0.3}, {3, 3, 3});
    return spec;
}

// Euclidean product with g_xx = 1 + z^2: violates the bundle-like condition
// away from z = 0 (negative control for the residual check).
ModelSpec perturbed_product(const ModelParams& p) {
    check_keys(p, {});
    const int d = 3;
    ChartDef def;
    def.dim_total = 3;
    def.dim_vertical = 1;
    def.domain = make_box({-50, -50, -50}, {50, 50, 50});
    def.metric = [](const VectorXd& x, int order, MetricDerivs& out) {
        const double z = x[2];
        out.g = MatrixXd::Identity(3, 3);
        out.g(0, 0) = 1.0 + z * z;
        if (order >= 1) out.dg[2](0, 0) = 2.0 * z;
        if (order >= 2) out.d2g[2][2](0, 0) = 2.0;
    };
    def.vertical_frame = slice_frame(d, {2});

    ModelSpec spec;
    spec.id = "perturbed_product";
    spec.chart = std::make_shared<FoliatedChart>(def);
    spec.default_seed = VectorXd::Zero(3);
    spec.vertical_coords = {2};
    spec.flags = {false, true, false, true, std::nullopt};
    spec.oracle.torsion_vanishes = true;
    spec.oracle.c_vanishes = true;
    spec.validation_box = make_box({-3, -3, -3}, {3, 3, 3});
    return spec;
}

}  // namespace

ModelSpec build_model(const std::string& id, const ModelParams& params) {
    if (id == "euclidean_product") return euclidean_product(params);
    if (id == "hyperbolic_product") return hyperbolic_product(params);
    if (id == "heisenberg") return heisenberg(params);
    if (id == "sol") return sol(params);
    if (id == "sphere_product") return sphere_product(params);
    if (id == "horosphere_h3") return horosphere_h3(params);
    if (id == "perturbed_product") return perturbed_product(params);
    throw UnknownModel("unknown model id: " + id);
}

std::vector<std::string> model_ids() {
    return {"euclidean_product", "hyperbolic_product", "heisenberg",
            "sol",               "sphere_product",     "horosphere_h3",
            "perturbed_product"};
}

}  // namespace folia
