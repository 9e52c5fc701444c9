#include <doctest.h>

#include <cmath>

#include "folia/connection.hpp"
#include "folia/metric_core.hpp"
#include "folia/models.hpp"

using namespace folia;

namespace {
VectorXd vec3(double a, double b, double c) {
    VectorXd v(3);
    v << a, b, c;
    return v;
}

// Heisenberg model frame fields as stencils.
FieldStencil heis_X(const VectorXd& p) {
    FieldStencil s;
    s.value = vec3(1, 0, -p[1] / 2.0);
    s.jac = MatrixXd::Zero(3, 3);
    s.jac(2, 1) = -0.5;  // d_y of the z-component
    return s;
}
FieldStencil heis_Y(const VectorXd& p) {
    FieldStencil s;
    s.value = vec3(0, 1, p[0] / 2.0);
    s.jac = MatrixXd::Zero(3, 3);
    s.jac(2, 0) = 0.5;
    return s;
}
}  // namespace

TEST_CASE("levi_civita on reference metrics") {
    SUBCASE("euclidean: constant fields are parallel") {
        const ModelSpec eu = build_model("euclidean_product");
        const VectorXd p = vec3(0.2, 0.4, -0.6);
        const VectorXd v = levi_civita(*eu.chart, p,
                                       FieldStencil::constant(vec3(1, 2, 3)),
                                       FieldStencil::constant(vec3(-1, 0, 2)));
        CHECK(v.norm() < 1e-14);
    }
    SUBCASE("half-plane: D_dx dx = (1/y) dy") {
        const ModelSpec h2r = build_model("hyperbolic_product");
        const VectorXd p = vec3(0, 1, 0);
        const VectorXd v = levi_civita(*h2r.chart, p,
                                       FieldStencil::constant(vec3(1, 0, 0)),
                                       FieldStencil::constant(vec3(1, 0, 0)));
        CHECK((v - vec3(0, 1, 0)).norm() < 1e-12);
    }
    SUBCASE("heisenberg: D_X Y = Z/2 at the origin") {
        const ModelSpec heis = build_model("heisenberg");
        const VectorXd p = vec3(0, 0, 0);
        const VectorXd v =
            levi_civita(*heis.chart, p, heis_X(p), heis_Y(p));
        CHECK((v - vec3(0, 0, 0.5)).norm() < 1e-12);
    }
    SUBCASE("symmetry: D_X Y - D_Y X = [X,Y] for coordinate fields") {
        const ModelSpec heis = build_model("heisenberg");
        Rng rng(3);
        for (int k = 0; k < 20; ++k) {
            const VectorXd p = rng.point_in(heis.validation_box, 0.0);
            const FieldStencil X = FieldStencil::constant(rng.vector(3));
            const FieldStencil Y = FieldStencil::constant(rng.vector(3));
            const VectorXd diff = levi_civita(*heis.chart, p, X, Y) -
                                  levi_civita(*heis.chart, p, Y, X);
            CHECK(diff.norm() < 1e-8);  // constant stencils commute
        }
    }
}

TEST_CASE("c_tensor block rules and model values") {
    SUBCASE("vanishes identically on totally geodesic models") {
        for (const auto& id : {"heisenberg", "hyperbolic_product",
                               "euclidean_product", "sphere_product"}) {
            const ModelSpec spec = build_model(id);
            Rng rng(17);
            for (int k = 0; k < 10; ++k) {
                const VectorXd p = rng.point_in(spec.validation_box, 0.0);
                const VectorXd X = rng.vector(spec.chart->dim());
                const VectorXd Y = rng.vector(spec.chart->dim());
                const SplitVector c = c_tensor(*spec.chart, p, X, Y);
                INFO(id);
                CHECK(c.components.norm() < 1e-10);
            }
        }
    }
    SUBCASE("sol: <C_dz dx, dx> = e^{2z}") {
        const ModelSpec sol = build_model("sol");
        const VectorXd p = vec3(0.3, -0.2, 0.5);
        const SplitVector c = c_tensor(*sol.chart, p, vec3(0, 0, 1),
                                       vec3(1, 0, 0));
        const MatrixXd g = sol.chart->metric_at(p);
        const double val = c.components.dot(g * vec3(1, 0, 0));
        CHECK(val == doctest::Approx(std::exp(2.0 * p[2])).epsilon(1e-10));
        // output is vertical
        CHECK(sol.chart->norm(p, c.h_part) < 1e-10);
    }
    SUBCASE("horizontal pair gives zero") {
        const ModelSpec sol = build_model("sol");
        const VectorXd p = vec3(0.1, 0.2, -0.4);
        const SplitVector c = c_tensor(*sol.chart, p, vec3(0, 0, 2.0),
                                       vec3(0, 0, -1.0));
        CHECK(c.components.norm() < 1e-11);
    }
}

TEST_CASE("nabla: metric, frame-parallel on the model frame") {
    SUBCASE("heisenberg frame field X is nabla-parallel along itself") {
        const ModelSpec heis = build_model("heisenberg");
        Rng rng(5);
        for (int k = 0; k < 10; ++k) {
            const VectorXd p = rng.point_in(heis.validation_box, 0.0);
            const VectorXd v = nabla(*heis.chart, p, heis_X(p), heis_X(p));
            CHECK(v.norm() < 1e-9);
        }
    }
    SUBCASE("product: nabla agrees with D on split fields") {
        const ModelSpec h2r = build_model("hyperbolic_product");
        Rng rng(6);
        for (int k = 0; k < 10; ++k) {
            const VectorXd p = rng.point_in(h2r.validation_box, 0.0);
            // horizontal field with linear coefficients
            MatrixXd jac = MatrixXd::Zero(3, 3);
            jac(0, 0) = 0.3;
            jac(1, 1) = -0.2;
            FieldStencil Y;
            Y.value = vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0);
            Y.jac = jac;
            const FieldStencil X = FieldStencil::constant(
                vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0));
            const VectorXd a = nabla(*h2r.chart, p, X, Y);
            const VectorXd b = levi_civita(*h2r.chart, p, X, Y);
            CHECK((a - b).norm() < 1e-9);
        }
    }
}

TEST_CASE("torsion values") {
    SUBCASE("heisenberg: Tor(X, Y) = -Z everywhere") {
        const ModelSpec heis = build_model("heisenberg");
        Rng rng(8);
        for (int k = 0; k < 10; ++k) {
            const VectorXd p = rng.point_in(heis.validation_box, 0.0);
            const SplitVector t = torsion(*heis.chart, p, heis_X(p).value,
                                          heis_Y(p).value);
            CHECK((t.components - vec3(0, 0, -1)).norm() < 1e-9);
        }
    }
    SUBCASE("vertical pairs give zero") {
        const ModelSpec sol = build_model("sol");
        const VectorXd p = vec3(0.4, 0.1, 0.3);
        const SplitVector t =
            torsion(*sol.chart, p, vec3(1, 2, 0), vec3(-1, 1, 0));
        CHECK(t.components.norm() < 1e-10);
    }
    SUBCASE("integrable product: torsion vanishes") {
        const ModelSpec h2r = build_model("hyperbolic_product");
        Rng rng(9);
        for (int k = 0; k < 10; ++k) {
            const VectorXd p = rng.point_in(h2r.validation_box, 0.0);
            const SplitVector t = torsion(*h2r.chart, p, rng.vector(3),
                                          rng.vector(3));
            CHECK(t.components.norm() < 1e-10);
        }
    }
    SUBCASE("tensoriality in both slots") {
        const ModelSpec heis = build_model("heisenberg");
        Rng rng(10);
        const VectorXd p = rng.point_in(heis.validation_box, 0.0);
        const VectorXd X = rng.vector(3), Y = rng.vector(3);
        const double a = rng.uniform(0.5, 2.0), b = rng.uniform(0.5, 2.0);
        const SplitVector t = torsion(*heis.chart, p, X, Y);
        const SplitVector ts = torsion(*heis.chart, p, a * X, b * Y);
        CHECK((ts.components - a * b * t.components).norm() < 1e-9);
    }
}

TEST_CASE("j_map values and skew-symmetry") {
    const ModelSpec heis = build_model("heisenberg");
    Rng rng(12);
    for (int k = 0; k < 6; ++k) {
        const VectorXd p = rng.point_in(heis.validation_box, 0.0);
        const VectorXd X = heis_X(p).value;
        const VectorXd Y = heis_Y(p).value;
        const VectorXd Z = vec3(0, 0, 1);
        const SplitVector jx = j_map(*heis.chart, p, Z, X);
        const SplitVector jy = j_map(*heis.chart, p, Z, Y);
        CHECK((jx.components + Y).norm() < 1e-9);  // J_Z X = -Y
        CHECK((jy.components - X).norm() < 1e-9);  // J_Z Y = X
    }
    SUBCASE("J of a horizontal vector vanishes") {
        const VectorXd p = vec3(0.5, 0.5, 0);
        const SplitVector j = j_map(*heis.chart, p, heis_X(p).value,
                                    heis_Y(p).value);
        CHECK(j.components.norm() < 1e-10);
    }
    SUBCASE("J_Z kills vertical inputs when C = 0") {
        const VectorXd p = vec3(-0.4, 0.9, 1.2);
        const SplitVector j =
            j_map(*heis.chart, p, vec3(0, 0, 1), vec3(0, 0, 2.5));
        CHECK(j.components.norm() < 1e-10);
    }
    SUBCASE("product model: J vanishes") {
        const ModelSpec h2r = build_model("hyperbolic_product");
        const VectorXd p = vec3(0.2, 1.5, 0.7);
        const SplitVector j =
            j_map(*h2r.chart, p, vec3(0, 0, 1), vec3(1, 0, 0));
        CHECK(j.components.norm() < 1e-11);
    }
}

TEST_CASE("curvature of the adapted connection") {
    SUBCASE("euclidean product: flat") {
        const ModelSpec eu = build_model("euclidean_product");
        const VectorXd p = vec3(0.4, -0.8, 0.2);
        const SplitVector r = curvature_R(*eu.chart, p, vec3(1, 0, 0),
                                          vec3(0, 1, 0), vec3(1, 1, 1));
        CHECK(r.components.norm() < 1e-12);
    }
    SUBCASE("R(Y,X)X = 0 for vertical Y, horizontal X (heisenberg)") {
        const ModelSpec heis = build_model("heisenberg");
        Rng rng(14);
        for (int k = 0; k < 10; ++k) {
            const VectorXd p = rng.point_in(heis.validation_box, 0.0);
            const VectorXd X = heis_X(p).value;
            const SplitVector r =
                curvature_R(*heis.chart, p, vec3(0, 0, 1), X, X);
            CHECK(r.components.norm() < 1e-8);
        }
    }
    SUBCASE("transverse sectional curvature constants") {
        const ModelSpec h2r = build_model("hyperbolic_product");
        const ModelSpec heis = build_model("heisenberg");
        const ModelSpec sph = build_model("sphere_product");
        Rng rng(15);
        for (int k = 0; k < 8; ++k) {
            for (const ModelSpec* spec : {&h2r, &heis, &sph}) {
                const VectorXd p = rng.point_in(spec->validation_box, 0.0);
                const AdaptedFrame f = adapted_frame(*spec->chart, p);
                const double sect = transverse_sectional(
                    *spec->chart, p, f.horizontal(0), f.horizontal(1));
                INFO(spec->id);
                CHECK(sect == doctest::Approx(*spec->oracle.transverse_curvature)
                                  .epsilon(1e-9));
            }
        }
    }
    SUBCASE("block preservation") {
        const ModelSpec heis = build_model("heisenberg");
        Rng rng(16);
        for (int k = 0; k < 10; ++k) {
            const VectorXd p = rng.point_in(heis.validation_box, 0.0);
            const VectorXd X = rng.vector(3), Y = rng.vector(3);
            const SplitVector zh = project(*heis.chart, p, rng.vector(3));
            const SplitVector r =
                curvature_R(*heis.chart, p, X, Y, zh.h_part);
            CHECK(heis.chart->norm(p, r.v_part) < 1e-8);
            const SplitVector rv =
                curvature_R(*heis.chart, p, X, Y, zh.v_part);
            CHECK(heis.chart->norm(p, rv.h_part) < 1e-8);
        }
    }
    SUBCASE("antisymmetry and metric skew") {
        const ModelSpec heis = build_model("heisenberg");
        Rng rng(18);
        const VectorXd p = rng.point_in(heis.validation_box, 0.0);
        const MatrixXd g = heis.chart->metric_at(p);
        const VectorXd X = rng.vector(3), Y = rng.vector(3), Z = rng.vector(3),
                       W = rng.vector(3);
        const SplitVector rxy = curvature_R(*heis.chart, p, X, Y, Z);
        const SplitVector ryx = curvature_R(*heis.chart, p, Y, X, Z);
        CHECK((rxy.components + ryx.components).norm() < 1e-9);
        const SplitVector rw = curvature_R(*heis.chart, p, X, Y, W);
        CHECK(std::abs(rxy.components.dot(g * W) + rw.components.dot(g * Z)) <
              1e-9);
    }
}

TEST_CASE("oneill_check residual vanishes; heisenberg LC sectional is -3/4") {
    for (const auto& id : {"heisenberg", "hyperbolic_product",
                           "euclidean_product", "sphere_product"}) {
        const ModelSpec spec = build_model(id);
        Rng rng(21);
        for (int k = 0; k < 10; ++k) {
            const VectorXd p = rng.point_in(spec.validation_box, 0.0);
            const AdaptedFrame f = adapted_frame(*spec.chart, p);
            const double res = oneill_check(*spec.chart, p, f.horizontal(0),
                                            f.horizontal(1));
            INFO(id);
            CHECK(std::abs(res) < 1e-9);
        }
    }
    const ModelSpec heis = build_model("heisenberg");
    const VectorXd p = vec3(0.9, -1.1, 0.3);
    const AdaptedFrame f = adapted_frame(*heis.chart, p);
    CHECK(lc_sectional(*heis.chart, p, f.horizontal(0), f.horizontal(1)) ==
          doctest::Approx(-0.75).epsilon(1e-9));
}

TEST_CASE("mean curvature of leaves") {
    SUBCASE("minimal models") {
        for (const auto& id : {"sol", "heisenberg", "hyperbolic_product",
                               "euclidean_product"}) {
            const ModelSpec spec = build_model(id);
            Rng rng(23);
            for (int k = 0; k < 6; ++k) {
                const VectorXd p = rng.point_in(spec.validation_box, 0.0);
                const SplitVector h = mean_curvature(*spec.chart, p);
                INFO(id);
                CHECK(spec.chart->norm(p, h.components) < 1e-9);
            }
        }
    }
    SUBCASE("horosphere foliation has |H| = 2") {
        const ModelSpec h3 = build_model("horosphere_h3");
        Rng rng(24);
        for (int k = 0; k < 6; ++k) {
            const VectorXd p = rng.point_in(h3.validation_box, 0.0);
            const SplitVector h = mean_curvature(*h3.chart, p);
            CHECK(h3.chart->norm(p, h.components) ==
                  doctest::Approx(2.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("connection coefficients in the adapted frame") {
    const ModelSpec heis = build_model("heisenberg");
    const VectorXd p = vec3(0.6, 0.2, -0.5);
    const ConnectionCoefficients cc = connection_coefficients(*heis.chart, p);
    const int d = 3, n = 2;
    // metric antisymmetry of the nabla coefficients
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                CHECK(std::abs(cc.gamma_nabla[k](i, j) + cc.gamma_nabla[k](j, i)) <
                      1e-9);
    // block structure: nabla of horizontal frame vectors stays horizontal
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = n; j < d; ++j)
                CHECK(std::abs(cc.gamma_nabla[k](i, j)) < 1e-9);
}

TEST_CASE("structure identity battery") {
    SUBCASE("analytic models stay below 1e-7") {
        for (const auto& id : {"heisenberg", "hyperbolic_product", "sol"}) {
            const ModelSpec spec = build_model(id);
            const auto rep = verify_structure_identities(
                *spec.chart, spec.validation_box, 40, 99);
            INFO(id, " max=", rep.max_residual);
            CHECK(rep.pass);
        }
    }
    SUBCASE("euclidean residuals are at machine precision") {
        const ModelSpec eu = build_model("euclidean_product");
        const auto rep =
            verify_structure_identities(*eu.chart, eu.validation_box, 20, 12);
        CHECK(rep.max_residual < 1e-12);
    }
}

TEST_CASE("curvature samples carry sectional data and invariants") {
    const ModelSpec heis = build_model("heisenberg");
    const VectorXd p = heis.default_seed;
    const AdaptedFrame f = adapted_frame(*heis.chart, p);
    const CurvatureSample s = curvature_sample(
        *heis.chart, p, f.horizontal(0), f.horizontal(1), f.horizontal(1));
    CHECK(s.sectional_nabla == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(s.sectional_lc == doctest::Approx(-0.75).epsilon(1e-10));
    CHECK((s.torsion_xy.components - (-f.vertical(0))).norm() < 1e-9);
    const MatrixXd g = heis.chart->metric_at(p);
    // metric skew in the last two slots
    const SplitVector rw = curvature_R(*heis.chart, p, f.horizontal(0),
                                       f.horizontal(1), f.horizontal(0));
    CHECK(std::abs(s.value.components.dot(g * f.horizontal(0)) +
                   rw.components.dot(g * f.horizontal(1))) < 1e-9);
}

TEST_CASE("curvature through the finite-difference oracle mode") {
    // Wrap the heisenberg metric as a value-only oracle; second partials are
    // synthesized by centered differences, so curvature tolerances relax.
    const ModelSpec ana = build_model("heisenberg");
    ChartDef def;
    def.dim_total = 3;
    def.dim_vertical = 1;
    def.domain = ana.chart->domain();
    def.metric = [chart = ana.chart](const VectorXd& x, int, MetricDerivs& out) {
        MetricDerivs tmp;
        tmp.resize(3);
        chart->metric(x, 0, tmp);
        out.g = tmp.g;
    };
    def.vertical_frame = [](const VectorXd&, int, FrameDerivs& out) {
        out.Z(2, 0) = 1.0;
    };
    def.mode = DerivativeMode::finite_difference;
    def.fd_step = 1e-4;
    const FoliatedChart fd(def);

    Rng rng(31);
    for (int k = 0; k < 5; ++k) {
        const VectorXd p = rng.point_in(ana.validation_box, 0.0);
        const AdaptedFrame f = adapted_frame(fd, p);
        CHECK(std::abs(transverse_sectional(fd, p, f.horizontal(0),
                                            f.horizontal(1))) < 1e-5);
        CHECK(lc_sectional(fd, p, f.horizontal(0), f.horizontal(1)) ==
              doctest::Approx(-0.75).epsilon(1e-5));
        CHECK(std::abs(oneill_check(fd, p, f.horizontal(0), f.horizontal(1))) <
              1e-5);
    }
}
