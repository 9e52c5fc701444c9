// folia: foliated coordinate charts. A chart carries the metric oracle and
// the vertical-frame oracle with exact first and second coordinate partials;
// a centered finite-difference fallback synthesizes the derivatives from the
// value oracle for user-supplied metrics.
#pragma once

#include <functional>
#include <vector>

#include "folia/types.hpp"

namespace folia {

enum class DerivativeMode { analytic, finite_difference };

// Metric data at a point: g, dg[k](i,j) = d_k g_ij, d2g[k][l] = d_k d_l g.
struct MetricDerivs {
    MatrixXd g;
    std::vector<MatrixXd> dg;
    std::vector<std::vector<MatrixXd>> d2g;
    void resize(int d);
};

// Vertical frame data: Z (d x m columns), dZ[k] = d_k Z, d2Z[k][l].
struct FrameDerivs {
    MatrixXd Z;
    std::vector<MatrixXd> dZ;
    std::vector<std::vector<MatrixXd>> d2Z;
    void resize(int d, int m);
};

// order 0: values only; 1: + first partials; 2: + second partials.
using MetricFn = std::function<void(const VectorXd&, int order, MetricDerivs&)>;
using FrameFn = std::function<void(const VectorXd&, int order, FrameDerivs&)>;

struct ChartDef {
    int dim_total = 0;
    int dim_vertical = 0;
    Box domain;
    MetricFn metric;
    FrameFn vertical_frame;
    DerivativeMode mode = DerivativeMode::analytic;
    double fd_step = 1e-5;
};

class FoliatedChart {
public:
    explicit FoliatedChart(ChartDef def);

    int dim() const { return def_.dim_total; }
    int vdim() const { return def_.dim_vertical; }
    int hdim() const { return def_.dim_total - def_.dim_vertical; }
    const Box& domain() const { return def_.domain; }
    DerivativeMode mode() const { return def_.mode; }
    double fd_step() const { return def_.fd_step; }

    void metric(const VectorXd& x, int order, MetricDerivs& out) const;
    void vertical_frame(const VectorXd& x, int order, FrameDerivs& out) const;

    MatrixXd metric_at(const VectorXd& x) const;

    // g(u, w) at x.
    double inner(const VectorXd& x, const VectorXd& u, const VectorXd& w) const;
    double norm(const VectorXd& x, const VectorXd& u) const;

    // Throws OutsideDomain unless x is interior (with margin).
    void require_interior(const VectorXd& x, double margin = 0.0) const;

    // Positive-definiteness gate used by the point operations: smallest
    // eigenvalue of g must exceed the floor. The trajectory internals use
    // factorization pivots instead, since exponentially scaled charts leave
    // any fixed eigenvalue floor while staying exactly positive definite.
    void check_positive_definite(const VectorXd& x, const MatrixXd& g,
                                 double floor = 1e-12) const;

private:
    ChartDef def_;
};

}  // namespace folia
