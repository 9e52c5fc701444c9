// folia: adaptive embedded Runge-Kutta 4(5) (Dormand-Prince) with PI step
// control and cubic Hermite dense output.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "folia/types.hpp"

namespace folia {

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double h_init = 1e-3;
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 4000000;
};

// Dense solution: accepted nodes with state and derivative, interpolated by
// cubic Hermite in between.
class OdeSolution {
public:
    std::vector<double> t;
    std::vector<VectorXd> y;
    std::vector<VectorXd> f;

    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }
    int size() const { return static_cast<int>(t.size()); }

    void eval(double tq, VectorXd& out) const;
    VectorXd eval(double tq) const;
    void eval_derivative(double tq, VectorXd& out) const;

private:
    int locate(double tq) const;
};

using OdeRhs = std::function<void(double, const VectorXd&, VectorXd&)>;
// Inspects each accepted step; returning false stops the integration (the
// node is kept, so callers can localize the stopping event on the dense
// output).
using StepMonitor = std::function<bool(double, const VectorXd&)>;

OdeSolution integrate_ode(const OdeRhs& rhs, const VectorXd& y0, double t0,
                          double t1, const OdeOptions& opt,
                          const StepMonitor& monitor = nullptr);

}  // namespace folia
