#include "folia/ode.hpp"

#include <algorithm>
#include <cmath>

namespace folia {

namespace {
// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// error = y5 - y4
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace

int OdeSolution::locate(double tq) const {
    const auto it = std::upper_bound(t.begin(), t.end(), tq);
    int i = static_cast<int>(it - t.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(t.size()) - 2);
    return i;
}

void OdeSolution::eval(double tq, VectorXd& out) const {
    if (t.size() == 1) {
        out = y[0];
        return;
    }
    const int i = locate(tq);
    const double h = t[i + 1] - t[i];
    const double s = (tq - t[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    out = h00 * y[i] + (h10 * h) * f[i] + h01 * y[i + 1] + (h11 * h) * f[i + 1];
}

VectorXd OdeSolution::eval(double tq) const {
    VectorXd out;
    eval(tq, out);
    return out;
}

void OdeSolution::eval_derivative(double tq, VectorXd& out) const {
    if (t.size() == 1) {
        out = f[0];
        return;
    }
    const int i = locate(tq);
    const double h = t[i + 1] - t[i];
    const double s = (tq - t[i]) / h;
    const double s2 = s * s;
    const double d00 = (6 * s2 - 6 * s) / h;
    const double d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / h;
    const double d11 = 3 * s2 - 2 * s;
    out = d00 * y[i] + d10 * f[i] + d01 * y[i + 1] + d11 * f[i + 1];
}

OdeSolution integrate_ode(const OdeRhs& rhs, const VectorXd& y0, double t0,
                          double t1, const OdeOptions& opt,
                          const StepMonitor& monitor) {
    const int n = static_cast<int>(y0.size());
    OdeSolution sol;
    VectorXd y = y0;
    VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n),
        err(n);
    double t = t0;
    rhs(t, y, k1);
    sol.t.push_back(t);
    sol.y.push_back(y);
    sol.f.push_back(k1);
    if (monitor && !monitor(t, y)) return sol;
    if (t1 <= t0) return sol;

    double h = std::min({opt.h_init, t1 - t0, opt.h_max});
    double err_prev = 1.0;
    long steps = 0;
    while (t < t1) {
        if (++steps > opt.max_steps)
            throw StepFailure("integrator exceeded max step count");
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw StepFailure("adaptive step underflow");
        const bool last = (t + h >= t1);
        if (last) h = t1 - t;

        ytmp = y + h * (a21 * k1);
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);  // FSAL
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sc =
                opt.abs_tol +
                opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            norm += (err[i] / sc) * (err[i] / sc);
        }
        norm = std::sqrt(norm / n);

        if (norm <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7);
            sol.t.push_back(t);
            sol.y.push_back(y);
            sol.f.push_back(k1);
            if (monitor && !monitor(t, y)) return sol;
            // PI controller
            const double fac =
                0.9 * std::pow(std::max(norm, 1e-10), -0.2) *
                std::pow(std::max(err_prev, 1e-10), 0.04);
            h *= std::clamp(fac, 0.2, 5.0);
            h = std::min(h, opt.h_max);
            err_prev = std::max(norm, 1e-10);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(norm, -0.2));
        }
    }
    return sol;
}

}  // namespace folia
