// folia: forward-mode first-order jets and the small dense algebra used by
// the connection pipeline. A Jet carries a value and its coordinate gradient;
// seeding the gradient from the analytic oracles gives exact derivatives of
// every derived quantity (projectors, Christoffel symbols, connection
// coefficients) without nested differentiation.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "folia/types.hpp"

namespace folia {

// Gradient storage: dynamic size with fixed capacity, no heap traffic.
using JetGrad = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;

struct Jet {
    double a = 0.0;  // value
    JetGrad v;       // gradient; size 0 means "constant" (zero gradient)

    Jet() = default;
    Jet(double value) : a(value) {}  // NOLINT: implicit by design
    Jet(double value, JetGrad grad) : a(value), v(std::move(grad)) {}

    static Jet seeded(double value, const VectorXd& grad) {
        Jet j(value);
        j.v = grad;
        return j;
    }
};

inline double value(double x) { return x; }
inline double value(const Jet& x) { return x.a; }

namespace detail {
inline void add_grad(JetGrad& out, const JetGrad& g, double scale) {
    if (g.size() == 0) return;
    if (out.size() == 0)
        out = scale * g;
    else
        out += scale * g;
}
}  // namespace detail

inline Jet operator+(const Jet& x, const Jet& y) {
    Jet r(x.a + y.a);
    detail::add_grad(r.v, x.v, 1.0);
    detail::add_grad(r.v, y.v, 1.0);
    return r;
}
inline Jet operator-(const Jet& x, const Jet& y) {
    Jet r(x.a - y.a);
    detail::add_grad(r.v, x.v, 1.0);
    detail::add_grad(r.v, y.v, -1.0);
    return r;
}
inline Jet operator-(const Jet& x) {
    Jet r(-x.a);
    detail::add_grad(r.v, x.v, -1.0);
    return r;
}
inline Jet operator*(const Jet& x, const Jet& y) {
    Jet r(x.a * y.a);
    detail::add_grad(r.v, x.v, y.a);
    detail::add_grad(r.v, y.v, x.a);
    return r;
}
inline Jet operator/(const Jet& x, const Jet& y) {
    const double inv = 1.0 / y.a;
    Jet r(x.a * inv);
    detail::add_grad(r.v, x.v, inv);
    detail::add_grad(r.v, y.v, -x.a * inv * inv);
    return r;
}
inline Jet& operator+=(Jet& x, const Jet& y) { x = x + y; return x; }
inline Jet& operator-=(Jet& x, const Jet& y) { x = x - y; return x; }
inline Jet& operator*=(Jet& x, const Jet& y) { x = x * y; return x; }

inline Jet sqrt(const Jet& x) {
    const double s = std::sqrt(x.a);
    Jet r(s);
    detail::add_grad(r.v, x.v, 0.5 / s);
    return r;
}
using std::sqrt;

// ---------------------------------------------------------------------------
// Minimal dense matrix over a scalar S (double or Jet). Dimensions stay tiny
// (chart dimension <= 8), so plain loops are fine.

template <class S>
class SMat {
public:
    SMat() = default;
    SMat(int rows, int cols) : r_(rows), c_(cols), a_(rows * cols) {}

    static SMat zero(int rows, int cols) { return SMat(rows, cols); }
    static SMat identity(int n) {
        SMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = S(1.0);
        return m;
    }

    int rows() const { return r_; }
    int cols() const { return c_; }

    S& operator()(int i, int j) { return a_[i * c_ + j]; }
    const S& operator()(int i, int j) const { return a_[i * c_ + j]; }

    SMat transpose() const {
        SMat t(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    SMat operator*(const SMat& o) const {
        SMat out(r_, o.c_);
        for (int i = 0; i < r_; ++i)
            for (int k = 0; k < c_; ++k) {
                const S& x = (*this)(i, k);
                for (int j = 0; j < o.c_; ++j) out(i, j) += x * o(k, j);
            }
        return out;
    }
    SMat operator+(const SMat& o) const {
        SMat out(r_, c_);
        for (int i = 0; i < r_ * c_; ++i) out.a_[i] = a_[i] + o.a_[i];
        return out;
    }
    SMat operator-(const SMat& o) const {
        SMat out(r_, c_);
        for (int i = 0; i < r_ * c_; ++i) out.a_[i] = a_[i] - o.a_[i];
        return out;
    }
    SMat& operator+=(const SMat& o) {
        for (int i = 0; i < r_ * c_; ++i) a_[i] += o.a_[i];
        return *this;
    }
    SMat scaled(const S& s) const {
        SMat out(r_, c_);
        for (int i = 0; i < r_ * c_; ++i) out.a_[i] = a_[i] * s;
        return out;
    }

    std::vector<S> col(int j) const {
        std::vector<S> v(r_);
        for (int i = 0; i < r_; ++i) v[i] = (*this)(i, j);
        return v;
    }

private:
    int r_ = 0, c_ = 0;
    std::vector<S> a_;
};

template <class S>
std::vector<S> matvec(const SMat<S>& m, const std::vector<S>& x) {
    std::vector<S> y(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        S acc{};
        for (int j = 0; j < m.cols(); ++j) acc += m(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

template <class S>
S dot(const std::vector<S>& x, const std::vector<S>& y) {
    S acc{};
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

// Gaussian elimination with partial pivoting on |value|. Throws
// DegenerateMetric when a pivot vanishes; callers pass a context tag.
template <class S>
SMat<S> solve(SMat<S> A, SMat<S> B, const char* context) {
    const int n = A.rows();
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(value(A(k, k)));
        for (int i = k + 1; i < n; ++i) {
            const double cand = std::abs(value(A(i, k)));
            if (cand > best) { best = cand; p = i; }
        }
        if (!(best > 0.0))
            throw DegenerateMetric(std::string("singular system in ") + context);
        if (p != k)
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
        if (p != k)
            for (int j = 0; j < B.cols(); ++j) std::swap(B(k, j), B(p, j));
        const S piv = A(k, k);
        for (int i = k + 1; i < n; ++i) {
            const S f = A(i, k) / piv;
            for (int j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            for (int j = 0; j < B.cols(); ++j) B(i, j) -= f * B(k, j);
        }
    }
    SMat<S> X(n, B.cols());
    for (int j = 0; j < B.cols(); ++j) {
        for (int i = n - 1; i >= 0; --i) {
            S acc = B(i, j);
            for (int k = i + 1; k < n; ++k) acc -= A(i, k) * X(k, j);
            X(i, j) = acc / A(i, i);
        }
    }
    return X;
}

template <class S>
SMat<S> inverse(const SMat<S>& A, const char* context) {
    return solve(A, SMat<S>::identity(A.rows()), context);
}

// Conversions at the Eigen boundary.
inline SMat<double> from_eigen(const MatrixXd& m) {
    SMat<double> out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}
inline MatrixXd to_eigen(const SMat<double>& m) {
    MatrixXd out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

}  // namespace folia
