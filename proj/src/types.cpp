#include "folia/types.hpp"

#include <cmath>

namespace folia {

Box::Box(VectorXd lo_, VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    lo_open.assign(lo.size(), true);
    hi_open.assign(hi.size(), true);
}

bool Box::interior(const VectorXd& x, double margin) const {
    if (x.size() != lo.size()) return false;
    for (int i = 0; i < lo.size(); ++i) {
        if (!(x[i] > lo[i] + margin) || !(x[i] < hi[i] - margin)) return false;
    }
    return true;
}

bool Box::contains(const VectorXd& x) const {
    if (x.size() != lo.size()) return false;
    for (int i = 0; i < lo.size(); ++i) {
        if (lo_open.empty() ? false : lo_open[i]) {
            if (!(x[i] > lo[i])) return false;
        } else if (x[i] < lo[i]) {
            return false;
        }
        if (hi_open.empty() ? false : hi_open[i]) {
            if (!(x[i] < hi[i])) return false;
        } else if (x[i] > hi[i]) {
            return false;
        }
    }
    return true;
}

Box Box::shrunk(double margin) const {
    Box b = *this;
    for (int i = 0; i < lo.size(); ++i) {
        b.lo[i] += margin;
        b.hi[i] -= margin;
    }
    return b;
}

FieldStencil FieldStencil::constant(const VectorXd& v) {
    FieldStencil s;
    s.value = v;
    s.jac = MatrixXd::Zero(v.size(), v.size());
    return s;
}

FieldStencil FieldStencil::linear(const VectorXd& value, const MatrixXd& jac) {
    FieldStencil s;
    s.value = value;
    s.jac = jac;
    return s;
}

std::uint64_t Rng::next_u64() {
    // splitmix64
    state_ += 0x9E3779B97f4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
}

VectorXd Rng::vector(int n, double a, double b) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
}

VectorXd Rng::point_in(const Box& box, double margin) {
    VectorXd x(box.dim());
    for (int i = 0; i < box.dim(); ++i)
        x[i] = uniform(box.lo[i] + margin, box.hi[i] - margin);
    return x;
}

std::uint64_t Rng::split(std::uint64_t seed, const std::string& name) {
    // FNV-1a over the name, mixed with the top-level seed.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    Rng mixer(seed ^ h);
    return mixer.next_u64();
}

}  // namespace folia
