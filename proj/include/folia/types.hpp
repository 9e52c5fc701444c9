// folia: shared value types, error taxonomy, deterministic RNG
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace folia {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateMetric : Error {
    explicit DegenerateMetric(const std::string& msg) : Error(msg) {}
};
struct SingularVerticalFrame : Error {
    explicit SingularVerticalFrame(const std::string& msg) : Error(msg) {}
};
struct NotHorizontal : Error {
    explicit NotHorizontal(const std::string& msg) : Error(msg) {}
};
struct NotOrthonormal : Error {
    explicit NotOrthonormal(const std::string& msg) : Error(msg) {}
};
struct OutsideDomain : Error {
    explicit OutsideDomain(const std::string& msg) : Error(msg) {}
};
struct LeftDomain : Error {
    double t_exit;
    explicit LeftDomain(double t, const std::string& msg)
        : Error(msg), t_exit(t) {}
};
struct StepFailure : Error {
    explicit StepFailure(const std::string& msg) : Error(msg) {}
};
struct NoConvergence : Error {
    int iterations;
    explicit NoConvergence(int iters, const std::string& msg)
        : Error(msg), iterations(iters) {}
};
struct DivisionNearZero : Error {
    explicit DivisionNearZero(const std::string& msg) : Error(msg) {}
};
struct SingularBVP : Error {
    explicit SingularBVP(const std::string& msg) : Error(msg) {}
};
struct QuadratureUnderresolved : Error {
    explicit QuadratureUnderresolved(const std::string& msg) : Error(msg) {}
};
struct EigensolveFailure : Error {
    explicit EigensolveFailure(const std::string& msg) : Error(msg) {}
};
struct UnknownModel : Error {
    explicit UnknownModel(const std::string& msg) : Error(msg) {}
};
struct BadParameters : Error {
    explicit BadParameters(const std::string& msg) : Error(msg) {}
};
struct BadDimensions : Error {
    explicit BadDimensions(const std::string& msg) : Error(msg) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// ---------------------------------------------------------------------------
// Axis-aligned coordinate box with open/closed flags per face.

struct Box {
    VectorXd lo, hi;
    std::vector<bool> lo_open, hi_open;

    Box() = default;
    Box(VectorXd lo_, VectorXd hi_);

    int dim() const { return static_cast<int>(lo.size()); }

    // Strict interior test with an optional safety margin (relative to the
    // face positions, absolute units).
    bool interior(const VectorXd& x, double margin = 0.0) const;
    bool contains(const VectorXd& x) const;

    // Shrunk copy (used for sampling away from faces).
    Box shrunk(double margin) const;
};

// ---------------------------------------------------------------------------
// Tangent vector with cached horizontal/vertical parts at a point.

struct SplitVector {
    VectorXd point;
    VectorXd components;
    VectorXd h_part;
    VectorXd v_part;
};

// g-orthonormal frame adapted to the splitting: first dim_horizontal columns
// span H, last dim_vertical span V.
struct AdaptedFrame {
    VectorXd point;
    MatrixXd vectors;  // d x d, one frame vector per column
    int dim_horizontal = 0;
    int dim_vertical = 0;

    VectorXd horizontal(int i) const { return vectors.col(i); }
    VectorXd vertical(int a) const { return vectors.col(dim_horizontal + a); }
};

// A vector field germ at a point: value and coordinate Jacobian
// jac(k, j) = d_j X^k. Enough to evaluate covariant derivatives.
struct FieldStencil {
    VectorXd value;
    MatrixXd jac;

    static FieldStencil constant(const VectorXd& v);
    static FieldStencil linear(const VectorXd& value, const MatrixXd& jac);
};

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64), identical across platforms.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double uniform();                      // [0, 1)
    double uniform(double a, double b);    // [a, b)
    double normal();                       // Box-Muller, deterministic
    VectorXd vector(int n, double a = -1.0, double b = 1.0);
    VectorXd point_in(const Box& box, double margin);

    // Derive an independent stream for a named experiment.
    static std::uint64_t split(std::uint64_t seed, const std::string& name);

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace folia
