#pragma once

#include <optional>
#include <utility>

#include "fillprob/transforms.hpp"

namespace fillprob {

enum class InversionMethod { Euler, Cos };

inline const char* to_string(InversionMethod m) {
    return m == InversionMethod::Euler ? "euler" : "cos";
}

// Euler (Bromwich + Euler summation) inversion parameters. The defaults give
// a discretization error below e^-A ~ 1e-8 for bounded functions.
struct EulerConfig {
    double discretization_exponent = 18.4;  // A
    int averaging_depth = 11;               // m, binomial averaging of partial sums
    int base_terms = 15;                    // n, first averaged partial sum
};

// Fourier-cosine series inversion parameters.
struct CosConfig {
    double interval_half_width = 8.0;  // L, interval is c1 -+ L sqrt(c2 + sqrt(c4))
    int n_terms = 512;
    double cumulant_step = 1e-4;  // finite-difference step for the cumulants
    std::optional<std::pair<double, double>> interval;  // explicit [a, b] override
};

struct Cumulants {
    double c1 = 0, c2 = 0, c4 = 0;
    double mass = 1.0;  // transform value at 0 (1 for proper densities)
};

struct CosDiagnostics {
    double a = 0, b = 0;
    int terms = 0;
};

// f(t) recovered from its Laplace transform by the Euler method:
// binomial average of partial sums of the alternating Bromwich series at
// gamma = A/(2t). Requires t > 0.
double euler_invert(const Transform& transform, double t, const EulerConfig& cfg = {});

// Cumulants c1, c2, c4 of the variable behind a density transform, via
// central finite differences of log f(-x) at x = 0.
Cumulants transform_cumulants(const Transform& density, double step);

// COS truncation interval [c1 - L w, c1 + L w], w = sqrt(c2 + sqrt(c4)).
// Throws CumulantError for non-finite or degenerate cumulants (point masses).
std::pair<double, double> select_interval(const Transform& density, const CosConfig& cfg = {});

// f(t) (or F(t) when the transform is a CdfWrapper) recovered by the COS
// cosine-series expansion on [a, b]. Throws IntervalError when t lies outside
// the truncation interval.
double cos_invert(const Transform& transform, double t, const CosConfig& cfg = {},
                  CosDiagnostics* diag = nullptr);

struct CdfAtZero {
    double value = 0;  // clamped to [0, 1]
    double raw = 0;    // before clamping
    InversionMethod method = InversionMethod::Cos;
    double interval_a = 0, interval_b = 0;
    int terms = 0;
    bool boundary_shortcut = false;  // truncation interval entirely one-sided
};

// P[D <= 0] from the CDF transform (1/s) f_D(s) of a difference of passage
// times. COS evaluates the CDF series at t = 0; Euler inverts the transform
// of the shifted variable D + c at t = c. Raw values outside
// [-1e-6, 1 + 1e-6] signal inversion failure and throw InversionError.
CdfAtZero invert_cdf_at_zero(const TransformPtr& cdf_transform, InversionMethod method,
                             const EulerConfig& euler_cfg = {}, const CosConfig& cos_cfg = {});

}  // namespace fillprob
