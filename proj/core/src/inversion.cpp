#include "fillprob/inversion.hpp"

#include <cmath>
#include <vector>

#include "fillprob/errors.hpp"

namespace fillprob {

namespace {

constexpr double kPi = 3.14159265358979323846;

double real_at(const Transform& t, double x, const char* what) {
    Complex v;
    try {
        v = t.eval(Complex(x, 0.0));
    } catch (const NoConvergence&) {
        throw CumulantError(std::string(what) + ": transform not evaluable near 0");
    }
    if (!std::isfinite(v.real()) || std::abs(v.imag()) > 1e-9 * (1.0 + std::abs(v.real()))) {
        throw CumulantError(std::string(what) + ": transform not real near 0");
    }
    return v.real();
}

}  // namespace

double euler_invert(const Transform& transform, double t, const EulerConfig& cfg) {
    if (!(t > 0.0)) throw InputError("euler_invert requires t > 0");
    if (!(cfg.discretization_exponent > 0.0) || cfg.averaging_depth < 0 || cfg.base_terms < 1) {
        throw InputError("invalid EulerConfig");
    }
    const double a = cfg.discretization_exponent;
    const int m = cfg.averaging_depth;
    const int n = cfg.base_terms;

    // Real parts of the transform on the Bromwich grid (A + 2 k pi i) / (2t).
    std::vector<double> re(static_cast<std::size_t>(n + m) + 1);
    for (int k = 0; k <= n + m; ++k) {
        Complex v;
        try {
            v = transform.eval(Complex(a / (2.0 * t), k * kPi / t));
        } catch (const Error& e) {
            throw TransformEvalError(e.what());
        }
        if (!std::isfinite(v.real())) throw NonFiniteResult("euler grid evaluation");
        re[static_cast<std::size_t>(k)] = v.real();
    }

    const double scale = std::exp(a / 2.0) / t;
    double partial = 0.5 * scale * re[0];
    std::vector<double> sums;  // s_n .. s_{n+m}
    sums.reserve(static_cast<std::size_t>(m) + 1);
    double sign = -1.0;
    for (int k = 1; k <= n + m; ++k) {
        partial += sign * scale * re[static_cast<std::size_t>(k)];
        sign = -sign;
        if (k >= n) sums.push_back(partial);
    }

    // Binomial average sum_k C(m,k) 2^-m s_{n+k}.
    double result = 0.0;
    double binom = std::ldexp(1.0, -m);  // C(m,0) / 2^m
    for (int k = 0; k <= m; ++k) {
        result += binom * sums[static_cast<std::size_t>(k)];
        binom = binom * static_cast<double>(m - k) / static_cast<double>(k + 1);
    }
    if (!std::isfinite(result)) throw NonFiniteResult("euler summation");
    return result;
}

namespace {

// g(x) = log f(-x) sampled on the 5-point stencil {-2h,-h,0,h,2h}.
void sample_cgf(const Transform& density, double h, double g[5]) {
    const double xs[5] = {-2 * h, -h, 0.0, h, 2 * h};
    for (int i = 0; i < 5; ++i) {
        const double v = real_at(density, -xs[i], "cumulants");
        if (!(v > 0.0)) throw CumulantError("transform not positive near 0");
        g[i] = std::log(v);
    }
}

double stencil_c1(const double g[5], double h) {
    return (-g[4] + 8 * g[3] - 8 * g[1] + g[0]) / (12 * h);
}
double stencil_c2(const double g[5], double h) {
    return (-g[4] + 16 * g[3] - 30 * g[2] + 16 * g[1] - g[0]) / (12 * h * h);
}
double stencil_c4(const double g[5], double h) {
    return (g[4] - 4 * g[3] + 6 * g[2] - 4 * g[1] + g[0]) / (h * h * h * h);
}

}  // namespace

Cumulants transform_cumulants(const Transform& density, double step) {
    if (!(step > 0.0)) throw InputError("cumulant step must be > 0");
    double g[5];
    sample_cgf(density, step, g);
    Cumulants c;
    c.mass = std::exp(g[2]);
    c.c1 = stencil_c1(g, step);
    c.c2 = stencil_c2(g, step);
    c.c4 = stencil_c4(g, step);
    if (!std::isfinite(c.c1) || !std::isfinite(c.c2) || !std::isfinite(c.c4)) {
        throw CumulantError("non-finite finite differences");
    }
    // The base step resolves c1 but the curvature signals c2 h^2 and c4 h^4
    // drown in evaluation noise when h is as small as the spread of the
    // distribution allows. Re-sample those stencils at steps scaled to the
    // standard deviation, shrinking again if the wider stencil leaves the
    // transform's convergence region.
    const double std_guess = std::sqrt(std::max({c.c2, c.c1 * c.c1, 1e-12}));
    for (double h2 = std::max(step, 5e-3 / std_guess); h2 >= step; h2 *= 0.5) {
        try {
            sample_cgf(density, h2, g);
            const double v = stencil_c2(g, h2);
            if (std::isfinite(v)) c.c2 = v;
            break;
        } catch (const CumulantError&) {
            if (h2 * 0.5 < step) break;
        }
    }
    const double std_scale = std::sqrt(std::max({c.c2, c.c1 * c.c1, 1e-12}));
    for (double h4 = std::max(step, 5e-2 / std_scale); h4 >= step; h4 *= 0.5) {
        try {
            sample_cgf(density, h4, g);
            const double v = stencil_c4(g, h4);
            if (std::isfinite(v)) c.c4 = v;
            break;
        } catch (const CumulantError&) {
            if (h4 * 0.5 < step) break;
        }
    }
    return c;
}

std::pair<double, double> select_interval(const Transform& density, const CosConfig& cfg) {
    if (cfg.interval) return *cfg.interval;
    const Cumulants c = transform_cumulants(density, cfg.cumulant_step);
    const double scale = std::max(1.0, c.c1 * c.c1);
    if (c.c2 < -1e-6 * scale) throw CumulantError("negative variance estimate");
    // Point masses: both width cumulants at the finite-difference noise floor.
    if (std::abs(c.c2) < 1e-10 * scale && std::abs(c.c4) < 1e-10 * scale * scale) {
        throw CumulantError("degenerate truncation interval (point mass)");
    }
    const double w = std::sqrt(std::max(c.c2, 0.0) + std::sqrt(std::max(c.c4, 0.0)));
    const double width = 2.0 * cfg.interval_half_width * w;
    if (!(width > 1e-9 * std::max(1.0, std::abs(c.c1)))) {
        throw CumulantError("degenerate truncation interval");
    }
    return {c.c1 - cfg.interval_half_width * w, c.c1 + cfg.interval_half_width * w};
}

double cos_invert(const Transform& transform, double t, const CosConfig& cfg,
                  CosDiagnostics* diag) {
    if (cfg.n_terms < 2) throw InputError("CosConfig n_terms must be >= 2");
    const auto* cdf = dynamic_cast<const CdfWrapper*>(&transform);
    const Transform& density = cdf ? *cdf->density() : transform;

    const auto [a, b] = select_interval(density, cfg);
    if (diag) {
        diag->a = a;
        diag->b = b;
        diag->terms = cfg.n_terms;
    }
    if (t < a || t > b) {
        throw IntervalError("t = " + std::to_string(t) + " outside [" + std::to_string(a) + ", " +
                            std::to_string(b) + "]");
    }
    const double width = b - a;

    double result;
    if (cdf) {
        // Cosine expansion of the CDF. The k = 0 coefficient is not available
        // from the transform (pole at 0); integrate F by parts instead:
        // int_a^b F = b F(b) - a F(a) - E[D 1], with F(b) ~ mass, F(a) ~ 0.
        const Cumulants c = transform_cumulants(density, cfg.cumulant_step);
        result = c.mass * (b - c.c1) / width;
    } else {
        result = real_at(density, 0.0, "cos k=0 term") / width;
    }
    for (int k = 1; k < cfg.n_terms; ++k) {
        const double w = k * kPi / width;
        Complex v;
        try {
            v = transform.eval(Complex(0.0, -w));
        } catch (const Error& e) {
            throw TransformEvalError(e.what());
        }
        const Complex phase = std::exp(Complex(0.0, -a * w));
        const double coeff = 2.0 / width * (v * phase).real();
        result += coeff * std::cos(w * (t - a));
    }
    if (!std::isfinite(result)) throw NonFiniteResult("cos series");
    return result;
}

namespace {

// Bromwich line integral of the CDF transform at t = 0:
// F(0) = (1/pi) int_0^inf Re T(gamma + iu) du, with gamma strictly inside the
// convergence strip. At t = 0 the Bromwich kernel e^{st} is 1, so there is no
// alternating series to accelerate; the integrand decays polynomially and the
// truncated tail is extrapolated from its power-law order.
double bromwich_cdf_at_zero(const Transform& cdf, double interval_width, int* terms_out) {
    // Abscissa well inside the convergence strip: the truncation interval
    // spans ~2L standard deviations, and the strip half-width is of order the
    // reciprocal standard deviation, so 2/width sits far from the boundary.
    // Continued fractions can converge to a wrong branch outside the strip,
    // so the cap matters; the probe loop only shrinks further on evaluation
    // failures.
    double gamma = 2.0 / std::max(interval_width, 1e-9);
    bool found = false;
    for (int i = 0; i < 60; ++i) {
        try {
            (void)cdf.eval(Complex(gamma, 0.0));
            found = true;
            break;
        } catch (const Error&) {
            gamma *= 0.5;
        }
    }
    if (!found) throw InversionError("no usable Bromwich abscissa");

    const double h = 0.3 * gamma;  // trapezoid aliasing ~ e^(-2 pi gamma / h)
    double sum = 0.5 * cdf.eval(Complex(gamma, 0.0)).real();
    const std::int64_t max_terms = 2000000;
    const std::int64_t block = 512;
    std::int64_t k = 1;
    while (k <= max_terms) {
        // The integrand oscillates, so truncate on a whole-block envelope.
        double envelope = 0.0;
        const std::int64_t stop = std::min(max_terms, k + block - 1);
        for (; k <= stop; ++k) {
            const double term = cdf.eval(Complex(gamma, k * h)).real();
            sum += term;
            envelope = std::max(envelope, std::abs(term));
        }
        if (envelope < 1e-11 * std::max(1.0, std::abs(sum))) break;
    }
    if (terms_out) *terms_out = static_cast<int>(k);
    const double result = sum * h / kPi;
    if (!std::isfinite(result)) throw NonFiniteResult("bromwich line integral");
    return result;
}

// CDF cosine series at t = 0 with progressive refinement: partial sums are
// checkpointed at powers of two and the series stops once one doubling moves
// the value by less than the tolerance. Wide truncation intervals (heavy
// tails) need many more terms than the configured default.
double cos_cdf_at_zero_refined(const CdfWrapper& cdf, double a, double b,
                               const CosConfig& cfg, int* terms_out) {
    const double width = b - a;
    const Cumulants c = transform_cumulants(*cdf.density(), cfg.cumulant_step);
    double sum = c.mass * (b - c.c1) / width;  // k = 0 term of the CDF expansion

    const int n_cap = 131072;
    const int n_start = std::max(64, cfg.n_terms);
    const double tol = 1e-7;
    double checkpoint = sum;
    bool have_checkpoint = false;
    for (int k = 1; k < n_cap; ++k) {
        const double w = k * kPi / width;
        Complex v;
        try {
            v = cdf.eval(Complex(0.0, -w));
        } catch (const Error& e) {
            throw TransformEvalError(e.what());
        }
        const Complex phase = std::exp(Complex(0.0, -a * w));
        sum += 2.0 / width * (v * phase).real() * std::cos(w * (0.0 - a));
        if (((k + 1) & k) == 0 && k + 1 >= n_start) {  // k + 1 is a power of two
            if (have_checkpoint && std::abs(sum - checkpoint) <= tol) {
                if (terms_out) *terms_out = k + 1;
                return sum;
            }
            checkpoint = sum;
            have_checkpoint = true;
        }
    }
    if (terms_out) *terms_out = n_cap;
    if (!std::isfinite(sum)) throw NonFiniteResult("cos series");
    return sum;
}

}  // namespace

CdfAtZero invert_cdf_at_zero(const TransformPtr& cdf_transform, InversionMethod method,
                             const EulerConfig& euler_cfg, const CosConfig& cos_cfg) {
    (void)euler_cfg;
    const auto* cdf = dynamic_cast<const CdfWrapper*>(cdf_transform.get());
    if (!cdf) throw InputError("invert_cdf_at_zero expects a CDF-wrapped transform");
    const TransformPtr& density = cdf->density();

    CdfAtZero out;
    out.method = method;
    const auto [a, b] = select_interval(*density, cos_cfg);
    out.interval_a = a;
    out.interval_b = b;

    if (a >= 0.0) {
        // All non-negligible mass is positive: P[D <= 0] ~ 0.
        out.boundary_shortcut = true;
        out.raw = 0.0;
        out.value = 0.0;
        return out;
    }
    if (b <= 0.0) {
        out.boundary_shortcut = true;
        out.raw = 1.0;
        out.value = 1.0;
        return out;
    }

    double raw;
    if (method == InversionMethod::Cos) {
        raw = cos_cdf_at_zero_refined(*cdf, a, b, cos_cfg, &out.terms);
    } else {
        raw = bromwich_cdf_at_zero(*cdf_transform, b - a, &out.terms);
    }
    out.raw = raw;
    if (raw < -1e-6 || raw > 1.0 + 1e-6) {
        throw InversionError("P[D<=0] = " + std::to_string(raw) + " outside [0,1] tolerance");
    }
    out.value = std::min(1.0, std::max(0.0, raw));
    return out;
}

}  // namespace fillprob
