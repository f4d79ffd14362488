#include "fillprob/continued_fraction.hpp"

#include <cmath>

#include "fillprob/errors.hpp"

namespace fillprob {

Complex lentz_evaluate(const ContinuedFraction& cf, double tolerance, int max_terms,
                       double tiny) {
    if (!(tolerance > 0.0)) throw InputError("lentz tolerance must be > 0");
    if (max_terms < 1) throw InputError("lentz max_terms must be >= 1");

    // b_0 = 0 for a pure K(a/b) fraction, so start from the tiny floor.
    Complex f(tiny, 0.0);
    Complex c = f;
    Complex d(0.0, 0.0);

    for (int k = 1; k <= max_terms; ++k) {
        const auto term = cf.coeffs(k);
        if (!term) return f;  // finite fraction, current value is exact
        const auto& [a, b] = *term;
        if (a == Complex(0.0, 0.0)) {
            throw DomainError("continued fraction coefficient a_k must be nonzero");
        }
        d = b + a * d;
        if (d == Complex(0.0, 0.0)) d = tiny;
        c = b + a / c;
        if (c == Complex(0.0, 0.0)) c = tiny;
        d = Complex(1.0, 0.0) / d;
        const Complex delta = c * d;
        f *= delta;
        if (std::abs(delta - Complex(1.0, 0.0)) < tolerance) {
            if (!std::isfinite(f.real()) || !std::isfinite(f.imag())) {
                throw NoConvergence(max_terms);
            }
            return f;
        }
    }
    throw NoConvergence(max_terms);
}

}  // namespace fillprob
