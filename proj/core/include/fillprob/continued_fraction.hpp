#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <utility>

namespace fillprob {

using Complex = std::complex<double>;

// A continued fraction K(a_k / b_k), k = 1, 2, ... supplied as an on-demand
// coefficient generator. Returning nullopt ends the fraction (finite
// fractions evaluate exactly). All generated a_k must be nonzero.
struct ContinuedFraction {
    std::function<std::optional<std::pair<Complex, Complex>>(int k)> coeffs;
};

struct LentzParams {
    double tolerance = 1e-12;
    int max_terms = 10000;
    double tiny = 1e-30;  // floor substituted when C_k or a denominator underflows
};

// Evaluates K(a_k / b_k) with the modified Lentz scheme. Terminates when the
// relative update |C_k D_k - 1| drops below the tolerance, or exactly when the
// generator is exhausted. Throws NoConvergence if the term budget runs out.
Complex lentz_evaluate(const ContinuedFraction& cf, double tolerance, int max_terms,
                       double tiny = 1e-30);

inline Complex lentz_evaluate(const ContinuedFraction& cf, const LentzParams& p = {}) {
    return lentz_evaluate(cf, p.tolerance, p.max_terms, p.tiny);
}

}  // namespace fillprob
