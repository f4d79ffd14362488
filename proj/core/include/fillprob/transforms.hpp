#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "fillprob/continued_fraction.hpp"
#include "fillprob/intensity.hpp"

namespace fillprob {

// Evaluable Laplace transform of a (possibly signed) density or CDF. All
// nodes are immutable after construction and re-entrant, so one expression
// can be evaluated at many s points in parallel.
class Transform {
public:
    virtual ~Transform() = default;
    virtual Complex eval(Complex s) const = 0;
};

using TransformPtr = std::shared_ptr<const Transform>;

// Index convention for the partial-hit product over cancellation rates:
// Paper takes k = m..q0, StepCount one factor per consumed step
// (k = m+1..q0). See partial_hit_transform.
enum class HitIndexConvention { Paper, StepCount };

// --- node factories ---------------------------------------------------------

// Transform of the first-passage time to 0 of a birth-death process started
// at q0, i.e. the product of per-step continued-fraction factors.
TransformPtr birth_death_fpt(RateLadder ladder, int start, LentzParams params = {});

// Transform of the sum of `start` independent exponentials with the given
// death rates (rates[k-1] is the rate leaving state k), i.e. prod mu_k/(mu_k+s).
TransformPtr pure_death_fpt(std::vector<double> death_rates, int start);

// Transform of the passage time of a cancellation-only pure-death process
// from state `from` down to state `to`, rates phi(k).
TransformPtr partial_hit(std::function<double(std::int64_t)> phi, int from, int to,
                         HitIndexConvention convention = HitIndexConvention::Paper);

// Transform of min(Y, Exp(rate)) where Y has transform `inner`:
// f(rate+s) + rate/(rate+s) * (1 - f(rate+s)). rate == 0 degenerates to inner.
TransformPtr min_with_exp(TransformPtr inner, double rate);

TransformPtr product(std::vector<TransformPtr> factors);
// inner(-s); the transform of -Y when inner is the transform of Y.
TransformPtr reflect_arg(TransformPtr inner);
// inner(scale * s + shift).
TransformPtr arg_affine(TransformPtr inner, Complex scale, Complex shift);
// exp(-c s) * inner(s); the transform of Y + c.
TransformPtr shift_variable(TransformPtr inner, double c);
TransformPtr constant(double value);
TransformPtr make_transform(std::function<Complex(Complex)> fn);

// CDF wrapper (1/s) * density(s). The inversion routines treat it specially;
// direct evaluation at s == 0 is a pole.
class CdfWrapper final : public Transform {
public:
    explicit CdfWrapper(TransformPtr density) : density_(std::move(density)) {}
    Complex eval(Complex s) const override;
    const TransformPtr& density() const { return density_; }

private:
    TransformPtr density_;
};

inline TransformPtr cdf_of(TransformPtr density) {
    return std::make_shared<CdfWrapper>(std::move(density));
}

// --- direct evaluation ------------------------------------------------------

// prod_{i=1..q0} f_{i,i-1}(s) with each factor a continued fraction
// -(1/lambda_{i-1}) K_{k=i} [ -lambda_{k-1} mu_k / (lambda_k + mu_k + s) ].
// s == 0 is evaluated via absorption probabilities (the continued fraction is
// ill-conditioned there when the chain is near-critical).
Complex birth_death_fpt_transform(const RateLadder& ladder, int start, Complex s,
                                  const LentzParams& params = {});

Complex pure_death_fpt_transform(const std::vector<double>& death_rates, int start, Complex s);

Complex min_with_exponential(const Transform& inner, double rate, Complex s);

Complex partial_hit_transform(const std::function<double(std::int64_t)>& phi, int from, int to,
                              Complex s, HitIndexConvention convention = HitIndexConvention::Paper);

// P[passage to 0 in finite time] for the birth-death chain started at q0;
// equals the transform value at s = 0.
double birth_death_absorption_probability(const RateLadder& ladder, int start);

}  // namespace fillprob
