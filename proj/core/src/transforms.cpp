#include "fillprob/transforms.hpp"

#include <cmath>

#include "fillprob/errors.hpp"

namespace fillprob {

namespace {

constexpr int kRateCache = 1024;

double checked_death(double d, std::int64_t k) {
    if (!(d > 0.0)) {
        throw DomainError("death rate at state " + std::to_string(k) + " must be > 0");
    }
    return d;
}

double checked_birth(double b, std::int64_t k) {
    if (!(b >= 0.0)) {
        throw DomainError("birth rate at state " + std::to_string(k) + " must be >= 0");
    }
    return b;
}

// Rate accessors with a bounded precomputed prefix so transform nodes stay
// immutable and re-entrant while hot evaluations avoid std::function calls.
class CachedLadder {
public:
    CachedLadder(RateLadder ladder, int start)
        : ladder_(std::move(ladder)) {
        const int prefill = std::max(kRateCache, 4 * start);
        birth_.reserve(static_cast<std::size_t>(prefill) + 1);
        death_.reserve(static_cast<std::size_t>(prefill) + 1);
        for (int k = 0; k <= prefill; ++k) {
            birth_.push_back(checked_birth(ladder_.birth(k), k));
            death_.push_back(k == 0 ? 0.0 : checked_death(ladder_.death(k), k));
        }
    }

    double birth(std::int64_t k) const {
        if (k < static_cast<std::int64_t>(birth_.size())) return birth_[static_cast<std::size_t>(k)];
        return checked_birth(ladder_.birth(k), k);
    }
    double death(std::int64_t k) const {
        if (k < static_cast<std::int64_t>(death_.size())) return death_[static_cast<std::size_t>(k)];
        return checked_death(ladder_.death(k), k);
    }

private:
    RateLadder ladder_;
    std::vector<double> birth_;
    std::vector<double> death_;
};

// One step factor f_{i,i-1}(s) of the birth-death first-passage transform.
template <typename BirthFn, typename DeathFn>
Complex bd_step_factor(const BirthFn& birth, const DeathFn& death, int i, Complex s,
                       const LentzParams& params) {
    const double lead = birth(i - 1);
    if (!(lead > 0.0)) {
        throw DomainError("birth rate at state " + std::to_string(i - 1) +
                          " must be > 0 for the continued-fraction prefactor");
    }
    ContinuedFraction cf{[&, i, s](int n) -> std::optional<std::pair<Complex, Complex>> {
        const std::int64_t k = static_cast<std::int64_t>(i) + n - 1;
        const double lk_prev = birth(k - 1);
        if (n > 1 && lk_prev == 0.0) return std::nullopt;  // finite chain: fraction ends
        const double dk = death(k);
        const Complex a = Complex(-lk_prev * dk, 0.0);
        const Complex b = Complex(birth(k) + dk, 0.0) + s;
        return std::make_pair(a, b);
    }};
    return Complex(-1.0 / lead, 0.0) * lentz_evaluate(cf, params);
}

template <typename BirthFn, typename DeathFn>
double absorption_step(const BirthFn& birth, const DeathFn& death, int i) {
    // P[hit i-1 | start i] = T/(1+T), T = sum_{m>=i} prod_{j=i..m} death_j/birth_j.
    // Nondecreasing terms mean T = inf, i.e. certain absorption.
    double total = 0.0;
    double term = 1.0;
    double prev_term = 0.0;
    double prev_ratio = -1.0;
    for (std::int64_t m = i; m < i + 2000000; ++m) {
        const double b = birth(m);
        if (b == 0.0) return 1.0;  // chain cannot escape upward past m
        const double ratio = death(m) / b;
        term *= ratio;
        total += term;
        if (term < 1e-16 * (1.0 + total)) return total / (1.0 + total);
        if (m > i + 8 && term >= prev_term * (1.0 - 1e-12)) return 1.0;
        if (m > i + 8 && ratio < 1.0 && std::abs(ratio - prev_ratio) < 1e-12 * ratio) {
            // stabilized geometric tail
            total += term * ratio / (1.0 - ratio);
            return total / (1.0 + total);
        }
        prev_term = term;
        prev_ratio = ratio;
    }
    return total / (1.0 + total);
}

}  // namespace

Complex birth_death_fpt_transform(const RateLadder& ladder, int start, Complex s,
                                  const LentzParams& params) {
    if (start < 1) throw InputError("birth-death start state must be >= 1");
    if (s == Complex(0.0, 0.0)) {
        return Complex(birth_death_absorption_probability(ladder, start), 0.0);
    }
    Complex result(1.0, 0.0);
    for (int i = 1; i <= start; ++i) {
        result *= bd_step_factor(ladder.birth, ladder.death, i, s, params);
    }
    return result;
}

double birth_death_absorption_probability(const RateLadder& ladder, int start) {
    if (start < 1) throw InputError("birth-death start state must be >= 1");
    double p = 1.0;
    for (int i = 1; i <= start; ++i) {
        p *= absorption_step(ladder.birth, ladder.death, i);
    }
    return p;
}

Complex pure_death_fpt_transform(const std::vector<double>& death_rates, int start, Complex s) {
    if (start < 1) throw InputError("pure-death start state must be >= 1");
    if (static_cast<int>(death_rates.size()) < start) {
        throw InputError("pure-death rates shorter than start state");
    }
    Complex result(1.0, 0.0);
    for (int k = 1; k <= start; ++k) {
        const double mu = checked_death(death_rates[static_cast<std::size_t>(k - 1)], k);
        const Complex denom = Complex(mu, 0.0) + s;
        if (denom == Complex(0.0, 0.0)) {
            throw DomainError("pure-death transform evaluated at pole s = -mu_k");
        }
        result *= Complex(mu, 0.0) / denom;
    }
    return result;
}

Complex min_with_exponential(const Transform& inner, double rate, Complex s) {
    if (rate < 0.0) throw DomainError("exponential rate must be >= 0");
    if (rate == 0.0) return inner.eval(s);
    const Complex shifted = inner.eval(Complex(rate, 0.0) + s);
    const Complex denom = Complex(rate, 0.0) + s;
    if (denom == Complex(0.0, 0.0)) {
        throw DomainError("min-with-exponential evaluated at pole s = -rate");
    }
    return shifted + (Complex(rate, 0.0) / denom) * (Complex(1.0, 0.0) - shifted);
}

Complex partial_hit_transform(const std::function<double(std::int64_t)>& phi, int from, int to,
                              Complex s, HitIndexConvention convention) {
    if (to < 1 || to > from) throw InputError("partial hit requires 1 <= to <= from");
    const int k_lo = convention == HitIndexConvention::Paper ? to : to + 1;
    Complex result(1.0, 0.0);
    for (int k = k_lo; k <= from; ++k) {
        const double rate = checked_death(phi(k), k);
        const Complex denom = Complex(rate, 0.0) + s;
        if (denom == Complex(0.0, 0.0)) {
            throw DomainError("partial-hit transform evaluated at pole s = -phi_k");
        }
        result *= Complex(rate, 0.0) / denom;
    }
    return result;
}

// --- expression nodes -------------------------------------------------------

namespace {

class BirthDeathFptNode final : public Transform {
public:
    BirthDeathFptNode(RateLadder ladder, int start, LentzParams params)
        : cache_(std::move(ladder), start), start_(start), params_(params) {
        if (start < 1) throw InputError("birth-death start state must be >= 1");
    }

    Complex eval(Complex s) const override {
        if (s == Complex(0.0, 0.0)) {
            double p = 1.0;
            for (int i = 1; i <= start_; ++i) {
                p *= absorption_step([this](std::int64_t k) { return cache_.birth(k); },
                                     [this](std::int64_t k) { return cache_.death(k); }, i);
            }
            return Complex(p, 0.0);
        }
        Complex result(1.0, 0.0);
        for (int i = 1; i <= start_; ++i) {
            result *= bd_step_factor([this](std::int64_t k) { return cache_.birth(k); },
                                     [this](std::int64_t k) { return cache_.death(k); }, i, s,
                                     params_);
        }
        return result;
    }

private:
    CachedLadder cache_;
    int start_;
    LentzParams params_;
};

class PureDeathFptNode final : public Transform {
public:
    PureDeathFptNode(std::vector<double> rates, int start)
        : rates_(std::move(rates)), start_(start) {}
    Complex eval(Complex s) const override {
        return pure_death_fpt_transform(rates_, start_, s);
    }

private:
    std::vector<double> rates_;
    int start_;
};

class PartialHitNode final : public Transform {
public:
    PartialHitNode(std::function<double(std::int64_t)> phi, int from, int to,
                   HitIndexConvention convention)
        : from_(from), to_(to), convention_(convention) {
        if (to < 1 || to > from) throw InputError("partial hit requires 1 <= to <= from");
        rates_.reserve(static_cast<std::size_t>(from) + 1);
        for (int k = 0; k <= from; ++k) rates_.push_back(k == 0 ? 0.0 : phi(k));
    }
    Complex eval(Complex s) const override {
        auto fn = [this](std::int64_t k) { return rates_[static_cast<std::size_t>(k)]; };
        return partial_hit_transform(fn, from_, to_, s, convention_);
    }

private:
    std::vector<double> rates_;
    int from_, to_;
    HitIndexConvention convention_;
};

class MinWithExpNode final : public Transform {
public:
    MinWithExpNode(TransformPtr inner, double rate) : inner_(std::move(inner)), rate_(rate) {}
    Complex eval(Complex s) const override { return min_with_exponential(*inner_, rate_, s); }

private:
    TransformPtr inner_;
    double rate_;
};

class ProductNode final : public Transform {
public:
    explicit ProductNode(std::vector<TransformPtr> factors) : factors_(std::move(factors)) {}
    Complex eval(Complex s) const override {
        Complex result(1.0, 0.0);
        for (const auto& f : factors_) result *= f->eval(s);
        return result;
    }

private:
    std::vector<TransformPtr> factors_;
};

class ArgAffineNode final : public Transform {
public:
    ArgAffineNode(TransformPtr inner, Complex scale, Complex shift)
        : inner_(std::move(inner)), scale_(scale), shift_(shift) {}
    Complex eval(Complex s) const override { return inner_->eval(scale_ * s + shift_); }

private:
    TransformPtr inner_;
    Complex scale_, shift_;
};

class ShiftVariableNode final : public Transform {
public:
    ShiftVariableNode(TransformPtr inner, double c) : inner_(std::move(inner)), c_(c) {}
    Complex eval(Complex s) const override { return std::exp(-c_ * s) * inner_->eval(s); }

private:
    TransformPtr inner_;
    double c_;
};

class ConstantNode final : public Transform {
public:
    explicit ConstantNode(double value) : value_(value) {}
    Complex eval(Complex) const override { return Complex(value_, 0.0); }

private:
    double value_;
};

class FnNode final : public Transform {
public:
    explicit FnNode(std::function<Complex(Complex)> fn) : fn_(std::move(fn)) {}
    Complex eval(Complex s) const override { return fn_(s); }

private:
    std::function<Complex(Complex)> fn_;
};

}  // namespace

Complex CdfWrapper::eval(Complex s) const {
    if (s == Complex(0.0, 0.0)) throw DomainError("CDF transform has a pole at s = 0");
    return density_->eval(s) / s;
}

TransformPtr birth_death_fpt(RateLadder ladder, int start, LentzParams params) {
    return std::make_shared<BirthDeathFptNode>(std::move(ladder), start, params);
}

TransformPtr pure_death_fpt(std::vector<double> death_rates, int start) {
    if (start < 1) throw InputError("pure-death start state must be >= 1");
    if (static_cast<int>(death_rates.size()) < start) {
        throw InputError("pure-death rates shorter than start state");
    }
    return std::make_shared<PureDeathFptNode>(std::move(death_rates), start);
}

TransformPtr partial_hit(std::function<double(std::int64_t)> phi, int from, int to,
                         HitIndexConvention convention) {
    return std::make_shared<PartialHitNode>(std::move(phi), from, to, convention);
}

TransformPtr min_with_exp(TransformPtr inner, double rate) {
    return std::make_shared<MinWithExpNode>(std::move(inner), rate);
}

TransformPtr product(std::vector<TransformPtr> factors) {
    return std::make_shared<ProductNode>(std::move(factors));
}

TransformPtr reflect_arg(TransformPtr inner) {
    return std::make_shared<ArgAffineNode>(std::move(inner), Complex(-1.0, 0.0), Complex(0.0, 0.0));
}

TransformPtr arg_affine(TransformPtr inner, Complex scale, Complex shift) {
    return std::make_shared<ArgAffineNode>(std::move(inner), scale, shift);
}

TransformPtr shift_variable(TransformPtr inner, double c) {
    return std::make_shared<ShiftVariableNode>(std::move(inner), c);
}

TransformPtr constant(double value) { return std::make_shared<ConstantNode>(value); }

TransformPtr make_transform(std::function<Complex(Complex)> fn) {
    return std::make_shared<FnNode>(std::move(fn));
}

}  // namespace fillprob
