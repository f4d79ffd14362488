#pragma once

#include <stdexcept>
#include <string>

namespace fillprob {

// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inadmissible order event for the current book state.
class InvalidEvent : public Error {
public:
    explicit InvalidEvent(const std::string& msg) : Error("invalid event: " + msg) {}
};

// Event kind/level combination that carries no intensity (e.g. market order
// away from the best quote).
class UnsupportedEvent : public Error {
public:
    explicit UnsupportedEvent(const std::string& msg) : Error("unsupported event: " + msg) {}
};

// Continued fraction failed to meet tolerance within the term budget.
class NoConvergence : public Error {
public:
    explicit NoConvergence(int max_terms)
        : Error("continued fraction did not converge within " + std::to_string(max_terms) +
                " terms"),
          max_terms(max_terms) {}
    int max_terms;
};

// Evaluation at an argument where the transform is undefined (pole, zero
// prefactor rate, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

// Laplace inversion produced a value outside plausible bounds or could not
// be evaluated.
class InversionError : public Error {
public:
    explicit InversionError(const std::string& msg) : Error("inversion error: " + msg) {}
};

class TransformEvalError : public Error {
public:
    explicit TransformEvalError(const std::string& msg)
        : Error("transform evaluation: " + msg) {}
};

class NonFiniteResult : public Error {
public:
    explicit NonFiniteResult(const std::string& msg) : Error("non-finite result: " + msg) {}
};

// COS truncation interval does not contain the requested evaluation point.
class IntervalError : public Error {
public:
    explicit IntervalError(const std::string& msg) : Error("interval error: " + msg) {}
};

// Cumulant finite differences came out non-finite or degenerate.
class CumulantError : public Error {
public:
    explicit CumulantError(const std::string& msg) : Error("cumulant error: " + msg) {}
};

// The queue race cannot be represented on the configured price grid.
class GridTooSmall : public Error {
public:
    explicit GridTooSmall(const std::string& msg) : Error("grid too small: " + msg) {}
};

// Simulation reached a state with zero total rate before any terminal event.
class Stalled : public Error {
public:
    explicit Stalled(const std::string& msg) : Error("stalled: " + msg) {}
};

// w_distribution masses failed the conservation check.
class MassLeak : public Error {
public:
    explicit MassLeak(const std::string& msg) : Error("mass leak: " + msg) {}
};

// Stationary-distribution series does not converge within the truncation.
class DivergentSeries : public Error {
public:
    explicit DivergentSeries(const std::string& msg) : Error("divergent series: " + msg) {}
};

// Calibration input inconsistencies.
class EmptySpreadCell : public Error {
public:
    explicit EmptySpreadCell(const std::string& msg) : Error("empty spread cell: " + msg) {}
};

class ZeroDepth : public Error {
public:
    explicit ZeroDepth(const std::string& msg) : Error("zero depth: " + msg) {}
};

class EmptyCell : public Error {
public:
    explicit EmptyCell(const std::string& msg) : Error("empty cell: " + msg) {}
};

class KeyMismatch : public Error {
public:
    explicit KeyMismatch(const std::string& msg) : Error("key mismatch: " + msg) {}
};

// Malformed input files (CSV/JSON).
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error("input error: " + msg) {}
};

}  // namespace fillprob
