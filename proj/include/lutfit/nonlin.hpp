#pragma once

// Reference implementations of the transformer non-linear operators that the
// fitter approximates, plus the metadata (search range, scaling behaviour)
// each one carries.

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lutfit {

enum class FunctionKind {
    Gelu,
    Hswish,
    Exp,
    Div,
    Rsqrt,
    Linear,  ///< f(x) = x; calibration target for the pipeline
};

/// Raised when an operator is evaluated outside its mathematical domain
/// (DIV/RSQRT at x <= 0, inputs below a scaling plan's inner range).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool operator==(const Interval&) const = default;
};

/// Canonical lowercase identifier ("gelu", "hswish", ...).
std::string_view kind_name(FunctionKind kind);

/// Inverse of kind_name. Throws std::invalid_argument for unknown names.
FunctionKind parse_kind(std::string_view name);

/// True for operators whose input arrives as S*q (GELU, HSWISH, EXP, LINEAR).
bool is_scale_carrying(FunctionKind kind);

/// Inputs the operator receives at run time: EXP sees softmax logits after
/// max subtraction (x <= 0), DIV/RSQRT positive values, the rest anything.
Interval input_domain(FunctionKind kind);

class NonLinSpec {
public:
    /// Validates the range against the operator: lo < hi, and for DIV/RSQRT
    /// strictly positive bounds. Throws std::invalid_argument.
    NonLinSpec(FunctionKind kind, Interval search_range);

    /// Default search range per operator: GELU/HSWISH (-4,4), EXP (-8,0),
    /// DIV (0.5,4), RSQRT (0.25,4), LINEAR (-4,4).
    static NonLinSpec defaults(FunctionKind kind);

    FunctionKind kind() const { return kind_; }
    const Interval& search_range() const { return range_; }
    bool scale_carrying() const { return is_scale_carrying(kind_); }
    std::string_view name() const { return kind_name(kind_); }

    bool operator==(const NonLinSpec&) const = default;

private:
    FunctionKind kind_;
    Interval range_;
};

/// Exact value of the operator in double precision. GELU uses the erf form.
/// Throws DomainError for DIV/RSQRT at x <= 0 and std::invalid_argument for
/// non-finite x.
double eval_ref(FunctionKind kind, double x);

inline double eval_ref(const NonLinSpec& spec, double x) { return eval_ref(spec.kind(), x); }

}  // namespace lutfit
