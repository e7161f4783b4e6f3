#include "lutfit/nonlin.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lutfit {

namespace {

struct KindEntry {
    FunctionKind kind;
    std::string_view name;
    Interval range;
};

constexpr std::array<KindEntry, 6> kKinds{{
    {FunctionKind::Gelu, "gelu", {-4.0, 4.0}},
    {FunctionKind::Hswish, "hswish", {-4.0, 4.0}},
    {FunctionKind::Exp, "exp", {-8.0, 0.0}},
    {FunctionKind::Div, "div", {0.5, 4.0}},
    {FunctionKind::Rsqrt, "rsqrt", {0.25, 4.0}},
    {FunctionKind::Linear, "linear", {-4.0, 4.0}},
}};

const KindEntry& entry(FunctionKind kind) {
    for (const auto& e : kKinds) {
        if (e.kind == kind) return e;
    }
    throw std::invalid_argument("unknown function kind");
}

}  // namespace

std::string_view kind_name(FunctionKind kind) { return entry(kind).name; }

FunctionKind parse_kind(std::string_view name) {
    for (const auto& e : kKinds) {
        if (e.name == name) return e.kind;
    }
    throw std::invalid_argument("unknown function '" + std::string(name) +
                                "' (expected gelu, hswish, exp, div, rsqrt or linear)");
}

bool is_scale_carrying(FunctionKind kind) {
    return kind != FunctionKind::Div && kind != FunctionKind::Rsqrt;
}

Interval input_domain(FunctionKind kind) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind) {
        case FunctionKind::Exp:
            return {-inf, 0.0};
        case FunctionKind::Div:
        case FunctionKind::Rsqrt:
            return {std::numeric_limits<double>::denorm_min(), inf};
        default:
            return {-inf, inf};
    }
}

NonLinSpec::NonLinSpec(FunctionKind kind, Interval search_range)
    : kind_(kind), range_(search_range) {
    if (!std::isfinite(range_.lo) || !std::isfinite(range_.hi) || !(range_.lo < range_.hi)) {
        throw std::invalid_argument("search range must be finite with lo < hi");
    }
    if (!is_scale_carrying(kind_) && range_.lo <= 0.0) {
        throw std::invalid_argument(std::string(kind_name(kind_)) +
                                    " search range must be strictly positive");
    }
}

NonLinSpec NonLinSpec::defaults(FunctionKind kind) { return NonLinSpec(kind, entry(kind).range); }

double eval_ref(FunctionKind kind, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("eval_ref: non-finite input");
    switch (kind) {
        case FunctionKind::Gelu:
            return 0.5 * x * std::erfc(-x * 0.70710678118654752440);
        case FunctionKind::Hswish:
            return x * std::clamp(x + 3.0, 0.0, 6.0) / 6.0;
        case FunctionKind::Exp:
            return std::exp(x);
        case FunctionKind::Div:
            if (x <= 0.0) throw DomainError("div: input must be positive");
            return 1.0 / x;
        case FunctionKind::Rsqrt:
            if (x <= 0.0) throw DomainError("rsqrt: input must be positive");
            return 1.0 / std::sqrt(x);
        case FunctionKind::Linear:
            return x;
    }
    throw std::invalid_argument("unknown function kind");
}

}  // namespace lutfit
