#include "lutfit/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace lutfit {

QuantSpec QuantSpec::signed_bits(int bits) {
    if (bits < 2 || bits > 32) throw std::invalid_argument("quant.bits must lie in [2, 32]");
    const std::int64_t half = std::int64_t{1} << (bits - 1);
    return {bits, true, -half, half - 1};
}

QuantSpec QuantSpec::unsigned_bits(int bits) {
    if (bits < 1 || bits > 32) throw std::invalid_argument("quant.bits must lie in [1, 32]");
    return {bits, false, 0, (std::int64_t{1} << bits) - 1};
}

double PowTwoScale::value() const { return std::ldexp(1.0, exponent); }

std::int64_t round_half_away(double x) { return static_cast<std::int64_t>(std::round(x)); }

std::int64_t saturate(std::int64_t v, int bits, bool* saturated) {
    const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
    const std::int64_t lo = -hi - 1;
    const std::int64_t out = std::clamp(v, lo, hi);
    if (saturated) *saturated = out != v;
    return out;
}

std::int64_t quantize(double x, PowTwoScale scale, const QuantSpec& qs) {
    const double scaled = std::ldexp(x, -scale.exponent);
    // Clip before converting so huge inputs never overflow the integer cast.
    const double clipped =
        std::clamp(scaled, static_cast<double>(qs.q_lo), static_cast<double>(qs.q_hi));
    return round_half_away(clipped);
}

double dequantize(std::int64_t q, PowTwoScale scale) {
    return std::ldexp(static_cast<double>(q), scale.exponent);
}

std::int64_t to_fxp(double x, int frac_bits) { return round_half_away(std::ldexp(x, frac_bits)); }

double from_fxp(std::int64_t raw, int frac_bits) {
    return std::ldexp(static_cast<double>(raw), -frac_bits);
}

namespace {

std::int64_t store_field(double value, int lambda, int bits, const char* field, std::size_t index,
                         std::vector<std::string>& warnings) {
    bool hit = false;
    const std::int64_t raw = saturate(to_fxp(value, lambda), bits, &hit);
    if (hit) {
        warnings.push_back(std::string(field) + "[" + std::to_string(index) + "] saturated to " +
                           std::to_string(bits) + " bits");
    }
    return raw;
}

// Store slopes/intercepts and collapse equal breakpoints.
QPwlTable assemble(const PwlTable& table, int lambda, const FieldWidths& widths,
                   const std::vector<std::int64_t>& bps, QPwlTable out) {
    out.kind = table.spec.kind();
    out.lambda = lambda;
    out.widths = widths;

    std::vector<int> keep{0};
    for (std::size_t i = 0; i < bps.size(); ++i) {
        if (!out.breakpoints.empty() && bps[i] == out.breakpoints.back()) {
            out.warnings.push_back("breakpoint " + std::to_string(i) + " collides with " +
                                   std::to_string(i - 1) + " at " + std::to_string(bps[i]) +
                                   "; entry " + std::to_string(keep.back()) + " dropped");
            keep.back() = static_cast<int>(i + 1);
        } else {
            out.breakpoints.push_back(bps[i]);
            keep.push_back(static_cast<int>(i + 1));
        }
    }
    for (int e : keep) {
        const auto idx = static_cast<std::size_t>(e);
        out.slopes.push_back(
            store_field(table.slopes[idx], lambda, widths.slope_bits, "slope", idx, out.warnings));
        out.intercepts.push_back(store_field(table.intercepts[idx], lambda, widths.intercept_bits,
                                             "intercept", idx, out.warnings));
    }
    out.source_entry = std::move(keep);
    return out;
}

void check_lambda(int lambda) {
    if (lambda < 0 || lambda > 30) throw std::invalid_argument("lambda must lie in [0, 30]");
}

}  // namespace

QPwlTable quantize_table(const PwlTable& table, PowTwoScale scale, const QuantSpec& qs,
                         int lambda, const FieldWidths& widths) {
    check_lambda(lambda);
    if (!table.spec.scale_carrying()) {
        throw std::invalid_argument(std::string(table.spec.name()) +
                                    " is a wide-range operator; use fxp_quantize_table");
    }
    std::vector<std::int64_t> bps;
    bps.reserve(table.breakpoints.size());
    for (double p : table.breakpoints) bps.push_back(quantize(p, scale, qs));

    QPwlTable out;
    out.encoding = BreakpointEncoding::Integer;
    out.scale = scale;
    return assemble(table, lambda, widths, bps, std::move(out));
}

QPwlTable fxp_quantize_table(const PwlTable& table, int lambda, const FieldWidths& widths) {
    check_lambda(lambda);
    std::vector<std::string> warnings;
    std::vector<std::int64_t> bps;
    bps.reserve(table.breakpoints.size());
    for (std::size_t i = 0; i < table.breakpoints.size(); ++i) {
        bps.push_back(store_field(table.breakpoints[i], lambda, widths.breakpoint_bits,
                                  "breakpoint", i, warnings));
    }
    QPwlTable out;
    out.encoding = BreakpointEncoding::FixedPoint;
    out.warnings = std::move(warnings);
    return assemble(table, lambda, widths, bps, std::move(out));
}

double eval_fxp(const QPwlTable& table, double x) {
    if (table.encoding != BreakpointEncoding::FixedPoint) {
        throw std::invalid_argument("eval_fxp needs a fixed-point breakpoint table");
    }
    // Compare in the raw domain: x >= raw / 2^λ  <=>  x * 2^λ >= raw (exact scaling).
    const double xs = std::ldexp(x, table.lambda);
    std::size_t i = 0;
    while (i < table.breakpoints.size() && xs >= static_cast<double>(table.breakpoints[i])) ++i;
    return from_fxp(table.slopes[i], table.lambda) * x + from_fxp(table.intercepts[i], table.lambda);
}

std::vector<std::int64_t> breakpoint_deviation(std::span<const double> breakpoints,
                                               PowTwoScale scale, const QuantSpec& qs) {
    std::set<std::int64_t> out;
    for (double p : breakpoints) {
        const double scaled = std::ldexp(p, -scale.exponent);
        // Float path: S*q >= p  <=>  q >= ceil(p / S). Clamp to one past the
        // representable range so huge breakpoints do not overflow.
        const double lim_lo = static_cast<double>(qs.q_lo) - 1.0;
        const double lim_hi = static_cast<double>(qs.q_hi) + 1.0;
        const auto real_threshold =
            static_cast<std::int64_t>(std::clamp(std::ceil(scaled), lim_lo, lim_hi));
        const std::int64_t quant_threshold = quantize(p, scale, qs);
        const std::int64_t lo = std::max(std::min(real_threshold, quant_threshold), qs.q_lo);
        const std::int64_t hi = std::min(std::max(real_threshold, quant_threshold) - 1, qs.q_hi);
        for (std::int64_t q = lo; q <= hi; ++q) out.insert(q);
    }
    return {out.begin(), out.end()};
}

void RangeScalingPlan::validate() const {
    if (op != FunctionKind::Div && op != FunctionKind::Rsqrt) {
        throw std::invalid_argument("range scaling applies to div and rsqrt only");
    }
    if (!(inner.lo > 0.0 && inner.lo < inner.hi)) {
        throw std::invalid_argument("plan.inner must satisfy 0 < lo < hi");
    }
    if (sub_ranges.empty()) throw std::invalid_argument("plan.sub_ranges must not be empty");
    double edge = inner.hi;
    for (std::size_t i = 0; i < sub_ranges.size(); ++i) {
        const auto& sr = sub_ranges[i];
        const std::string where = "plan.sub_ranges[" + std::to_string(i) + "]";
        if (sr.lo != edge) throw std::invalid_argument(where + ".lo must continue the tiling");
        if (!(sr.hi > sr.lo)) throw std::invalid_argument(where + " must have lo < hi");
        if (op == FunctionKind::Rsqrt && sr.scale.exponent % 2 != 0) {
            throw std::invalid_argument(where + ".exponent must be even for rsqrt");
        }
        edge = sr.hi;
    }
    if (!std::isinf(edge)) throw std::invalid_argument("last sub-range must be open-ended");
}

RangeScalingPlan RangeScalingPlan::div_int8() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {FunctionKind::Div,
            {0.5, 4.0},
            {{4.0, 32.0, {-3}}, {32.0, 256.0, {-6}}, {256.0, inf, {-6}}}};
}

RangeScalingPlan RangeScalingPlan::rsqrt_int8() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {FunctionKind::Rsqrt,
            {0.25, 4.0},
            {{4.0, 64.0, {-4}}, {64.0, 1024.0, {-8}}, {1024.0, inf, {-12}}}};
}

RangeScalingPlan RangeScalingPlan::preset(std::string_view name) {
    if (name == "div-int8") return div_int8();
    if (name == "rsqrt-int8") return rsqrt_int8();
    throw std::invalid_argument("unknown plan preset '" + std::string(name) +
                                "' (expected div-int8 or rsqrt-int8)");
}

RangeScalingPlan RangeScalingPlan::preset_for(FunctionKind op) {
    if (op == FunctionKind::Div) return div_int8();
    if (op == FunctionKind::Rsqrt) return rsqrt_int8();
    throw std::invalid_argument("no range scaling preset for " + std::string(kind_name(op)));
}

SubRangeChoice select_subrange(double x, const RangeScalingPlan& plan) {
    if (!(x > 0.0)) throw DomainError("select_subrange: input must be positive");
    if (x < plan.inner.lo) {
        throw DomainError("select_subrange: input " + std::to_string(x) +
                          " lies below the inner range");
    }
    if (x < plan.inner.hi) return {};
    for (const auto& sr : plan.sub_ranges) {
        if (x >= sr.lo && x < sr.hi) {
            const double s = sr.scale.value();
            const double rescale = plan.op == FunctionKind::Div
                                       ? s
                                       : std::ldexp(1.0, sr.scale.exponent / 2);
            return {sr.scale, rescale};
        }
    }
    throw DomainError("select_subrange: no sub-range covers " + std::to_string(x));
}

}  // namespace lutfit
