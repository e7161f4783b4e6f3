#pragma once

// Integer quantization with power-of-two scales, table quantization for the
// integer LUT datapath, and multi-range input scaling for DIV/RSQRT.
//
// All rounding is round-half-away-from-zero.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lutfit/nonlin.hpp"
#include "lutfit/pwl.hpp"

namespace lutfit {

struct QuantSpec {
    int bits = 8;
    bool is_signed = true;
    std::int64_t q_lo = -128;
    std::int64_t q_hi = 127;

    static QuantSpec signed_bits(int bits);
    static QuantSpec unsigned_bits(int bits);

    bool operator==(const QuantSpec&) const = default;
};

/// S = 2^exponent.
struct PowTwoScale {
    int exponent = 0;

    double value() const;
    bool operator==(const PowTwoScale&) const = default;
};

std::int64_t round_half_away(double x);

/// Saturate v into the two's-complement range of `bits`.
std::int64_t saturate(std::int64_t v, int bits, bool* saturated = nullptr);

std::int64_t quantize(double x, PowTwoScale scale, const QuantSpec& qs);
double dequantize(std::int64_t q, PowTwoScale scale);

/// Raw fixed-point encoding: round(x * 2^frac_bits).
std::int64_t to_fxp(double x, int frac_bits);
double from_fxp(std::int64_t raw, int frac_bits);

enum class BreakpointEncoding {
    Integer,     ///< quantized inputs q, compared against integer q
    FixedPoint,  ///< raw FXP with `lambda` fractional bits
};

/// Bit-widths of the stored LUT fields.
struct FieldWidths {
    int slope_bits = 8;
    int intercept_bits = 16;
    int breakpoint_bits = 8;

    bool operator==(const FieldWidths&) const = default;
};

/// The integer LUT as stored in hardware. Slopes and intercepts are raw FXP
/// integers with `lambda` fractional bits; intercepts are stored unshifted
/// (the datapath shifts them by the input scale at run time).
struct QPwlTable {
    FunctionKind kind = FunctionKind::Linear;
    int lambda = 5;
    FieldWidths widths;
    BreakpointEncoding encoding = BreakpointEncoding::Integer;
    /// Input scale; present for Integer encoding only.
    std::optional<PowTwoScale> scale;
    std::vector<std::int64_t> slopes;
    std::vector<std::int64_t> intercepts;
    std::vector<std::int64_t> breakpoints;
    /// Entry index in the source table for each stored entry; differs from
    /// the position once colliding breakpoints have been collapsed.
    std::vector<int> source_entry;
    /// Collapsed breakpoints and saturated fields.
    std::vector<std::string> warnings;

    std::size_t entries() const { return slopes.size(); }
    bool operator==(const QPwlTable&) const = default;
};

/// Quantize a table for a scale-carrying operator: breakpoints become
/// clip(round(p / S)), slopes and intercepts become λ-bit FXP. Equal
/// quantized breakpoints are collapsed (the empty entry between them is
/// dropped) and reported in `warnings`.
QPwlTable quantize_table(const PwlTable& table, PowTwoScale scale, const QuantSpec& qs,
                         int lambda, const FieldWidths& widths = {});

/// Quantize a table for a wide-range operator: breakpoints, slopes and
/// intercepts all become λ-bit FXP saturated to their field widths.
QPwlTable fxp_quantize_table(const PwlTable& table, int lambda, const FieldWidths& widths = {});

/// Evaluate a FixedPoint-encoded table on a real input using its stored
/// (dequantized) values.
double eval_fxp(const QPwlTable& table, double x);

/// Integers q whose entry choice under the quantized breakpoints differs from
/// the choice for S*q under the real breakpoints. Derived from the
/// breakpoint values alone: for each p_i, the q between ceil(p_i / S) and
/// the quantized threshold. Sorted, unique, inside [q_lo, q_hi].
std::vector<std::int64_t> breakpoint_deviation(std::span<const double> breakpoints,
                                               PowTwoScale scale, const QuantSpec& qs);

struct SubRange {
    double lo = 0.0;
    double hi = 0.0;  ///< +infinity for the open-ended last range
    PowTwoScale scale;

    bool operator==(const SubRange&) const = default;
};

struct RangeScalingPlan {
    FunctionKind op = FunctionKind::Div;
    Interval inner;
    std::vector<SubRange> sub_ranges;

    /// Throws std::invalid_argument if the ranges do not tile [inner.hi, inf)
    /// in ascending order or the op is not DIV/RSQRT.
    void validate() const;

    static RangeScalingPlan div_int8();
    static RangeScalingPlan rsqrt_int8();
    /// "div-int8" or "rsqrt-int8".
    static RangeScalingPlan preset(std::string_view name);
    static RangeScalingPlan preset_for(FunctionKind op);

    bool operator==(const RangeScalingPlan&) const = default;
};

struct SubRangeChoice {
    PowTwoScale scale;
    /// Output multiplier: S' for DIV, sqrt(S') for RSQRT, 1 inside the inner range.
    double rescale = 1.0;
};

/// Inner range is [lo, hi); sub-ranges are [lo, hi). Throws DomainError for
/// x <= 0 or x below the inner range.
SubRangeChoice select_subrange(double x, const RangeScalingPlan& plan);

}  // namespace lutfit
