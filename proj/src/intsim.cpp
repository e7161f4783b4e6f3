#include "lutfit/intsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lutfit {

namespace {
// Shadow width for overflow checks; nothing the datapath computes exceeds it.
__extension__ typedef __int128 wide_int;
}  // namespace

void DatapathConfig::validate(int max_shift) const {
    auto check = [](const char* field, int v) {
        if (v < 2 || v > 62) {
            throw std::invalid_argument(std::string("datapath.") + field + " must lie in [2, 62]");
        }
    };
    check("input_bits", input_bits);
    check("slope_bits", widths.slope_bits);
    check("intercept_bits", widths.intercept_bits);
    check("breakpoint_bits", widths.breakpoint_bits);
    check("acc_bits", acc_bits);
    if (lambda < 0 || lambda > 30) throw std::invalid_argument("datapath.lambda must lie in [0, 30]");
    const int need =
        input_bits + std::max(widths.slope_bits, widths.intercept_bits) + std::max(max_shift, 0);
    if (acc_bits < need) {
        throw std::invalid_argument("datapath.acc_bits = " + std::to_string(acc_bits) +
                                    " is below the required " + std::to_string(need));
    }
}

std::size_t segment_index(std::int64_t q, const QPwlTable& table) {
    std::size_t i = 0;
    while (i < table.breakpoints.size() && q >= table.breakpoints[i]) ++i;
    return i;
}

std::int64_t shift_round(std::int64_t value, int shift) {
    if (shift <= 0) return value * (std::int64_t{1} << -shift);
    if (shift >= 63) return 0;
    const std::int64_t mag = value < 0 ? -value : value;
    const std::int64_t half = std::int64_t{1} << (shift - 1);
    const std::int64_t out = (mag + half) >> shift;
    return value < 0 ? -out : out;
}

double FxpValue::real() const { return std::ldexp(static_cast<double>(raw), -frac_bits); }

FxpValue int_pwl(std::int64_t q, const QPwlTable& table, const DatapathConfig& cfg) {
    if (table.encoding != BreakpointEncoding::Integer || !table.scale) {
        throw std::invalid_argument("int_pwl needs an integer-breakpoint table");
    }
    if (table.lambda != cfg.lambda) {
        throw std::invalid_argument("int_pwl: table lambda differs from datapath lambda");
    }
    const wide_int acc_hi = (wide_int{1} << (cfg.acc_bits - 1)) - 1;
    const wide_int acc_lo = -acc_hi - 1;
    auto fits = [&](wide_int v) { return v >= acc_lo && v <= acc_hi; };

    const std::size_t i = segment_index(q, table);
    const int exponent = table.scale->exponent;
    if (exponent < 0 && -exponent >= cfg.acc_bits) {
        throw AccumulatorOverflow("int_pwl: intercept shift exceeds accumulator width");
    }
    const wide_int product = wide_int{table.slopes[i]} * q;
    const wide_int shifted = exponent < 0
                                 ? wide_int{table.intercepts[i]} * (wide_int{1} << -exponent)
                                 : wide_int{shift_round(table.intercepts[i], exponent)};
    if (!fits(product) || !fits(shifted) || !fits(product + shifted)) {
        throw AccumulatorOverflow("int_pwl: accumulator overflow at q = " + std::to_string(q) +
                                  " (acc_bits = " + std::to_string(cfg.acc_bits) + ")");
    }
    return {static_cast<std::int64_t>(product + shifted), table.lambda};
}

double int_pwl_dequantized(std::int64_t q, const QPwlTable& table, const DatapathConfig& cfg) {
    return std::ldexp(int_pwl(q, table, cfg).real(), table.scale->exponent);
}

}  // namespace lutfit
