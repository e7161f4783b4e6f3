#pragma once

// Bit-accurate model of the integer LUT datapath:
//
//   i   = segment_index(q)            integer compares against stored breakpoints
//   acc = K[i] * q + (B[i] >> e)      e = scale exponent; negative e shifts left
//
// K and B are λ-fractional-bit FXP, so acc is the output in units of
// 2^-λ * S. Overflow of the accumulator is an error, never a wrap.

#include <cstdint>
#include <stdexcept>

#include "lutfit/quant.hpp"

namespace lutfit {

class AccumulatorOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

struct DatapathConfig {
    int input_bits = 8;
    FieldWidths widths;
    int lambda = 5;
    int acc_bits = 32;

    /// Throws std::invalid_argument unless
    /// acc_bits >= input_bits + max(slope_bits, intercept_bits) + max_shift
    /// and every width lies in [2, 62].
    void validate(int max_shift = 0) const;

    bool operator==(const DatapathConfig&) const = default;
};

/// Position of q among the stored integer breakpoints.
std::size_t segment_index(std::int64_t q, const QPwlTable& table);

/// B >> shift with ties rounded away from zero; negative shifts go left.
std::int64_t shift_round(std::int64_t value, int shift);

struct FxpValue {
    std::int64_t raw = 0;
    int frac_bits = 0;

    double real() const;
};

/// Integer evaluation. The result carries the implicit input scale:
/// S * result.real() approximates f(S * q).
FxpValue int_pwl(std::int64_t q, const QPwlTable& table, const DatapathConfig& cfg);

/// S * int_pwl(q).real().
double int_pwl_dequantized(std::int64_t q, const QPwlTable& table, const DatapathConfig& cfg);

}  // namespace lutfit
