#pragma once

// Accuracy evaluation of fitted tables under quantized inputs.
//
// Scale-carrying operators are scored on the dequantized grid x = S*q: every
// integer q in [q_lo, q_hi] whose x lies in the operator's input domain is
// pushed through the integer datapath and compared with the exact operator.
// Outside the search range the outer entries extrapolate.
// Wide-range operators are scored through their range-scaling plan.

#include <cstdint>
#include <string>
#include <vector>

#include "lutfit/intsim.hpp"
#include "lutfit/pwl.hpp"
#include "lutfit/quant.hpp"

namespace lutfit {

/// Default sweep: exponents -6 .. 0.
std::vector<int> default_exponents();

/// Integers q in [qs.q_lo, qs.q_hi] with S*q inside `range`.
std::vector<std::int64_t> sample_codes(const Interval& range, PowTwoScale scale,
                                       const QuantSpec& qs);

double quant_aware_mse(const PwlTable& table, PowTwoScale scale, const QuantSpec& qs,
                       const DatapathConfig& datapath);

struct ScaleResult {
    int exponent = 0;
    double mse = 0.0;
};

struct ScaleSweepReport {
    FunctionKind kind = FunctionKind::Linear;
    std::size_t entry_count = 0;
    std::string method;  ///< "gaussian" or "rm"
    std::vector<ScaleResult> per_scale;
    double average_mse = 0.0;

    /// Sum of per-scale MSE over the given exponents (missing ones ignored).
    double subset_sum(const std::vector<int>& exponents) const;
};

ScaleSweepReport sweep_scales(const PwlTable& table, const std::vector<int>& exponents,
                              const QuantSpec& qs, const DatapathConfig& datapath,
                              std::string method = {});

/// Sample points for a plan: the inner range at step 0.01 (lo inclusive,
/// points past hi excluded) followed by `per_subrange` uniform points
/// lo + k (hi - lo) / per_subrange for every finite sub-range.
std::vector<double> wide_range_samples(const RangeScalingPlan& plan, std::size_t per_subrange);

/// Evaluate a FixedPoint table through the plan: rescale * pwl(x * S').
double eval_scaled(const QPwlTable& table, const RangeScalingPlan& plan, double x);

double wide_range_mse(const PwlTable& table, const RangeScalingPlan& plan, int lambda,
                      const FieldWidths& widths = {}, std::size_t per_subrange = 1024);

class OracleBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleResult {
    PwlTable table;
    double mse = 0.0;
    std::size_t candidates = 0;
};

/// Exhaustive search over ascending breakpoint tuples drawn from the grid
/// lo + k * grid_step strictly inside the range (honouring min_gap(step)).
/// Supports 1 or 2 breakpoints; refuses more than `budget` candidates.
/// Ties keep the first candidate in lexicographic order.
OracleResult brute_force_oracle(const NonLinSpec& spec, int n_breakpoints, double grid_step,
                                std::size_t budget = 100000, double step = kDefaultGridStep);

}  // namespace lutfit
