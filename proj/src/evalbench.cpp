#include "lutfit/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lutfit {

std::vector<int> default_exponents() { return {-6, -5, -4, -3, -2, -1, 0}; }

std::vector<std::int64_t> sample_codes(const Interval& range, PowTwoScale scale,
                                       const QuantSpec& qs) {
    const double lo = std::ceil(std::ldexp(range.lo, -scale.exponent));
    const double hi = std::floor(std::ldexp(range.hi, -scale.exponent));
    std::vector<std::int64_t> codes;
    const auto first = static_cast<std::int64_t>(std::max(lo, static_cast<double>(qs.q_lo)));
    const auto last = static_cast<std::int64_t>(std::min(hi, static_cast<double>(qs.q_hi)));
    for (std::int64_t q = first; q <= last; ++q) codes.push_back(q);
    return codes;
}

double quant_aware_mse(const PwlTable& table, PowTwoScale scale, const QuantSpec& qs,
                       const DatapathConfig& datapath) {
    datapath.validate(std::max(-scale.exponent, 0));
    const QPwlTable qt = quantize_table(table, scale, qs, datapath.lambda, datapath.widths);
    const auto codes = sample_codes(input_domain(table.spec.kind()), scale, qs);
    if (codes.empty()) throw std::invalid_argument("quant_aware_mse: no codes fall in the range");
    double sum = 0.0;
    for (std::int64_t q : codes) {
        const double d =
            int_pwl_dequantized(q, qt, datapath) - eval_ref(table.spec, dequantize(q, scale));
        sum += d * d;
    }
    return sum / static_cast<double>(codes.size());
}

double ScaleSweepReport::subset_sum(const std::vector<int>& exponents) const {
    double sum = 0.0;
    for (const auto& r : per_scale) {
        if (std::find(exponents.begin(), exponents.end(), r.exponent) != exponents.end()) {
            sum += r.mse;
        }
    }
    return sum;
}

ScaleSweepReport sweep_scales(const PwlTable& table, const std::vector<int>& exponents,
                              const QuantSpec& qs, const DatapathConfig& datapath,
                              std::string method) {
    if (exponents.empty()) throw std::invalid_argument("sweep_scales: no exponents");
    ScaleSweepReport report;
    report.kind = table.spec.kind();
    report.entry_count = table.entries();
    report.method = std::move(method);
    for (int e : exponents) {
        report.per_scale.push_back({e, quant_aware_mse(table, PowTwoScale{e}, qs, datapath)});
    }
    double sum = 0.0;
    for (const auto& r : report.per_scale) sum += r.mse;
    report.average_mse = sum / static_cast<double>(report.per_scale.size());
    return report;
}

std::vector<double> wide_range_samples(const RangeScalingPlan& plan, std::size_t per_subrange) {
    std::vector<double> xs;
    const std::size_t inner = grid_size(plan.inner, kDefaultGridStep);
    for (std::size_t k = 0; k < inner; ++k) {
        const double x = plan.inner.lo + static_cast<double>(k) * kDefaultGridStep;
        if (x < plan.inner.hi) xs.push_back(x);
    }
    for (const auto& sr : plan.sub_ranges) {
        if (std::isinf(sr.hi)) continue;
        const double width = sr.hi - sr.lo;
        for (std::size_t k = 0; k < per_subrange; ++k) {
            xs.push_back(sr.lo + width * static_cast<double>(k) / static_cast<double>(per_subrange));
        }
    }
    return xs;
}

double eval_scaled(const QPwlTable& table, const RangeScalingPlan& plan, double x) {
    const auto choice = select_subrange(x, plan);
    return choice.rescale * eval_fxp(table, std::ldexp(x, choice.scale.exponent));
}

double wide_range_mse(const PwlTable& table, const RangeScalingPlan& plan, int lambda,
                      const FieldWidths& widths, std::size_t per_subrange) {
    if (table.spec.scale_carrying()) {
        throw std::invalid_argument("wide_range_mse: " + std::string(table.spec.name()) +
                                    " is scale-carrying; use quant_aware_mse");
    }
    if (table.spec.kind() != plan.op) {
        throw std::invalid_argument("wide_range_mse: plan operator does not match the table");
    }
    plan.validate();
    const QPwlTable qt = fxp_quantize_table(table, lambda, widths);
    const auto xs = wide_range_samples(plan, per_subrange);
    double sum = 0.0;
    for (double x : xs) {
        const double d = eval_scaled(qt, plan, x) - eval_ref(table.spec, x);
        sum += d * d;
    }
    return sum / static_cast<double>(xs.size());
}

OracleResult brute_force_oracle(const NonLinSpec& spec, int n_breakpoints, double grid_step,
                                std::size_t budget, double step) {
    if (n_breakpoints < 1 || n_breakpoints > 2) {
        throw std::invalid_argument("brute_force_oracle supports 1 or 2 breakpoints");
    }
    if (!(grid_step > 0.0)) throw std::invalid_argument("brute_force_oracle: grid_step must be > 0");
    const auto& range = spec.search_range();
    const double gap = min_gap(step);

    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor(range.width() / grid_step + 1e-9));
    for (std::size_t k = 1; k < count + 1; ++k) {
        const double x = range.lo + static_cast<double>(k) * grid_step;
        if (x - range.lo >= gap && range.hi - x >= gap) grid.push_back(x);
    }
    const std::size_t n = grid.size();
    const std::size_t combos = n_breakpoints == 1 ? n : n * (n - 1) / 2;
    if (combos > budget) {
        throw OracleBudgetExceeded("brute_force_oracle: " + std::to_string(combos) +
                                   " candidates exceed the budget of " + std::to_string(budget));
    }
    if (combos == 0) throw std::invalid_argument("brute_force_oracle: grid has no candidates");

    const SampledGrid samples = SampledGrid::make(spec, step);
    OracleResult best{PwlTable{spec, {}, {}, {}}, std::numeric_limits<double>::infinity(), 0};
    auto consider = [&](const std::vector<double>& bps) {
        if (!breakpoints_valid(bps, range, gap)) return;
        ++best.candidates;
        PwlTable t = derive_table(spec, bps, step);
        const double mse = fitness_mse(t, samples);
        if (mse < best.mse) {
            best.mse = mse;
            best.table = std::move(t);
        }
    };
    if (n_breakpoints == 1) {
        for (double a : grid) consider({a});
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) consider({grid[i], grid[j]});
        }
    }
    return best;
}

}  // namespace lutfit
