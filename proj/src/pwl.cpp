#include "lutfit/pwl.hpp"

#include <algorithm>
#include <cmath>

namespace lutfit {

void repair_breakpoints(std::vector<double>& points, const Interval& range, double gap) {
    const std::size_t n = points.size();
    if (n == 0) return;
    const double lo = range.lo + gap;
    const double hi = range.hi - gap;
    if (static_cast<double>(n + 1) * gap > range.width()) {
        throw std::invalid_argument("breakpoint count does not fit the range at the minimum gap");
    }
    std::sort(points.begin(), points.end());
    for (auto& p : points) p = std::clamp(p, lo, hi);

    points[0] = std::max(points[0], lo);
    for (std::size_t i = 1; i < n; ++i) points[i] = std::max(points[i], points[i - 1] + gap);
    points[n - 1] = std::min(points[n - 1], hi);
    for (std::size_t i = n - 1; i-- > 0;) points[i] = std::min(points[i], points[i + 1] - gap);
}

bool breakpoints_valid(std::span<const double> points, const Interval& range, double gap) {
    // Tolerate the last bit of a repaired gap.
    const double slack = 1e-12 * std::max(1.0, std::abs(range.lo) + std::abs(range.hi));
    double prev = range.lo;
    for (double p : points) {
        if (!std::isfinite(p) || p - prev < gap - slack) return false;
        prev = p;
    }
    return range.hi - prev >= gap - slack;
}

std::size_t segment_of(std::span<const double> breakpoints, double x) {
    return static_cast<std::size_t>(
        std::upper_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin());
}

PwlTable derive_table(const NonLinSpec& spec, std::span<const double> breakpoints, double step) {
    const auto& range = spec.search_range();
    if (!breakpoints_valid(breakpoints, range, min_gap(step))) {
        throw DegenerateBreakpoints("breakpoints must be ascending and at least " +
                                    std::to_string(min_gap(step)) + " apart inside the range");
    }

    std::vector<double> nodes;
    nodes.reserve(breakpoints.size() + 2);
    nodes.push_back(range.lo);
    nodes.insert(nodes.end(), breakpoints.begin(), breakpoints.end());
    nodes.push_back(range.hi);

    PwlTable table{spec, {}, {}, {breakpoints.begin(), breakpoints.end()}};
    table.slopes.reserve(nodes.size() - 1);
    table.intercepts.reserve(nodes.size() - 1);
    double x0 = nodes[0];
    double y0 = eval_ref(spec, x0);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double x1 = nodes[i];
        const double y1 = eval_ref(spec, x1);
        const double k = (y1 - y0) / (x1 - x0);
        table.slopes.push_back(k);
        table.intercepts.push_back(y0 - k * x0);
        x0 = x1;
        y0 = y1;
    }
    return table;
}

double eval_pwl(const PwlTable& table, double x) {
    const std::size_t i = segment_of(table.breakpoints, x);
    return table.slopes[i] * x + table.intercepts[i];
}

std::size_t grid_size(const Interval& range, double step) {
    // The 1e-9 guard keeps hi itself on the grid despite (hi - lo) / step
    // landing a hair below an integer.
    return static_cast<std::size_t>(std::floor(range.width() / step + 1e-9)) + 1;
}

double fitness_mse(const PwlTable& table, double step) {
    const auto& range = table.spec.search_range();
    const std::size_t count = grid_size(range, step);
    const double norm = range.width() / step;
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double x = range.lo + static_cast<double>(k) * step;
        const double d = eval_pwl(table, x) - eval_ref(table.spec, x);
        sum += d * d;
    }
    return sum / norm;
}

SampledGrid SampledGrid::make(const NonLinSpec& spec, double step) {
    const auto& range = spec.search_range();
    const std::size_t count = grid_size(range, step);
    SampledGrid grid;
    grid.xs.reserve(count);
    grid.ys.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double x = range.lo + static_cast<double>(k) * step;
        grid.xs.push_back(x);
        grid.ys.push_back(eval_ref(spec, x));
    }
    grid.norm = range.width() / step;
    return grid;
}

double fitness_mse(const PwlTable& table, const SampledGrid& grid) {
    // Grid is ascending, so the active segment only ever moves right.
    const auto& bps = table.breakpoints;
    std::size_t seg = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.xs.size(); ++k) {
        const double x = grid.xs[k];
        while (seg < bps.size() && x >= bps[seg]) ++seg;
        const double d = table.slopes[seg] * x + table.intercepts[seg] - grid.ys[k];
        sum += d * d;
    }
    return sum / grid.norm;
}

PwlTable round_parameters(PwlTable table, int frac_bits) {
    auto round_fxp = [frac_bits](double v) {
        return std::ldexp(std::round(std::ldexp(v, frac_bits)), -frac_bits);
    };
    for (auto& k : table.slopes) k = round_fxp(k);
    for (auto& b : table.intercepts) b = round_fxp(b);
    return table;
}

}  // namespace lutfit
