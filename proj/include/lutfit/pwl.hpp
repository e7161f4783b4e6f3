#pragma once

// Real-valued piecewise-linear tables.
//
// An N-entry table holds N (slope, intercept) pairs and N-1 ascending
// breakpoints. Entry selection:
//   x <  p[0]            -> entry 0
//   p[i-1] <= x < p[i]   -> entry i
//   x >= p[N-2]          -> entry N-1
// The outermost entries extend without bound.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "lutfit/nonlin.hpp"

namespace lutfit {

inline constexpr double kDefaultGridStep = 0.01;

/// Smallest permitted distance between adjacent breakpoints (and between the
/// outer breakpoints and the range ends): two grid steps.
inline constexpr double min_gap(double step = kDefaultGridStep) { return 2.0 * step; }

/// Raised when breakpoints are too close to build a table from.
class DegenerateBreakpoints : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sort, clip into the range and spread points so every gap (including the
/// range ends as virtual neighbours) is at least `gap`. The result is the
/// closest such set in the sense that untouched points stay where they were.
/// Throws std::invalid_argument if (n + 1) * gap exceeds the range width.
void repair_breakpoints(std::vector<double>& points, const Interval& range, double gap);

/// True when `points` is strictly ascending, lies inside `range` and honours
/// `gap` between neighbours and to both range ends.
bool breakpoints_valid(std::span<const double> points, const Interval& range, double gap);

struct PwlTable {
    NonLinSpec spec;
    std::vector<double> slopes;
    std::vector<double> intercepts;
    std::vector<double> breakpoints;

    std::size_t entries() const { return slopes.size(); }
};

/// Index of the entry that covers x.
std::size_t segment_of(std::span<const double> breakpoints, double x);

/// Build the table that interpolates f at each breakpoint, using the range
/// ends as virtual outer nodes. Throws DegenerateBreakpoints when any gap is
/// below min_gap(step).
PwlTable derive_table(const NonLinSpec& spec, std::span<const double> breakpoints,
                      double step = kDefaultGridStep);

double eval_pwl(const PwlTable& table, double x);

/// Mean squared error against the exact operator on the grid
/// x = lo, lo + step, ... (points past hi excluded), normalised by
/// (hi - lo) / step.
double fitness_mse(const PwlTable& table, double step = kDefaultGridStep);

/// Number of grid samples fitness_mse visits.
std::size_t grid_size(const Interval& range, double step);

/// The fitness grid with the exact operator values cached, for repeated
/// scoring of candidate tables over the same range.
struct SampledGrid {
    std::vector<double> xs;
    std::vector<double> ys;
    double norm = 1.0;

    static SampledGrid make(const NonLinSpec& spec, double step = kDefaultGridStep);
};

/// Same value as fitness_mse(table, step) when `grid` was built with that step.
double fitness_mse(const PwlTable& table, const SampledGrid& grid);

/// Round every slope and intercept to the nearest multiple of 2^-frac_bits
/// (ties away from zero).
PwlTable round_parameters(PwlTable table, int frac_bits);

}  // namespace lutfit
