#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lutfit/pwl.hpp"
#include "oracles.hpp"

using namespace lutfit;

namespace {

double naive_mse(const PwlTable& t, double step) {
    const auto& r = t.spec.search_range();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0;; ++k) {
        const double x = r.lo + static_cast<double>(k) * step;
        if (x > r.hi + 1e-9) break;
        const double d = oracle::pwl_naive(t.slopes, t.intercepts, t.breakpoints, x) -
                         eval_ref(t.spec, x);
        sum += d * d;
        ++n;
    }
    (void)n;
    return sum / (r.width() / step);
}

}  // namespace

TEST(Pwl, ExpSingleBreakpointTable) {
    const auto spec = NonLinSpec::defaults(FunctionKind::Exp);
    const std::vector<double> bps{-4.0};
    const auto t = derive_table(spec, bps);
    ASSERT_EQ(t.entries(), 2u);
    EXPECT_NEAR(t.slopes[0], 0.004495044065207917, 1e-15);
    EXPECT_NEAR(t.intercepts[0], 0.03629581514956585, 1e-15);
    EXPECT_NEAR(t.slopes[1], 0.24542109027781645, 1e-15);
    EXPECT_NEAR(t.intercepts[1], 1.0, 1e-15);
    EXPECT_NEAR(fitness_mse(t), 0.042583874882084034, 1e-12);
}

TEST(Pwl, SegmentSelection) {
    const std::vector<double> p{-1.0, 0.0, 2.0};
    EXPECT_EQ(segment_of(p, -5.0), 0u);
    EXPECT_EQ(segment_of(p, -1.0), 1u);
    EXPECT_EQ(segment_of(p, -0.5), 1u);
    EXPECT_EQ(segment_of(p, 0.0), 2u);
    EXPECT_EQ(segment_of(p, 1.999), 2u);
    EXPECT_EQ(segment_of(p, 2.0), 3u);
    EXPECT_EQ(segment_of(p, 100.0), 3u);
}

TEST(Pwl, LinearTargetIsExact) {
    const auto spec = NonLinSpec::defaults(FunctionKind::Linear);
    const auto t = derive_table(spec, std::vector<double>{-2.0, -0.5, 1.0, 3.0});
    for (std::size_t i = 0; i < t.entries(); ++i) {
        EXPECT_NEAR(t.slopes[i], 1.0, 1e-14);
        EXPECT_NEAR(t.intercepts[i], 0.0, 1e-14);
    }
    EXPECT_LT(fitness_mse(t), 1e-26);
}

TEST(Pwl, ContinuityAtBreakpoints) {
    for (auto kind : {FunctionKind::Gelu, FunctionKind::Hswish, FunctionKind::Exp,
                      FunctionKind::Div, FunctionKind::Rsqrt}) {
        const auto spec = NonLinSpec::defaults(kind);
        const auto& r = spec.search_range();
        std::vector<double> bps;
        for (int i = 1; i <= 7; ++i) bps.push_back(r.lo + r.width() * i / 8.0);
        const auto t = derive_table(spec, bps);
        for (std::size_t i = 0; i < bps.size(); ++i) {
            const double x = bps[i];
            const double left = t.slopes[i] * x + t.intercepts[i];
            const double right = t.slopes[i + 1] * x + t.intercepts[i + 1];
            EXPECT_NEAR(left, right, 1e-12) << kind_name(kind);
            EXPECT_NEAR(right, eval_ref(spec, x), 1e-12) << kind_name(kind);
        }
        EXPECT_NEAR(eval_pwl(t, r.lo), eval_ref(spec, r.lo), 1e-12);
        EXPECT_NEAR(eval_pwl(t, r.hi), eval_ref(spec, r.hi), 1e-12);
    }
}

TEST(Pwl, FitnessMatchesNaiveOracle) {
    const auto spec = NonLinSpec::defaults(FunctionKind::Gelu);
    const auto t = derive_table(spec, std::vector<double>{-2.5, -1.0, -0.3, 0.4, 1.1, 2.0, 3.1});
    EXPECT_NEAR(fitness_mse(t), naive_mse(t, kDefaultGridStep), 1e-15);
    const auto grid = SampledGrid::make(spec);
    EXPECT_NEAR(fitness_mse(t, grid), fitness_mse(t), 1e-15);
    EXPECT_EQ(grid.xs.size(), grid_size(spec.search_range(), kDefaultGridStep));
    EXPECT_EQ(grid.xs.size(), 801u);
}

TEST(Pwl, NestedRefinementDoesNotIncreaseErrorForConvexTarget) {
    // EXP is convex, so chords lie above it; adding a node can only shrink the gap.
    const auto spec = NonLinSpec::defaults(FunctionKind::Exp);
    std::vector<double> bps{-4.0};
    double prev = fitness_mse(derive_table(spec, bps));
    for (double extra : {-2.0, -6.0, -1.0, -3.0, -5.0, -7.0}) {
        bps.push_back(extra);
        std::sort(bps.begin(), bps.end());
        const double now = fitness_mse(derive_table(spec, bps));
        EXPECT_LE(now, prev + 1e-15);
        prev = now;
    }
}

TEST(Pwl, DegenerateGapRejected) {
    const auto spec = NonLinSpec::defaults(FunctionKind::Gelu);
    EXPECT_THROW(derive_table(spec, std::vector<double>{0.0, 0.01}), DegenerateBreakpoints);
    EXPECT_THROW(derive_table(spec, std::vector<double>{-3.995}), DegenerateBreakpoints);
    EXPECT_NO_THROW(derive_table(spec, std::vector<double>{0.0, 0.02}));
}

TEST(Pwl, RepairProducesValidSets) {
    const Interval r{-4.0, 4.0};
    std::vector<double> p{3.0, 3.0, 3.0, -10.0, 10.0, 0.001, 0.0};
    repair_breakpoints(p, r, min_gap());
    EXPECT_TRUE(breakpoints_valid(p, r, min_gap()));
    EXPECT_EQ(p.size(), 7u);

    std::vector<double> fine{-1.0, 0.0, 1.0};
    repair_breakpoints(fine, r, min_gap());
    EXPECT_EQ(fine, (std::vector<double>{-1.0, 0.0, 1.0}));

    std::vector<double> crowded(500, 0.0);
    EXPECT_THROW(repair_breakpoints(crowded, r, min_gap()), std::invalid_argument);
}

TEST(Pwl, RoundParameters) {
    const auto spec = NonLinSpec::defaults(FunctionKind::Gelu);
    auto t = derive_table(spec, std::vector<double>{-1.0, 0.5, 2.0});
    const auto r = round_parameters(t, 5);
    for (std::size_t i = 0; i < t.entries(); ++i) {
        EXPECT_EQ(r.slopes[i], oracle::to_grid(t.slopes[i], 5));
        EXPECT_EQ(r.intercepts[i], oracle::to_grid(t.intercepts[i], 5));
    }
    EXPECT_EQ(r.breakpoints, t.breakpoints);
}
