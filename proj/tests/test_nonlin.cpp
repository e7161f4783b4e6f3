#include <gtest/gtest.h>

#include <cmath>

#include "lutfit/nonlin.hpp"
#include "oracles.hpp"

using namespace lutfit;

TEST(NonLin, ReferenceValues) {
    EXPECT_EQ(eval_ref(FunctionKind::Gelu, 0.0), 0.0);
    EXPECT_EQ(eval_ref(FunctionKind::Exp, 0.0), 1.0);
    EXPECT_EQ(eval_ref(FunctionKind::Hswish, 3.0), 3.0);
    EXPECT_EQ(eval_ref(FunctionKind::Rsqrt, 4.0), 0.5);
    EXPECT_EQ(eval_ref(FunctionKind::Div, 4.0), 0.25);
    EXPECT_EQ(eval_ref(FunctionKind::Linear, -2.5), -2.5);
}

TEST(NonLin, GeluMatchesSeriesOracle) {
    // Phi(1), 40-digit value from an independent high-precision evaluation.
    EXPECT_NEAR(eval_ref(FunctionKind::Gelu, 1.0), 0.84134474606854294858, 1e-15);
    for (double x = -3.0; x <= 3.0; x += 0.125) {
        EXPECT_NEAR(eval_ref(FunctionKind::Gelu, x), static_cast<double>(oracle::gelu(x)), 1e-14)
            << "x = " << x;
    }
}

TEST(NonLin, GeluDifferenceIdentity) {
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        EXPECT_NEAR(eval_ref(FunctionKind::Gelu, x) - eval_ref(FunctionKind::Gelu, -x), x, 1e-14);
    }
}

TEST(NonLin, HswishSaturationRegions) {
    for (double x = 3.0; x < 50.0; x += 1.3) EXPECT_DOUBLE_EQ(eval_ref(FunctionKind::Hswish, x), x);
    for (double x = -3.0; x > -50.0; x -= 1.3) EXPECT_EQ(eval_ref(FunctionKind::Hswish, x), 0.0);
}

TEST(NonLin, Monotonicity) {
    double prev_exp = -1.0;
    for (double x = -8.0; x <= 0.0; x += 0.01) {
        const double v = eval_ref(FunctionKind::Exp, x);
        EXPECT_GT(v, prev_exp);
        prev_exp = v;
    }
    double prev_div = INFINITY, prev_rsqrt = INFINITY;
    for (double x = 0.25; x <= 1024.0; x *= 1.07) {
        EXPECT_LT(eval_ref(FunctionKind::Div, x), prev_div);
        EXPECT_LT(eval_ref(FunctionKind::Rsqrt, x), prev_rsqrt);
        prev_div = eval_ref(FunctionKind::Div, x);
        prev_rsqrt = eval_ref(FunctionKind::Rsqrt, x);
    }
}

TEST(NonLin, FiniteOnDefaultRanges) {
    for (auto kind : {FunctionKind::Gelu, FunctionKind::Hswish, FunctionKind::Exp,
                      FunctionKind::Div, FunctionKind::Rsqrt}) {
        const auto spec = NonLinSpec::defaults(kind);
        const auto& r = spec.search_range();
        for (double x = r.lo; x <= r.hi; x += r.width() / 997.0) {
            EXPECT_TRUE(std::isfinite(eval_ref(spec, x))) << kind_name(kind) << " at " << x;
        }
    }
}

TEST(NonLin, DomainErrors) {
    EXPECT_THROW(eval_ref(FunctionKind::Div, 0.0), DomainError);
    EXPECT_THROW(eval_ref(FunctionKind::Rsqrt, -1.0), DomainError);
    EXPECT_THROW(eval_ref(FunctionKind::Gelu, NAN), std::invalid_argument);
}

TEST(NonLin, SpecInvariants) {
    EXPECT_THROW(NonLinSpec(FunctionKind::Gelu, {1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(NonLinSpec(FunctionKind::Div, {0.0, 4.0}), std::invalid_argument);
    EXPECT_THROW(NonLinSpec(FunctionKind::Rsqrt, {-1.0, 4.0}), std::invalid_argument);
    EXPECT_NO_THROW(NonLinSpec(FunctionKind::Exp, {-8.0, 0.0}));

    EXPECT_TRUE(NonLinSpec::defaults(FunctionKind::Gelu).scale_carrying());
    EXPECT_TRUE(NonLinSpec::defaults(FunctionKind::Hswish).scale_carrying());
    EXPECT_TRUE(NonLinSpec::defaults(FunctionKind::Exp).scale_carrying());
    EXPECT_FALSE(NonLinSpec::defaults(FunctionKind::Div).scale_carrying());
    EXPECT_FALSE(NonLinSpec::defaults(FunctionKind::Rsqrt).scale_carrying());

    EXPECT_EQ(NonLinSpec::defaults(FunctionKind::Exp).search_range(), (Interval{-8.0, 0.0}));
    EXPECT_EQ(NonLinSpec::defaults(FunctionKind::Div).search_range(), (Interval{0.5, 4.0}));
    EXPECT_EQ(NonLinSpec::defaults(FunctionKind::Rsqrt).search_range(), (Interval{0.25, 4.0}));
}

TEST(NonLin, NamesRoundTrip) {
    for (auto kind : {FunctionKind::Gelu, FunctionKind::Hswish, FunctionKind::Exp,
                      FunctionKind::Div, FunctionKind::Rsqrt, FunctionKind::Linear}) {
        EXPECT_EQ(parse_kind(kind_name(kind)), kind);
    }
    EXPECT_THROW(parse_kind("tanh"), std::invalid_argument);
}
