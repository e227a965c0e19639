#include "nclab/geometry.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>

using namespace nclab;

TEST(NeckProfile, QuadraticTangentAtOrigin) {
    NeckProfile p = NeckProfile::quadratic({2.0}, 0.5);
    double x = 0.0;
    Heights h = p.heights(std::span<const double>(&x, 1));
    EXPECT_EQ(h.upper, 0.0);
    EXPECT_EQ(h.lower, 0.0);
}

TEST(NeckProfile, PowerLawAllOnUpperSide) {
    NeckProfile p = NeckProfile::power_law(4.0, 1.0, 1.0);
    double x = 0.5;
    Heights h = p.heights(std::span<const double>(&x, 1));
    EXPECT_DOUBLE_EQ(h.upper, 0.0625);
    EXPECT_DOUBLE_EQ(h.lower, 0.0);
}

TEST(NeckProfile, RelativeProfileIndependentOfSplit) {
    for (double s : {0.0, 0.25, 0.5, 1.0}) {
        NeckProfile p = NeckProfile::quadratic({2.0}, s);
        double x = 0.1;
        Heights h = p.heights(std::span<const double>(&x, 1));
        EXPECT_NEAR(h.upper - h.lower, 0.01, 1e-15);
    }
}

TEST(NeckProfile, RejectsBadParameters) {
    EXPECT_THROW(NeckProfile::power_law(1.5, 1.0), Error);
    EXPECT_THROW(NeckProfile::power_law(2.0, -1.0), Error);
    EXPECT_THROW(NeckProfile::quadratic({}), Error);
    EXPECT_THROW(NeckProfile::quadratic({1.0, -2.0}), Error);
    EXPECT_THROW(NeckProfile::quadratic({2.0}, 1.5), Error);
}

TEST(NeckProfile, GradientMatchesFiniteDifference) {
    NeckProfile p = NeckProfile::power_law(3.0, 1.7);
    std::array<double, 2> x{0.13, -0.21};
    auto g = p.relative_gradient(x);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        EXPECT_NEAR(g[j], (p.relative(xp) - p.relative(xm)) / (2 * h), 1e-7);
    }
}

TEST(InclusionPair, GapValues) {
    InclusionPair g(2, NeckProfile::power_law(2.0, 1.0), 1e-3);
    EXPECT_DOUBLE_EQ(g.gap(0.0), 1e-3);
    EXPECT_NEAR(g.gap(0.1), 0.011, 1e-15);
    EXPECT_EQ(g.with_epsilon(0.0).gap(0.0), 0.0);
}

TEST(InclusionPair, GapIsEvenAndIncreasing) {
    InclusionPair g(2, NeckProfile::quadratic({2.0}, 0.3), 1e-4, 0.5, 6.0);
    double prev = g.gap(0.0);
    for (int k = 1; k <= 50; ++k) {
        double x = 0.02 * k;
        EXPECT_DOUBLE_EQ(g.gap(x), g.gap(-x));
        EXPECT_GT(g.gap(x), prev);
        prev = g.gap(x);
    }
}

TEST(InclusionPair, Classification) {
    const double eps = 1e-3;
    InclusionPair g(2, NeckProfile::quadratic({2.0}), eps);
    EXPECT_EQ(g.classify(Vec2{0.0, eps / 2}), Region::InNeck);
    EXPECT_EQ(g.classify(Vec2{0.0, -g.outer_radius() - 1.0}), Region::Outside);
    EXPECT_EQ(g.classify(Vec2{0.0, -1e-9}), Region::InD2);
    EXPECT_EQ(g.classify(Vec2{0.0, eps + 1e-9}), Region::InD1);
    EXPECT_EQ(g.classify(Vec2{2.5, 0.0}), Region::InFar);
}

TEST(InclusionPair, CapsJoinProfileSmoothly) {
    InclusionPair g(2, NeckProfile::quadratic({2.0}, 0.4), 1e-3);
    const Cap& u = g.upper_cap();
    const double r0 = g.neck_radius();
    // junction lies on the cap circle
    EXPECT_NEAR(std::hypot(r0, u.junction_height - u.center_height), u.radius, 1e-12);
    EXPECT_NEAR(u.junction_height, g.epsilon() + g.heights(r0).upper, 1e-14);
    const Cap& l = g.lower_cap();
    EXPECT_NEAR(std::hypot(r0, l.junction_height - l.center_height), l.radius, 1e-12);
}

TEST(InclusionPair, MirrorSymmetryNeedsEvenSplitAndCentredOuter) {
    NeckProfile p = NeckProfile::quadratic({2.0});
    EXPECT_FALSE(InclusionPair(2, p, 1e-3).mirror_symmetric());
    EXPECT_TRUE(InclusionPair(2, p, 1e-3, 0.5, 4.0, 0.5).mirror_symmetric());
    EXPECT_FALSE(InclusionPair(2, NeckProfile::quadratic({2.0}, 0.3), 1e-3, 0.5, 6.0, 0.5).mirror_symmetric());
}

TEST(InclusionPair, RejectsBadInput) {
    NeckProfile p = NeckProfile::quadratic({2.0});
    EXPECT_THROW(InclusionPair(4, p, 1e-3), Error);
    EXPECT_THROW(InclusionPair(2, p, -1e-3), Error);
    EXPECT_THROW(InclusionPair(2, p, 1e-3, 1.2), Error);
    EXPECT_THROW(InclusionPair(3, p, 1e-3), Error); // one curvature for a 2-d tangent plane
    EXPECT_THROW(InclusionPair(2, p, 1e-3, 0.5, 1.5), Error);
    EXPECT_THROW(InclusionPair(2, NeckProfile::quadratic({2.0}, 0.0), 1e-3), Error);
}
