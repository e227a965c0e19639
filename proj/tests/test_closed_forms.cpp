#include "nclab/closed_forms.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace nclab;

namespace {
constexpr double pi = std::numbers::pi;

// Composite Simpson on [a, b] with N panels; independent of the adaptive rule.
template <class F> double simpson(F f, double a, double b, int N) {
    double h = (b - a) / N, s = f(a) + f(b);
    for (int i = 1; i < N; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}
} // namespace

TEST(Rates, RhoN) {
    EXPECT_NEAR(rho_n(1e-2, 2), 0.1, 1e-15);
    EXPECT_NEAR(rho_n(std::exp(-10.0), 3), 0.1, 1e-15);
    EXPECT_NEAR(rho_n(0.25, 2), 0.5, 1e-15);
    EXPECT_THROW(rho_n(0.0, 2), Error);
    EXPECT_THROW(rho_n(1.5, 2), Error);
}

TEST(Rates, RhoNM) {
    EXPECT_NEAR(rho_n_m(1e-4, 2, 2), 1e-2, 1e-15);
    EXPECT_NEAR(rho_n_m(1e-4, 3, 4), 1e-2, 1e-15);
    EXPECT_NEAR(rho_n_m(std::exp(-5.0), 3, 2), 0.2, 1e-15);
    EXPECT_NEAR(rho_n_m(1e-8, 2, 4), 1e-6, 1e-18);
    EXPECT_THROW(rho_n_m(1e-4, 2, 1.5), Error);
    EXPECT_THROW(rho_n_m(1e-4, 3, 1.5), Error);
}

TEST(Rates, Admissibility) {
    EXPECT_TRUE(admissible(2, 2));
    EXPECT_FALSE(admissible(2, 1.9));
    EXPECT_TRUE(admissible(3, 2));
    EXPECT_FALSE(admissible(3, 1.5));
    EXPECT_TRUE(admissible(4, 3));
    EXPECT_FALSE(admissible(4, 2.5));
}

TEST(Rates, RhoDecreasesToZero) {
    for (auto [n, m] : std::array<std::pair<int, double>, 4>{{{2, 2}, {2, 4}, {3, 2}, {3, 5}}}) {
        double prev = 1.0;
        for (double e = 1e-2; e > 1e-12; e *= 0.1) {
            double r = rho_n_m(e, n, m);
            EXPECT_LT(r, prev);
            prev = r;
        }
    }
}

TEST(Constants, Kappa) {
    EXPECT_NEAR(kappa_n(2.0, std::nullopt, 2), pi, 1e-14);
    EXPECT_NEAR(kappa_n(1.0, 1.0, 3), pi, 1e-14);
    EXPECT_NEAR(kappa_n(8.0, std::nullopt, 2), pi / 2, 1e-14);
    EXPECT_THROW(kappa_n(1.0, std::nullopt, 3), Error);
}

TEST(Constants, LFrozenValues) {
    EXPECT_NEAR(L_mn(2, 2).analytic, pi / 2, 1e-15);
    EXPECT_NEAR(L_mn(4, 2).analytic, pi * std::sqrt(2.0) / 4, 1e-14);
    EXPECT_NEAR(L_mn(4, 3).analytic, pi * pi / 2, 1e-13);
    // log branch: sphere measure over m
    EXPECT_NEAR(L_mn(2, 3).analytic, pi, 1e-14);
}

TEST(Constants, LAnalyticMatchesQuadrature) {
    for (auto [m, n] : std::array<std::pair<double, int>, 9>{
             {{2, 2}, {3, 2}, {4, 2}, {6, 2}, {2.5, 2}, {3, 3}, {4, 3}, {6, 3}, {2, 3}}}) {
        LConstant c = L_mn(m, n);
        EXPECT_NEAR(c.analytic, c.quadrature, 1e-9) << "m=" << m << " n=" << n;
    }
}

TEST(Constants, LIndependentSimpson) {
    // int_0^inf dy/(1+y^4) via y = t/(1-t)
    auto f = [](double t) {
        if (t >= 1.0) return 0.0;
        double y = t / (1 - t);
        return 1.0 / (1 + std::pow(y, 4)) / ((1 - t) * (1 - t));
    };
    EXPECT_NEAR(simpson(f, 0.0, 1.0, 20000), L_mn(4, 2).analytic, 1e-10);
}

TEST(GapIntegral, TwoDimensionalArctanOracle) {
    const double eps = 1e-4, r0 = 0.5;
    InclusionPair g(2, NeckProfile::power_law(2.0, 1.0), eps, r0);
    double oracle = 2.0 / std::sqrt(eps) * std::atan(r0 / std::sqrt(eps));
    EXPECT_NEAR(gap_integral(g), oracle, 1e-9 * oracle);
    EXPECT_NEAR(oracle, 310.159, 1e-3);
    EXPECT_NEAR(gap_integral(g), 100 * pi - 4, 1e-2);
}

TEST(GapIntegral, QuadraticAndPowerLawAgree) {
    InclusionPair a(2, NeckProfile::power_law(2.0, 1.0), 1e-5);
    InclusionPair b(2, NeckProfile::quadratic({2.0}), 1e-5);
    EXPECT_NEAR(gap_integral(a), gap_integral(b), 1e-9 * gap_integral(a));
}

TEST(GapIntegral, ThreeDimensionalLogOracle) {
    const double eps = 1e-6, r0 = 0.5, lam = 1.0;
    InclusionPair g(3, NeckProfile::power_law(2.0, lam), eps, r0);
    double oracle = pi / lam * std::log(1 + lam * r0 * r0 / eps);
    EXPECT_NEAR(gap_integral(g), oracle, 1e-9 * oracle);
    EXPECT_NEAR(oracle, pi * std::log(2.5e5), 1e-4);
}

TEST(GapIntegral, AnisotropicThreeDimensional) {
    // equal curvatures reduce to the radial log formula
    const double eps = 1e-5, r0 = 0.5;
    InclusionPair a(3, NeckProfile::quadratic({2.0, 2.0}), eps, r0);
    EXPECT_NEAR(gap_integral(a), pi * std::log(1 + r0 * r0 / eps), 1e-8);
    // unequal curvatures against a brute-force polar Simpson
    InclusionPair b(3, NeckProfile::quadratic({1.0, 3.0}), eps, r0, 8.0);
    auto ang = [&](double th) {
        double c = 0.5 * (std::cos(th) * std::cos(th) + 3.0 * std::sin(th) * std::sin(th));
        return std::log1p(c * r0 * r0 / eps) / (2 * c);
    };
    EXPECT_NEAR(gap_integral(b), simpson(ang, 0.0, 2 * pi, 4000), 1e-8);
}

TEST(GapIntegral, QuarticAgainstSimpson) {
    const double eps = 1e-6;
    InclusionPair g(2, NeckProfile::power_law(4.0, 2.0), eps);
    // substitute x = s^2 to smooth the inner layer
    auto f = [&](double s) { return 2.0 * 2.0 * s / (eps + 2.0 * std::pow(s, 8)); };
    double ref = simpson(f, 0.0, std::sqrt(0.5), 400000);
    EXPECT_NEAR(gap_integral(g), ref, 1e-7 * ref);
}

TEST(GapIntegral, LeadingConstantOracle) {
    InclusionPair g(2, NeckProfile::quadratic({2.0}), 1e-3);
    EXPECT_NEAR(oracle_constant_analytic(g.profile(), 2), pi, 1e-14);
    EXPECT_NEAR(oracle_constant_numeric(g), pi, 1e-4);
    InclusionPair q(2, NeckProfile::power_law(4.0, 2.0), 1e-3);
    EXPECT_NEAR(oracle_constant_numeric(q), oracle_constant_analytic(q.profile(), 2), 1e-3);
    // printed kappa_2 agrees with the oracle in two dimensions
    EXPECT_NEAR(printed_constant(g.profile(), 2), oracle_constant_analytic(g.profile(), 2), 1e-14);
}

TEST(GapIntegral, ThreeDimensionalPrintedConstantDiscrepancy) {
    // the printed kappa_3 is half the oracle constant for the log branch
    InclusionPair g(3, NeckProfile::quadratic({2.0, 2.0}), 1e-3);
    ConstantsReport r = constants_report(g);
    EXPECT_NEAR(r.oracle_analytic, pi, 1e-14);
    EXPECT_NEAR(r.printed_over_oracle(), 0.5, 1e-14);
}

TEST(SingularFunction, Values) {
    const double eps = 1e-3;
    InclusionPair g(2, NeckProfile::quadratic({2.0}), eps);
    std::array<double, 2> mid{0.0, eps / 2};
    EXPECT_NEAR(vbar_eval(g, mid), 0.5, 1e-15);
    for (double x : {-0.3, 0.0, 0.2}) {
        Heights h = g.heights(x);
        std::array<double, 2> lo{x, h.lower}, hi{x, eps + h.upper};
        EXPECT_NEAR(vbar_eval(g, lo), 0.0, 1e-14);
        EXPECT_NEAR(vbar_eval(g, hi), 1.0, 1e-14);
    }
    EXPECT_NEAR(grad_vbar(g, mid)[1], 1000.0, 1e-9);
}

TEST(SingularFunction, GradientMatchesFiniteDifference) {
    const double eps = 1e-3;
    InclusionPair g(2, NeckProfile::quadratic({2.0}, 0.3), eps, 0.5, 6.0);
    double x = 0.17;
    Heights h = g.heights(x);
    std::array<double, 2> p{x, h.lower + 0.4 * (eps + h.upper - h.lower)};
    auto gr = grad_vbar(g, p);
    const double d = 1e-7;
    std::array<double, 2> a = p, b = p;
    a[0] += d;
    b[0] -= d;
    EXPECT_NEAR(gr[0], (vbar_eval(g, a) - vbar_eval(g, b)) / (2 * d), 1e-5);
}

TEST(SingularFunction, TouchingLimit) {
    InclusionPair g(2, NeckProfile::power_law(2.0, 1.0), 1e-3);
    std::array<double, 2> mid{0.1, 0.0};
    EXPECT_NEAR(vbar0_eval(g, mid), 0.5, 1e-14);
    EXPECT_NEAR(grad_vbar0(g, mid)[1], 100.0, 1e-10);
    std::array<double, 2> top{0.1, 0.005};
    EXPECT_NEAR(vbar0_eval(g, top), 1.0, 1e-12);
    std::array<double, 2> origin{0.0, 0.0};
    EXPECT_THROW(vbar0_eval(g, origin), Error);
}

TEST(SingularFunction, LeadingGradient) {
    const double eps = 1e-4;
    InclusionPair g(2, NeckProfile::quadratic({2.0}), eps);
    std::array<double, 2> mid{0.0, eps / 2};
    auto v = leading_gradient(g, 1.0, mid, pi);
    EXPECT_NEAR(v[1], 1.0 / (pi * std::sqrt(eps)), 1e-9);
    EXPECT_NEAR(v[1], 31.83, 1e-2);
    auto z = leading_gradient(g, 0.0, mid, pi);
    EXPECT_EQ(z[0], 0.0);
    EXPECT_EQ(z[1], 0.0);
    // quartic: coefficient scales as eps^(3/4), gradient at the centre as eps^(-1/4)
    InclusionPair q(2, NeckProfile::power_law(4.0, 2.0), 1e-4);
    std::array<double, 2> c1{0.0, 0.5e-4}, c2{0.0, 0.5e-8};
    double r = leading_gradient(q.with_epsilon(1e-8), 1.0, c2, 1.0)[1] / leading_gradient(q, 1.0, c1, 1.0)[1];
    EXPECT_NEAR(r, 10.0, 1e-9);
}

TEST(ErrorScales, Branches) {
    EXPECT_NEAR(error_scales(std::pow(2.0, -12), 2, 3).energy_m, 0.5, 1e-14);
    EXPECT_NEAR(error_scales(1e-4, 3, 4).energy_m, std::pow(1e-4, 0.125), 1e-15);
    EXPECT_NEAR(*error_scales(1e-4, 2, 2, 3).energy_quadratic, std::pow(1e-4, 1.0 / 12), 1e-15);
    EXPECT_THROW(error_scales(1e-4, 2, 2, 2), Error);
}
