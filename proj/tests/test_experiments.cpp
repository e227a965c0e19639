#include "nclab/experiments.hpp"
#include "nclab/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace nclab;

namespace {

InclusionPair disks() { return InclusionPair(2, NeckProfile::quadratic({2.0}), 1e-3); }

const std::vector<SweepRecord>& default_sweep() {
    static const std::vector<SweepRecord> recs =
        run_sweep({disks(), BoundaryData::linear_xn(), {1e-2, 1e-3, 1e-4, 1e-5}, MeshParams{}, {}, 0});
    return recs;
}

const std::vector<SweepRecord>& fine_sweep() {
    static const std::vector<SweepRecord> recs =
        run_sweep({disks(), BoundaryData::linear_xn(), log_spaced(-2.5, -5.0, 6), MeshParams{}, {}, 0});
    return recs;
}

} // namespace

TEST(Fit, HandComputedRegression) {
    std::vector<double> x{0, 1, 2, 3}, y{1, 3, 2, 5};
    FitResult f = ols(x, y);
    EXPECT_NEAR(f.slope, 1.1, 1e-14);
    EXPECT_NEAR(f.intercept, 1.1, 1e-14);
    EXPECT_NEAR(f.residual_norm, std::sqrt(2.7), 1e-14);
    EXPECT_NEAR(f.slope_stderr, std::sqrt(1.35 / 5.0), 1e-14);
    EXPECT_NEAR(f.intercept_stderr, std::sqrt(1.35 * 0.7), 1e-14);
    ASSERT_EQ(f.residuals.size(), 4u);
    EXPECT_NEAR(f.residuals[2], -1.3, 1e-14);
}

TEST(Fit, ResidualsOrthogonalToRegressors) {
    std::vector<double> x, y;
    for (int i = 0; i < 9; ++i) {
        x.push_back(0.3 * i);
        y.push_back(std::cos(double(i)));
    }
    FitResult f = ols(x, y);
    double s0 = 0, s1 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s0 += f.residuals[i];
        s1 += f.residuals[i] * x[i];
    }
    EXPECT_NEAR(s0, 0.0, 1e-13);
    EXPECT_NEAR(s1, 0.0, 1e-13);
}

TEST(Fit, LogLogPowerLaw) {
    std::vector<double> x{1e-1, 1e-2, 1e-3, 1e-4}, y;
    for (double v : x) y.push_back(5.0 * std::pow(v, -0.75));
    FitResult f = fit_loglog(x, y);
    EXPECT_NEAR(f.slope, -0.75, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 5.0, 1e-10);
    std::vector<double> bad{1.0, -1.0, 2.0, 3.0};
    EXPECT_THROW(fit_loglog(x, bad), Error);
    std::vector<double> same{1.0, 1.0, 1.0};
    EXPECT_THROW(ols(same, same), Error);
}

TEST(Sweep, LogSpacing) {
    auto v = log_spaced(-2.0, -5.0, 4);
    ASSERT_EQ(v.size(), 4u);
    EXPECT_NEAR(v[0], 1e-2, 1e-17);
    EXPECT_NEAR(v[3], 1e-5, 1e-20);
    EXPECT_THROW(log_spaced(-2.0, -5.0, 1), Error);
}

TEST(Sweep, DefaultConfigurationCompletes) {
    const auto& r = default_sweep();
    ASSERT_EQ(r.size(), 4u);
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_TRUE(r[i].ok) << r[i].error;
        if (i) {
            EXPECT_LT(r[i].epsilon, r[i - 1].epsilon);
            EXPECT_GT(r[i].energy_v1, r[i - 1].energy_v1);
            EXPECT_GT(r[i].max_grad_u, r[i - 1].max_grad_u);
        }
        for (double v : {r[i].energy_v1, r[i].C1, r[i].C2, r[i].B_eps, r[i].max_grad_u, r[i].max_grad_w})
            EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(Sweep, FailuresAreRecordedPerGap) {
    auto r = run_sweep({disks(), BoundaryData::linear_xn(), {1e-3, 2.5, 1e-2}, MeshParams{}, {}, 2});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0].epsilon, 2.5);
    EXPECT_FALSE(r[0].ok);
    EXPECT_FALSE(r[0].error.empty());
    EXPECT_TRUE(r[1].ok);
    EXPECT_TRUE(r[2].ok);
    EXPECT_THROW(run_sweep({disks(), BoundaryData::linear_xn(), {2.5, 3.0}, MeshParams{}, {}, 1}), Error);
    EXPECT_THROW(run_sweep({disks(), BoundaryData::linear_xn(), {}, MeshParams{}, {}, 1}), Error);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
    std::vector<double> eps{1e-2, 1e-3, 1e-4};
    auto a = run_sweep({disks(), BoundaryData::linear_xn(), eps, MeshParams{}, {}, 1});
    auto b = run_sweep({disks(), BoundaryData::linear_xn(), eps, MeshParams{}, {}, 3});
    std::ostringstream sa, sb;
    write_sweep_csv(sa, a);
    write_sweep_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Rates, QuadraticNeck) {
    const auto& r = fine_sweep();
    FitResult u = fit_rate(r, [](const SweepRecord& s) { return s.max_grad_u; });
    FitResult v = fit_rate(r, [](const SweepRecord& s) { return s.max_grad_v1; });
    EXPECT_NEAR(u.slope, -0.5, 0.05);
    EXPECT_NEAR(v.slope, -1.0, 0.05);
    std::vector<SweepRecord> few(r.begin(), r.begin() + 3);
    EXPECT_THROW(fit_rate(few, [](const SweepRecord& s) { return s.max_grad_u; }), Error);
}

TEST(Rates, QuarticNeck) {
    InclusionPair g(2, NeckProfile::power_law(4.0, 2.0), 1e-3);
    auto r = run_sweep({g, BoundaryData::linear_xn(), log_spaced(-2.5, -5.0, 6), MeshParams{}, {}, 0});
    FitResult u = fit_rate(r, [](const SweepRecord& s) { return s.max_grad_u; });
    EXPECT_NEAR(u.slope, -0.25, 0.05);
}

TEST(Energy, LeadingConstantMatchesOracle) {
    EnergyFit e = fit_energy_constants(fine_sweep(), disks());
    EXPECT_NEAR(e.oracle, std::numbers::pi, 1e-14);
    EXPECT_NEAR(e.A_over_oracle(), 1.0, 0.02);
    EXPECT_NEAR(e.A_over_printed(), 1.0, 0.02);
    EXPECT_LT(e.M_shift(), 0.10);
    EXPECT_EQ(e.fit.residuals.size(), fine_sweep().size());
}

TEST(LeadingTerm, ResidualBoundedAndCoefficientConverges) {
    const auto& r = fine_sweep();
    EnergyFit e = fit_energy_constants(r, disks());
    std::vector<double> eps, B;
    for (const auto& s : r) {
        eps.push_back(s.epsilon);
        B.push_back(s.B_eps);
    }
    LimitBundle l = estimate_B0(eps, B, 2, 2.0);
    LeadingTermReport rep = verify_leading_term(r, l.B0, e.A);
    EXPECT_LE(rep.residual_growth, 3.0);
    EXPECT_GT(rep.gradient_growth, 10.0);
    EXPECT_NEAR(rep.coefficient_ratio, 1.0, 0.05);
}

TEST(LeadingTerm, ConstantDataHasBoundedGradient) {
    auto r = run_sweep({disks(), BoundaryData::constant(2.0), log_spaced(-2.5, -5.0, 4), MeshParams{}, {}, 0});
    for (const auto& s : r) EXPECT_LT(s.max_grad_u, 1e-6);
}

TEST(Remainder, BoundedWhileSingularPartGrows) {
    const auto& r = fine_sweep();
    double lo = 1e300, hi = 0;
    for (const auto& s : r) {
        lo = std::min(lo, s.max_grad_w);
        hi = std::max(hi, s.max_grad_w);
    }
    EXPECT_LT(hi / lo, 2.0);
    EXPECT_GT(r.back().max_grad_v1 / r.front().max_grad_v1, 10.0);
}

TEST(Convergence, LadderShrinks) {
    ConvergenceReport c = mesh_convergence(disks(), BoundaryData::linear_xn(), MeshParams{}, 4, 4);
    ASSERT_EQ(c.levels.size(), 4u);
    EXPECT_EQ(c.levels[1].layers, 6);
    EXPECT_EQ(c.levels[3].layers, 14);
    EXPECT_TRUE(ConvergenceReport::shrinking(c.energy_ratios, 1.5));
    EXPECT_TRUE(ConvergenceReport::shrinking(c.difference_ratios, 1.5));
    EXPECT_TRUE(ConvergenceReport::shrinking(c.B_ratios, 1.5));
    EXPECT_LT(c.relative_energy_error(), 0.01);
    // four significant digits in C1 - C2
    EXPECT_LT(c.difference_error / std::abs(c.levels.back().difference), 5e-4);
    EXPECT_THROW(mesh_convergence(disks(), BoundaryData::linear_xn(), MeshParams{}, 4, 2), Error);
}

TEST(Report, CsvRoundTrip) {
    const auto& r = default_sweep();
    std::stringstream s;
    write_sweep_csv(s, r);
    std::string first;
    std::getline(s, first);
    EXPECT_EQ(first, "# nclab-sweep-csv/1");
    s.seekg(0);
    auto back = read_sweep_csv(s);
    ASSERT_EQ(back.size(), r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_EQ(back[i].epsilon, r[i].epsilon);
        EXPECT_EQ(back[i].B_eps, r[i].B_eps);
        EXPECT_EQ(back[i].system.a12, r[i].system.a12);
        EXPECT_EQ(back[i].max_grad_vb, r[i].max_grad_vb);
        EXPECT_EQ(back[i].ok, r[i].ok);
    }
    std::istringstream junk("epsilon,rho\n1,2\n");
    EXPECT_THROW(read_sweep_csv(junk), Error);
}

TEST(Report, SummaryAndPlots) {
    ExperimentConfig cfg;
    SweepSummary s = summarize(fine_sweep(), disks());
    Json j = summary_json(s, cfg);
    EXPECT_TRUE(j["fits"].contains("max_grad_u_neck"));
    EXPECT_TRUE(j["fits"].contains("energy_v1"));
    EXPECT_TRUE(j["checks"]["grad_u_slope"].get<bool>());
    EXPECT_TRUE(j["energy_monotone"].get<bool>());
    std::string svg = svg_gradients(fine_sweep());
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
}
