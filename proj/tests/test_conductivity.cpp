#include "nclab/conductivity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace nclab;

namespace {

MeshParams coarse() {
    MeshParams p;
    p.h_far = 0.5;
    p.h_near = 0.05;
    return p;
}

struct Case {
    InclusionPair g;
    Mesh m;
    explicit Case(double eps, double shift = 0.0, MeshParams p = coarse())
        : g(2, NeckProfile::quadratic({2.0}), eps, 0.5, 4.0, shift), m(generate(g, p)) {}
};

const Case& standard() {
    static const Case s(1e-3);
    return s;
}

} // namespace

TEST(BoundaryData, Presets) {
    InclusionPair g(2, NeckProfile::quadratic({2.0}), 1e-3, 0.5, 4.0, 0.5);
    Vec2 p{3.0, 2.0};
    EXPECT_EQ(BoundaryData::constant(1.5)(p, g), 1.5);
    EXPECT_EQ(BoundaryData::linear_xn()(p, g), 2.0);
    EXPECT_EQ(BoundaryData::linear_x1()(p, g), 3.0);
    double t = std::atan2(2.0 - 0.5e-3, 3.0);
    EXPECT_NEAR(BoundaryData::fourier({1.0, 0.0, 2.0}, {0.0, 0.5})(p, g), 1.0 + 2.0 * std::cos(2 * t) + 0.5 * std::sin(t),
                1e-14);
    EXPECT_THROW(BoundaryData::fourier({}, {}), Error);
}

TEST(Components, Superposition) {
    const Case& s = standard();
    ConductivityProblem prob(s.m, s.g);
    Components c = prob.solve_components(BoundaryData::linear_xn());
    Vector both = prob.solve_dirichlet(prob.data(1.0, 1.0, std::nullopt));
    EXPECT_LE((c.v1 + c.v2 - both).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Components, ZeroDataGivesZeroField) {
    const Case& s = standard();
    ConductivityProblem prob(s.m, s.g);
    Components c = prob.solve_components(BoundaryData::constant(0.0));
    EXPECT_EQ(c.v0.cwiseAbs().maxCoeff(), 0.0);
    FluxSystem f = prob.flux_system(c);
    EXPECT_EQ(f.b1, 0.0);
    EXPECT_EQ(f.b2, 0.0);
}

TEST(Components, MaximumPrinciple) {
    const Case& s = standard();
    ConductivityProblem prob(s.m, s.g);
    Components c = prob.solve_components(BoundaryData::linear_xn());
    for (const Vector* v : {&c.v1, &c.v2}) {
        EXPECT_GE(v->minCoeff(), -1e-12);
        EXPECT_LE(v->maxCoeff(), 1.0 + 1e-12);
    }
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < s.m.num_vertices(); ++i)
        if (s.m.vertex_tags[i] == VertexTag::Outer) {
            lo = std::min(lo, s.m.vertices[i].y);
            hi = std::max(hi, s.m.vertices[i].y);
        }
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
    EXPECT_GE(c.v0.minCoeff(), lo - 1e-10);
    EXPECT_LE(c.v0.maxCoeff(), hi + 1e-10);
}

TEST(FluxSystem, IdentitiesAndZeroNetFlux) {
    const Case& s = standard();
    ConductivityProblem prob(s.m, s.g);
    SolveBundle b = prob.solve(BoundaryData::linear_xn());
    const FluxSystem& f = b.system;
    EXPECT_NEAR(f.a11, b.energy_v1, 1e-10 * f.a11);
    EXPECT_NEAR(f.a12, f.a21, 1e-8 * std::abs(f.a12));
    // the composed potential carries no net flux through either inclusion
    const SparseMatrix& K = prob.stiffness();
    EXPECT_NEAR(flux(K, b.u, prob.indicator1()), 0.0, 1e-9 * f.a11);
    EXPECT_NEAR(flux(K, b.u, prob.indicator2()), 0.0, 1e-9 * f.a11);
    // u is constant on each inclusion
    for (std::size_t i = 0; i < s.m.num_vertices(); ++i) {
        if (s.m.vertex_tags[i] == VertexTag::Inclusion1) {
            EXPECT_NEAR(b.u[Eigen::Index(i)], b.constants.C1, 1e-14);
        }
        if (s.m.vertex_tags[i] == VertexTag::Inclusion2) {
            EXPECT_NEAR(b.u[Eigen::Index(i)], b.constants.C2, 1e-14);
        }
    }
}

TEST(BlowupFactor, DecompositionAndTwoFormulas) {
    const Case& s = standard();
    ConductivityProblem prob(s.m, s.g);
    SolveBundle b = prob.solve(BoundaryData::linear_xn());
    Vector rebuilt = b.constants.difference() * b.fields.v1 + b.vb;
    EXPECT_LE((b.u - rebuilt).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(b.B_eps, b.B_eps_direct, 1e-9 * std::abs(b.B_eps));
    EXPECT_NEAR(b.constants.difference(), b.B_eps / b.system.a11, 1e-12);
    EXPECT_GT(std::abs(b.B_eps), 1.0); // nondegenerate data
}

TEST(BlowupFactor, ConstantDataIsDegenerate) {
    const Case& s = standard();
    ConductivityProblem prob(s.m, s.g);
    const double c = -0.8;
    SolveBundle b = prob.solve(BoundaryData::constant(c));
    EXPECT_NEAR(b.constants.C1, c, 1e-12);
    EXPECT_NEAR(b.constants.C2, c, 1e-12);
    EXPECT_NEAR(b.B_eps, 0.0, 1e-10);
    EXPECT_LE((b.u.array() - c).abs().maxCoeff(), 1e-12);
}

TEST(BlowupFactor, EvenDataOnMirrorGeometry) {
    MeshParams p = coarse();
    p.layers = 6;
    Case s(1e-4, 0.5, p);
    ConductivityProblem prob(s.m, s.g);
    BoundaryData phi = BoundaryData::fourier({0.3, 0.5, 1.0}, {});
    SolveBundle b = prob.solve(phi);
    EXPECT_LE(std::abs(b.constants.difference()), 1e-8 * phi.magnitude(s.g));
    // odd data gives opposite potentials
    SolveBundle o = prob.solve(BoundaryData::fourier({0.0}, {0.0, 1.0}));
    EXPECT_NEAR(o.constants.C1, -o.constants.C2, 1e-8);
}

TEST(Constants, SingularSystemRejected) {
    EXPECT_THROW(solve_constants(FluxSystem{1, 1, 1, 1, 0, 0}), Error);
    Constants c = solve_constants(FluxSystem{2, -1, -1, 2, 1, 1});
    EXPECT_NEAR(c.C1, 1.0, 1e-15);
    EXPECT_NEAR(c.C2, 1.0, 1e-15);
}

TEST(Constants, PotentialsBoundedAcrossGaps) {
    InclusionPair g(2, NeckProfile::quadratic({2.0}), 1e-3);
    MeshGenerator gen(g, coarse());
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
        Mesh m = gen.generate(eps);
        ConductivityProblem prob(m, g.with_epsilon(eps));
        SolveBundle b = prob.solve(BoundaryData::linear_xn());
        EXPECT_LT(std::abs(b.constants.C1) + std::abs(b.constants.C2), 8.0) << eps;
    }
}

TEST(Limit, SyntheticExtrapolationIsExact) {
    std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5}, B;
    for (double e : eps) B.push_back(3.0 + 0.7 * std::sqrt(e));
    LimitBundle l = estimate_B0(eps, B, 2, 2.0);
    EXPECT_NEAR(l.B0, 3.0, 1e-10);
    EXPECT_NEAR(*l.slope, 0.7, 1e-10);
    EXPECT_EQ(l.method, LimitMethod::Extrapolated);
    EXPECT_LT(l.uncertainty, 1e-10);
}

TEST(Limit, CuspConstantData) {
    InclusionPair g(2, NeckProfile::quadratic({2.0}), 1e-3);
    MeshGenerator gen(g, coarse());
    LimitBundle l = solve_limit_direct(gen, BoundaryData::constant(1.25), 0.1);
    EXPECT_NEAR(*l.C0, 1.25, 1e-12);
    EXPECT_NEAR(l.B0, 0.0, 1e-10);
    for (const auto& c : l.cusp) {
        EXPECT_GT(c.merged_flux_u01, 0.0);
        EXPECT_NEAR(c.energy_u01, c.merged_flux_u01, 1e-10 * c.energy_u01);
    }
}

TEST(Limit, CuspAgreesWithExtrapolation) {
    InclusionPair g(2, NeckProfile::quadratic({2.0}), 1e-3);
    MeshParams p;
    MeshGenerator gen(g, p);
    LimitBundle direct = solve_limit_direct(gen, BoundaryData::linear_xn(), 0.1);
    EXPECT_GT(direct.B0, 0.0);
    EXPECT_LT(direct.uncertainty, 1e-6);
    std::vector<double> eps, B;
    for (int k = 0; k <= 5; ++k) {
        double e = 1e-2 * std::pow(4.0, -k);
        Mesh m = gen.generate(e);
        ConductivityProblem prob(m, g.with_epsilon(e));
        eps.push_back(e);
        B.push_back(prob.solve(BoundaryData::linear_xn()).B_eps);
    }
    LimitBundle ex = estimate_B0(eps, B, 2, 2.0);
    EXPECT_NEAR(ex.B0, direct.B0, 5e-3 * direct.B0);
}
