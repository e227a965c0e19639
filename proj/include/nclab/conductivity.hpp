#pragma once

// Perfect conductivity problem on a mesh: component solves, the flux system
// for the inclusion potentials, composition of u and v_b, and the blow-up
// factors at positive gap and in the touching limit.

#include "nclab/closed_forms.hpp"
#include "nclab/error.hpp"
#include "nclab/fem.hpp"
#include "nclab/fitting.hpp"
#include "nclab/geometry.hpp"
#include "nclab/mesh.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nclab {

enum class PresetKind { Constant, LinearXn, LinearX1, Fourier };

inline const char* to_string(PresetKind k) {
    switch (k) {
    case PresetKind::Constant: return "constant";
    case PresetKind::LinearXn: return "linear_xn";
    case PresetKind::LinearX1: return "linear_x1";
    case PresetKind::Fourier: return "fourier";
    }
    return "?";
}

/// Outer boundary data phi.
class BoundaryData {
public:
    static BoundaryData constant(double c) { return BoundaryData(PresetKind::Constant, c, {}, {}); }
    static BoundaryData linear_xn() { return BoundaryData(PresetKind::LinearXn, 0.0, {}, {}); }
    static BoundaryData linear_x1() { return BoundaryData(PresetKind::LinearX1, 0.0, {}, {}); }
    /// sum_k a_k cos(k theta) + b_k sin(k theta), theta measured about the centre of D.
    static BoundaryData fourier(std::vector<double> a, std::vector<double> b) {
        require(a.size() + b.size() > 0 && a.size() <= 64 && b.size() <= 64, "Fourier data needs 1..64 coefficients",
                ErrorKind::Config);
        for (double v : a) require(std::isfinite(v), "non-finite Fourier coefficient", ErrorKind::Config);
        for (double v : b) require(std::isfinite(v), "non-finite Fourier coefficient", ErrorKind::Config);
        return BoundaryData(PresetKind::Fourier, 0.0, std::move(a), std::move(b));
    }

    PresetKind kind() const { return kind_; }
    double value() const { return value_; }
    const std::vector<double>& cosines() const { return a_; }
    const std::vector<double>& sines() const { return b_; }

    double operator()(Vec2 p, const InclusionPair& g) const {
        switch (kind_) {
        case PresetKind::Constant: return value_;
        case PresetKind::LinearXn: return p.y;
        case PresetKind::LinearX1: return p.x;
        case PresetKind::Fourier: {
            double t = std::atan2(p.y - g.outer_center_height(), p.x);
            double s = 0.0;
            for (std::size_t k = 0; k < a_.size(); ++k) s += a_[k] * std::cos(double(k) * t);
            for (std::size_t k = 0; k < b_.size(); ++k) s += b_[k] * std::sin(double(k) * t);
            return s;
        }
        }
        return 0.0;
    }

    /// Max |phi| over the outer circle (exact for the linear presets, a bound for Fourier).
    double magnitude(const InclusionPair& g) const {
        switch (kind_) {
        case PresetKind::Constant: return std::abs(value_);
        case PresetKind::LinearXn: return g.outer_radius() + std::abs(g.outer_center_height());
        case PresetKind::LinearX1: return g.outer_radius();
        case PresetKind::Fourier: {
            double s = 0.0;
            for (double v : a_) s += std::abs(v);
            for (double v : b_) s += std::abs(v);
            return s;
        }
        }
        return 0.0;
    }

private:
    BoundaryData(PresetKind k, double v, std::vector<double> a, std::vector<double> b)
        : kind_(k), value_(v), a_(std::move(a)), b_(std::move(b)) {}

    PresetKind kind_;
    double value_;
    std::vector<double> a_, b_;
};

struct Components {
    Vector v1, v2, v0;
};

struct FluxSystem {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
    double b1 = 0, b2 = 0;
};

struct Constants {
    double C1 = 0.0;
    double C2 = 0.0;
    double difference() const { return C1 - C2; }
};

struct SolveBundle {
    Components fields;
    FluxSystem system;
    Constants constants;
    Vector u, vb;
    double B_eps = 0.0;        ///< b1 - C2 (a11 + a12)
    double B_eps_direct = 0.0; ///< -flux(v_b, Inclusion1)
    double energy_v1 = 0.0;
    Vector w;                  ///< v1 - vbar1 at neck vertices, 0 elsewhere
};

/// Solves the 2x2 flux system sum_j a_ij C_j = b_i.
inline Constants solve_constants(const FluxSystem& s) {
    double det = s.a11 * s.a22 - s.a12 * s.a21;
    double scale = std::abs(s.a11 * s.a22) + std::abs(s.a12 * s.a21);
    if (!(std::abs(det) > 1e-14 * scale)) fail(ErrorKind::Solver, "singular flux system");
    return {(s.b1 * s.a22 - s.a12 * s.b2) / det, (s.a11 * s.b2 - s.a21 * s.b1) / det};
}

/// One mesh, one stiffness matrix, one factorization shared by every solve.
class ConductivityProblem {
public:
    ConductivityProblem(const Mesh& mesh, const InclusionPair& g, SolverOptions opt = {})
        : mesh_(mesh), g_(g), K_(assemble_stiffness(mesh)), solver_(K_, boundary_mask(mesh), opt),
          ind1_(indicator(mesh, VertexTag::Inclusion1)), ind2_(indicator(mesh, VertexTag::Inclusion2)) {}

    const Mesh& mesh() const { return mesh_; }
    const InclusionPair& geometry() const { return g_; }
    const SparseMatrix& stiffness() const { return K_; }
    const Vector& indicator1() const { return ind1_; }
    const Vector& indicator2() const { return ind2_; }

    /// Dirichlet data: value per boundary vertex tag, phi on the outer circle.
    Vector data(double on1, double on2, const std::optional<BoundaryData>& phi, double outer_constant = 0.0) const {
        Vector d = Vector::Zero(Eigen::Index(mesh_.num_vertices()));
        for (std::size_t i = 0; i < mesh_.num_vertices(); ++i) {
            switch (mesh_.vertex_tags[i]) {
            case VertexTag::Inclusion1: d[Eigen::Index(i)] = on1; break;
            case VertexTag::Inclusion2: d[Eigen::Index(i)] = on2; break;
            case VertexTag::Excision: d[Eigen::Index(i)] = on1; break;
            case VertexTag::Outer: d[Eigen::Index(i)] = phi ? (*phi)(mesh_.vertices[i], g_) : outer_constant; break;
            case VertexTag::Interior: break;
            }
        }
        return d;
    }

    Vector solve_dirichlet(const Vector& data, SolveStats* stats = nullptr) const { return solver_.solve(data, stats); }

    Components solve_components(const BoundaryData& phi) const {
        return {solver_.solve(data(1.0, 0.0, std::nullopt)), solver_.solve(data(0.0, 1.0, std::nullopt)),
                solver_.solve(data(0.0, 0.0, phi))};
    }

    FluxSystem flux_system(const Components& c) const {
        FluxSystem s;
        s.a11 = flux(K_, c.v1, ind1_);
        s.a12 = flux(K_, c.v2, ind1_);
        s.a21 = flux(K_, c.v1, ind2_);
        s.a22 = flux(K_, c.v2, ind2_);
        s.b1 = -flux(K_, c.v0, ind1_);
        s.b2 = -flux(K_, c.v0, ind2_);
        return s;
    }

    SolveBundle solve(const BoundaryData& phi) const {
        SolveBundle b;
        b.fields = solve_components(phi);
        b.system = flux_system(b.fields);
        b.constants = solve_constants(b.system);
        compose(b);
        return b;
    }

    /// u = C1 v1 + C2 v2 + v0, v_b = C2 (v1 + v2) + v0 and the blow-up factor.
    void compose(SolveBundle& b) const {
        const Components& f = b.fields;
        const double C1 = b.constants.C1, C2 = b.constants.C2;
        b.u = C1 * f.v1 + C2 * f.v2 + f.v0;
        b.vb = C2 * (f.v1 + f.v2) + f.v0;
        b.B_eps = b.system.b1 - C2 * (b.system.a11 + b.system.a12);
        b.B_eps_direct = -flux(K_, b.vb, ind1_);
        b.energy_v1 = energy(K_, f.v1);
        b.w = neck_remainder(f.v1);
    }

    /// v1 - vbar1 on the strip vertices.
    Vector neck_remainder(const Vector& v1) const {
        Vector w = Vector::Zero(v1.size());
        for (const auto& fiber : mesh_.fibers)
            for (int v : fiber) {
                std::array<double, 2> x{mesh_.vertices[v].x, mesh_.vertices[v].y};
                w[v] = v1[v] - vbar_eval(g_, x);
            }
        return w;
    }

private:
    const Mesh& mesh_;
    InclusionPair g_;
    SparseMatrix K_;
    DirichletSolver solver_;
    Vector ind1_, ind2_;
};

// ---------------------------------------------------------------------------
// Touching limit

enum class LimitMethod { Extrapolated, DirectTruncatedCusp };

inline const char* to_string(LimitMethod m) {
    return m == LimitMethod::Extrapolated ? "extrapolated" : "direct_truncated_cusp";
}

struct CuspSolve {
    double r_cut = 0.0;
    double C0 = 0.0;
    double B0 = 0.0;
    double energy_u01 = 0.0;
    double merged_flux_u01 = 0.0;
};

struct LimitBundle {
    LimitMethod method = LimitMethod::Extrapolated;
    double B0 = 0.0;
    double uncertainty = 0.0;
    std::optional<double> C0;
    std::optional<double> slope; ///< c in B_eps = B0 + c rho(eps)
    std::optional<FitResult> fit;
    std::vector<CuspSolve> cusp; ///< direct method: one entry per cut radius
};

/// Least squares B_eps = B0 + c rho_n^m(eps).
inline LimitBundle estimate_B0(std::span<const double> eps, std::span<const double> B, int n, double m) {
    require(eps.size() == B.size() && eps.size() >= 3, "extrapolation needs at least three gaps");
    std::vector<double> rho;
    for (double e : eps) rho.push_back(rho_n_m(e, n, m));
    FitResult f = ols(rho, B, "B_eps = B0 + c rho(eps)");
    LimitBundle out;
    out.method = LimitMethod::Extrapolated;
    out.B0 = f.intercept;
    out.slope = f.slope;
    out.uncertainty = f.intercept_stderr;
    out.fit = f;
    return out;
}

/// D1 part of the merged conductor: Inclusion1 vertices plus the upper half of
/// each excision fiber (the middle row counts one half).
inline Vector upper_conductor_weights(const Mesh& m) {
    Vector w = indicator(m, VertexTag::Inclusion1);
    const int L = m.layers;
    for (const auto& fiber : m.fibers) {
        if (fiber.size() < 3 || m.vertex_tags[fiber[1]] != VertexTag::Excision) continue;
        for (int k = 1; k < L; ++k) {
            if (2 * k > L) w[fiber[k]] = 1.0;
            if (2 * k == L) w[fiber[k]] = 0.5;
        }
    }
    return w;
}

inline CuspSolve solve_cusp(const Mesh& m, const InclusionPair& touching, const BoundaryData& phi,
                            SolverOptions opt = {}) {
    ConductivityProblem prob(m, touching, opt);
    Vector merged = Vector::Zero(Eigen::Index(m.num_vertices()));
    for (std::size_t i = 0; i < m.num_vertices(); ++i) {
        VertexTag t = m.vertex_tags[i];
        if (t == VertexTag::Inclusion1 || t == VertexTag::Inclusion2 || t == VertexTag::Excision)
            merged[Eigen::Index(i)] = 1.0;
    }
    Vector d1 = prob.data(1.0, 1.0, std::nullopt);
    Vector d0 = prob.data(0.0, 0.0, phi);
    Vector u01 = prob.solve_dirichlet(d1);
    Vector u00 = prob.solve_dirichlet(d0);
    const SparseMatrix& K = prob.stiffness();
    CuspSolve s;
    s.merged_flux_u01 = flux(K, u01, merged);
    s.energy_u01 = energy(K, u01);
    require(s.merged_flux_u01 > 0.0, "limit capacity is not positive", ErrorKind::Solver);
    s.C0 = -flux(K, u00, merged) / s.merged_flux_u01;
    Vector u0 = s.C0 * u01 + u00;
    s.B0 = -flux(K, u0, upper_conductor_weights(m));
    return s;
}

/// Truncated-cusp realization of the touching limit at r_cut and r_cut / 2;
/// the finer value is reported with their difference as uncertainty.
inline LimitBundle solve_limit_direct(const MeshGenerator& gen, const BoundaryData& phi, double r_cut,
                                      SolverOptions opt = {}) {
    LimitBundle out;
    out.method = LimitMethod::DirectTruncatedCusp;
    for (double r : {r_cut, 0.5 * r_cut}) {
        Mesh m = gen.generate_cusp(r);
        CuspSolve s = solve_cusp(m, gen.reference(), phi, opt);
        s.r_cut = r;
        out.cusp.push_back(s);
    }
    out.B0 = out.cusp.back().B0;
    out.C0 = out.cusp.back().C0;
    out.uncertainty = std::abs(out.cusp.back().B0 - out.cusp.front().B0);
    return out;
}

} // namespace nclab
