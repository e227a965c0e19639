#pragma once

// Epsilon sweeps, rate and energy fits, leading-term checks and mesh
// self-convergence studies.

#include "nclab/closed_forms.hpp"
#include "nclab/conductivity.hpp"
#include "nclab/error.hpp"
#include "nclab/fitting.hpp"
#include "nclab/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace nclab {

struct StationValue {
    double x = 0.0;     ///< column midpoint
    double value = 0.0; ///< max over the column's triangles
};

struct MeshStats {
    std::size_t vertices = 0;
    std::size_t triangles = 0;
    std::size_t neck_triangles = 0;
    std::size_t stations = 0;
    double far_min_angle_deg = 0.0;
    double neck_max_aspect = 0.0;
};

struct SweepRecord {
    double epsilon = 0.0;
    double rho = 0.0;
    double energy_v1 = 0.0;
    FluxSystem system;
    double C1 = 0.0, C2 = 0.0;
    double B_eps = 0.0;
    double B_eps_direct = 0.0;
    double max_grad_u = 0.0;  ///< over neck triangles
    double max_grad_v1 = 0.0;
    double max_grad_w = 0.0;  ///< w = v1 - vbar1
    double max_grad_vb = 0.0;
    double max_grad_u_x = 0.0; ///< centroid x' of the maximizing triangle
    double centerline_residual = 0.0; ///< max |grad (u - (C1 - C2) I vbar1)| on the middle layer
    double min_v1 = 0.0, max_v1 = 0.0, min_v2 = 0.0, max_v2 = 0.0;
    std::vector<StationValue> vb_profile;
    MeshStats mesh;
    double wall_seconds = 0.0;
    bool ok = false;
    std::string error;
};

struct SweepSpec {
    InclusionPair family;
    BoundaryData phi;
    std::vector<double> epsilons;
    MeshParams mesh;
    SolverOptions solver;
    int threads = 0; ///< 0: hardware concurrency
};

namespace detail {

inline std::vector<StationValue> column_profile(const Mesh& m, const Vector& f) {
    std::vector<StationValue> out;
    if (m.stations.size() < 2) return out;
    std::vector<double> xs = m.stations;
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) out.push_back({0.5 * (xs[j] + xs[j + 1]), 0.0});
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        if (!m.neck[t]) continue;
        double cx = m.centroid(m.triangles[t]).x;
        auto it = std::upper_bound(xs.begin(), xs.end(), cx);
        if (it == xs.begin() || it == xs.end()) continue;
        std::size_t j = std::size_t(it - xs.begin()) - 1;
        out[j].value = std::max(out[j].value, norm(triangle_gradient(m, t, f)));
    }
    return out;
}

/// Max gradient of `f` over neck triangles on the middle layer of the gap.
inline double centerline_max_gradient(const Mesh& m, const InclusionPair& g, const Vector& f) {
    double worst = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        if (!m.neck[t]) continue;
        Vec2 c = m.centroid(m.triangles[t]);
        Heights h = g.heights(c.x);
        double delta = g.epsilon() + h.upper - h.lower;
        double mid = h.lower + 0.5 * delta;
        if (std::abs(c.y - mid) > delta / m.layers) continue;
        worst = std::max(worst, norm(triangle_gradient(m, t, f)));
    }
    return worst;
}

} // namespace detail

/// Solves one gap on a mesh from `gen` and condenses the result.
inline SweepRecord solve_record(const MeshGenerator& gen, const BoundaryData& phi, double eps,
                                const SolverOptions& solver = {}, SolveBundle* keep = nullptr, Mesh* keep_mesh = nullptr) {
    auto t0 = std::chrono::steady_clock::now();
    SweepRecord r;
    r.epsilon = eps;
    InclusionPair g = gen.reference().with_epsilon(eps);
    r.rho = rho_n_m(eps, g.dimension(), g.profile().order());
    Mesh m = gen.generate(eps);
    ConductivityProblem prob(m, g, solver);
    SolveBundle b = prob.solve(phi);
    r.energy_v1 = b.energy_v1;
    r.system = b.system;
    r.C1 = b.constants.C1;
    r.C2 = b.constants.C2;
    r.B_eps = b.B_eps;
    r.B_eps_direct = b.B_eps_direct;
    GradientPeak pu = max_gradient_neck(m, b.u);
    r.max_grad_u = pu.value;
    r.max_grad_u_x = m.centroid(m.triangles[pu.triangle]).x;
    r.max_grad_v1 = max_gradient_neck(m, b.fields.v1).value;
    r.max_grad_w = max_gradient_neck(m, b.w).value;
    r.max_grad_vb = max_gradient_neck(m, b.vb).value;
    // u - (C1 - C2) I vbar1, with I the nodal interpolant
    double diff = b.constants.difference();
    r.centerline_residual = detail::centerline_max_gradient(m, g, b.u - diff * (b.fields.v1 - b.w));
    r.min_v1 = b.fields.v1.minCoeff();
    r.max_v1 = b.fields.v1.maxCoeff();
    r.min_v2 = b.fields.v2.minCoeff();
    r.max_v2 = b.fields.v2.maxCoeff();
    r.vb_profile = detail::column_profile(m, b.vb);
    MeshAudit a = audit(m);
    r.mesh = {m.num_vertices(), m.num_triangles(), a.neck_triangles, m.stations.size(), a.far_min_angle_deg,
              a.neck_max_aspect};
    r.ok = true;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (keep) *keep = std::move(b);
    if (keep_mesh) *keep_mesh = std::move(m);
    return r;
}

/// One record per gap, largest gap first. Failures are recorded per gap.
inline std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
    require(!spec.epsilons.empty(), "empty gap list", ErrorKind::Config);
    std::vector<double> eps = spec.epsilons;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    require(std::adjacent_find(eps.begin(), eps.end()) == eps.end(), "duplicate gap values", ErrorKind::Config);

    MeshGenerator gen(spec.family, spec.mesh);
    std::vector<SweepRecord> out(eps.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < eps.size(); i = next++) {
            try {
                out[i] = solve_record(gen, spec.phi, eps[i], spec.solver);
            } catch (const std::exception& e) {
                out[i] = SweepRecord{};
                out[i].epsilon = eps[i];
                out[i].error = e.what();
            }
        }
    };
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned n = spec.threads > 0 ? unsigned(spec.threads) : hw;
    n = std::min<unsigned>(n, unsigned(eps.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    bool any = std::any_of(out.begin(), out.end(), [](const SweepRecord& r) { return r.ok; });
    if (!any) fail(ErrorKind::Solver, "every gap in the sweep failed: " + out.front().error);
    return out;
}

inline std::vector<double> log_spaced(double log10_start, double log10_stop, int points) {
    require(points >= 2, "log spacing needs at least two points", ErrorKind::Config);
    std::vector<double> v;
    for (int i = 0; i < points; ++i)
        v.push_back(std::pow(10.0, log10_start + (log10_stop - log10_start) * i / (points - 1)));
    return v;
}

using Selector = std::function<double(const SweepRecord&)>;

/// Least squares of log(quantity) on log(eps) over successful records.
inline FitResult fit_rate(const std::vector<SweepRecord>& recs, const Selector& q) {
    std::vector<double> x, y;
    for (const auto& r : recs)
        if (r.ok) {
            x.push_back(r.epsilon);
            y.push_back(q(r));
        }
    require(x.size() >= 4, "rate fits need at least four records");
    FitResult f = fit_loglog(x, y);
    f.model = "log q = a + b log eps";
    return f;
}

struct EnergyFit {
    double A = 0.0;
    double M = 0.0;
    FitResult fit;
    double M_half = 0.0;        ///< M refitted on the smaller-gap half
    double oracle = 0.0;        ///< lim gap_integral * rho (analytic)
    double oracle_numeric = 0.0;
    double printed = 0.0;       ///< stated closed-form constant
    double A_over_oracle() const { return A / oracle; }
    double A_over_printed() const { return A / printed; }
    double M_shift() const { return std::abs(M_half - M) / std::abs(M); }
};

/// energy(v1) = A / rho(eps) + M.
inline EnergyFit fit_energy_constants(const std::vector<SweepRecord>& recs, const InclusionPair& family) {
    std::vector<const SweepRecord*> ok;
    for (const auto& r : recs)
        if (r.ok) ok.push_back(&r);
    require(ok.size() >= 4, "energy fits need at least four records");
    auto fit = [](const std::vector<const SweepRecord*>& rs) {
        std::vector<double> x, y;
        for (const auto* r : rs) {
            x.push_back(1.0 / r->rho);
            y.push_back(r->energy_v1);
        }
        return ols(x, y, "energy = A / rho + M");
    };
    EnergyFit e;
    e.fit = fit(ok);
    e.A = e.fit.slope;
    e.M = e.fit.intercept;
    std::vector<const SweepRecord*> lower(ok.begin() + std::ptrdiff_t(ok.size() / 2), ok.end());
    if (lower.size() < 2) lower.assign(ok.end() - 2, ok.end());
    e.M_half = fit(lower).intercept;
    e.oracle = oracle_constant_analytic(family.profile(), family.dimension());
    e.oracle_numeric = oracle_constant_numeric(family);
    e.printed = printed_constant(family.profile(), family.dimension());
    return e;
}

struct LeadingTermReport {
    std::vector<double> residuals; ///< centerline residual per record
    double residual_growth = 0.0;  ///< max residual / residual at the largest gap
    double gradient_growth = 0.0;  ///< max|grad u| smallest gap / largest gap
    double coefficient_ratio = 0.0; ///< (C1 - C2) / (B0 rho / A) at the smallest gap
};

inline LeadingTermReport verify_leading_term(const std::vector<SweepRecord>& recs, double B0, double A) {
    std::vector<const SweepRecord*> ok;
    for (const auto& r : recs)
        if (r.ok) ok.push_back(&r);
    require(ok.size() >= 2, "leading-term check needs two records");
    LeadingTermReport rep;
    double worst = 0.0;
    for (const auto* r : ok) {
        rep.residuals.push_back(r->centerline_residual);
        worst = std::max(worst, r->centerline_residual);
    }
    rep.residual_growth = worst / ok.front()->centerline_residual;
    rep.gradient_growth = ok.back()->max_grad_u / ok.front()->max_grad_u;
    const SweepRecord& s = *ok.back();
    rep.coefficient_ratio = (s.C1 - s.C2) / (B0 * s.rho / A);
    return rep;
}

// ---------------------------------------------------------------------------
// Self-convergence

struct ConvergenceLevel {
    int level = 0;
    int layers = 0;
    std::size_t vertices = 0;
    double energy = 0.0;
    double difference = 0.0; ///< C1 - C2
    double B_eps = 0.0;
};

struct ConvergenceReport {
    double epsilon = 0.0;
    std::vector<ConvergenceLevel> levels;
    std::vector<double> energy_ratios, difference_ratios, B_ratios; ///< |d_k| / |d_{k+1}|
    double energy_error = 0.0; ///< finest-level difference
    double difference_error = 0.0;
    double B_error = 0.0;

    static bool shrinking(const std::vector<double>& r, double factor) {
        return !r.empty() && std::all_of(r.begin(), r.end(), [factor](double v) { return v >= factor; });
    }
    double relative_energy_error() const { return energy_error / std::abs(levels.back().energy); }
};

/// Level k uses layers round(base_layers * ratio^k) and every length divided by ratio^k.
inline ConvergenceReport mesh_convergence(const InclusionPair& g, const BoundaryData& phi, const MeshParams& base,
                                          int base_layers, int levels, const SolverOptions& solver = {}) {
    require(levels >= 3, "a convergence ladder needs at least three levels");
    ConvergenceReport rep;
    rep.epsilon = g.epsilon();
    for (int k = 0; k < levels; ++k) {
        MeshParams p = base;
        p.level = k;
        p.layers = int(std::lround(base_layers * std::pow(base.level_ratio, k)));
        MeshGenerator gen(g, p);
        Mesh m = gen.generate(g.epsilon());
        ConductivityProblem prob(m, g, solver);
        SolveBundle b = prob.solve(phi);
        rep.levels.push_back({k, p.layers, m.num_vertices(), b.energy_v1, b.constants.difference(), b.B_eps});
    }
    auto ratios = [&](auto get, std::vector<double>& out, double& last) {
        std::vector<double> d;
        for (std::size_t k = 1; k < rep.levels.size(); ++k) d.push_back(std::abs(get(rep.levels[k]) - get(rep.levels[k - 1])));
        for (std::size_t k = 1; k < d.size(); ++k) out.push_back(d[k - 1] / d[k]);
        last = d.back();
    };
    ratios([](const ConvergenceLevel& l) { return l.energy; }, rep.energy_ratios, rep.energy_error);
    ratios([](const ConvergenceLevel& l) { return l.difference; }, rep.difference_ratios, rep.difference_error);
    ratios([](const ConvergenceLevel& l) { return l.B_eps; }, rep.B_ratios, rep.B_error);
    return rep;
}

} // namespace nclab
