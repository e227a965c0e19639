#pragma once

// Piecewise-linear Lagrange elements on triangles: stiffness assembly,
// Dirichlet solves with a reusable factorization, energies and consistent
// boundary fluxes.

#include "nclab/error.hpp"
#include "nclab/mesh_types.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nclab {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct ElementGeometry {
    std::array<Vec2, 3> grad; ///< gradients of the three hat functions
    double area = 0.0;
};

inline ElementGeometry element_geometry(Vec2 a, Vec2 b, Vec2 c) {
    ElementGeometry e;
    double twice = cross(b - a, c - a);
    e.area = 0.5 * twice;
    // grad phi_i = rot(opposite edge) / (2 area)
    auto rot = [](Vec2 v) { return Vec2{-v.y, v.x}; };
    e.grad[0] = (1.0 / twice) * rot(c - b);
    e.grad[1] = (1.0 / twice) * rot(a - c);
    e.grad[2] = (1.0 / twice) * rot(b - a);
    return e;
}

inline SparseMatrix assemble_stiffness(std::span<const Vec2> points, std::span<const Triangle> triangles) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * triangles.size());
    for (const Triangle& t : triangles) {
        ElementGeometry e = element_geometry(points[t[0]], points[t[1]], points[t[2]]);
        if (!(e.area > 0.0)) fail(ErrorKind::Mesh, "degenerate or inverted triangle in assembly");
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], e.area * dot(e.grad[i], e.grad[j]));
    }
    SparseMatrix K(Eigen::Index(points.size()), Eigen::Index(points.size()));
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    return K;
}

inline SparseMatrix assemble_stiffness(const Mesh& m) { return assemble_stiffness(m.vertices, m.triangles); }

enum class SolverKind { Direct, ConjugateGradient };

struct SolverOptions {
    SolverKind kind = SolverKind::Direct;
    double cg_tolerance = 1e-12;
    int cg_max_iterations = 0; ///< 0 picks 50 sqrt(N)
};

struct SolveStats {
    SolverKind used = SolverKind::Direct;
    int iterations = 0;
    double residual = 0.0;
};

/// Solves K f = 0 at free vertices with prescribed values at constrained ones.
/// The interior block is factored once and reused for every right-hand side.
class DirichletSolver {
public:
    DirichletSolver(const SparseMatrix& K, std::vector<std::uint8_t> constrained, SolverOptions opt = {})
        : n_(K.rows()), constrained_(std::move(constrained)), opt_(opt) {
        require(Eigen::Index(constrained_.size()) == n_, "constraint mask size mismatch", ErrorKind::Solver);
        compact_.assign(n_, -1);
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (constrained_[i]) {
                compact_[i] = int(boundary_.size());
                boundary_.push_back(int(i));
            } else {
                compact_[i] = int(interior_.size());
                interior_.push_back(int(i));
            }
        }
        std::vector<Eigen::Triplet<double>> tii, tib;
        for (Eigen::Index col = 0; col < K.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
                if (constrained_[it.row()]) continue;
                if (constrained_[it.col()])
                    tib.emplace_back(compact_[it.row()], compact_[it.col()], it.value());
                else
                    tii.emplace_back(compact_[it.row()], compact_[it.col()], it.value());
            }
        const auto ni = Eigen::Index(interior_.size()), nb = Eigen::Index(boundary_.size());
        kii_.resize(ni, ni);
        kii_.setFromTriplets(tii.begin(), tii.end());
        kii_.makeCompressed();
        kib_.resize(ni, nb);
        kib_.setFromTriplets(tib.begin(), tib.end());
        kib_.makeCompressed();
        if (ni == 0) return;

        if (opt_.kind == SolverKind::Direct) {
            ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>();
            ldlt_->compute(kii_);
            if (ldlt_->info() != Eigen::Success) {
                ldlt_.reset();
                opt_.kind = SolverKind::ConjugateGradient;
            }
        }
        if (opt_.kind == SolverKind::ConjugateGradient) {
            cg_ = std::make_unique<CG>();
            int cap = opt_.cg_max_iterations > 0 ? opt_.cg_max_iterations
                                                 : int(50.0 * std::sqrt(double(ni))) + 100;
            cg_->setMaxIterations(cap);
            cg_->setTolerance(opt_.cg_tolerance);
            cg_->compute(kii_);
        }
    }

    Eigen::Index size() const { return n_; }
    bool constrained(Eigen::Index i) const { return constrained_[i] != 0; }
    SolverKind kind() const { return opt_.kind; }

    /// `values` supplies the constrained entries; free entries are ignored.
    Vector solve(const Vector& values, SolveStats* stats = nullptr) const {
        require(values.size() == n_, "Dirichlet data size mismatch", ErrorKind::Solver);
        Vector g(Eigen::Index(boundary_.size()));
        for (std::size_t k = 0; k < boundary_.size(); ++k) g[Eigen::Index(k)] = values[boundary_[k]];
        Vector out = values;
        if (interior_.empty()) return out;
        Vector rhs = -(kib_ * g);
        Vector x;
        SolveStats st;
        if (ldlt_) {
            x = ldlt_->solve(rhs);
            if (ldlt_->info() != Eigen::Success) fail(ErrorKind::Solver, "sparse LDLT solve failed");
            st.used = SolverKind::Direct;
        } else {
            x = cg_->solve(rhs);
            st.used = SolverKind::ConjugateGradient;
            st.iterations = int(cg_->iterations());
            if (cg_->info() != Eigen::Success)
                fail(ErrorKind::Solver, "conjugate gradient did not converge (residual " +
                                            std::to_string(cg_->error()) + ")");
        }
        double rn = rhs.norm();
        st.residual = rn > 0.0 ? (kii_ * x - rhs).norm() / rn : (kii_ * x).norm();
        for (std::size_t k = 0; k < interior_.size(); ++k) out[interior_[k]] = x[Eigen::Index(k)];
        if (stats) *stats = st;
        return out;
    }

private:
    using CG = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>;

    Eigen::Index n_;
    std::vector<std::uint8_t> constrained_;
    SolverOptions opt_;
    std::vector<int> compact_, interior_, boundary_;
    SparseMatrix kii_, kib_;
    std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
    std::unique_ptr<CG> cg_;
};

/// Dirichlet energy f^T K f.
inline double energy(const SparseMatrix& K, const Vector& f) { return f.dot(K * f); }

/// Consistent boundary flux: the discrete residual K f tested against a nodal
/// indicator (or weight) vector of a boundary part.
inline double flux(const SparseMatrix& K, const Vector& f, const Vector& indicator) {
    return indicator.dot(K * f);
}

inline Vector indicator(const Mesh& m, VertexTag tag, double weight = 1.0) {
    Vector v = Vector::Zero(Eigen::Index(m.num_vertices()));
    for (std::size_t i = 0; i < m.num_vertices(); ++i)
        if (m.vertex_tags[i] == tag) v[Eigen::Index(i)] = weight;
    return v;
}

inline std::vector<std::uint8_t> boundary_mask(const Mesh& m) {
    std::vector<std::uint8_t> mask(m.num_vertices(), 0);
    for (std::size_t i = 0; i < m.num_vertices(); ++i) mask[i] = m.vertex_tags[i] != VertexTag::Interior;
    return mask;
}

inline Vec2 triangle_gradient(const Mesh& m, std::size_t t, const Vector& f) {
    const Triangle& tri = m.triangles[t];
    ElementGeometry e = element_geometry(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]);
    Vec2 g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) g = g + f[tri[i]] * e.grad[i];
    return g;
}

struct GradientPeak {
    double value = 0.0;
    std::size_t triangle = 0;
};

/// Largest |grad f| over triangles accepted by `keep` (all when empty).
inline GradientPeak max_gradient(const Mesh& m, const Vector& f,
                                 const std::function<bool(std::size_t)>& keep = {}) {
    GradientPeak best;
    std::size_t seen = 0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        if (keep && !keep(t)) continue;
        ++seen;
        double g = norm(triangle_gradient(m, t, f));
        if (g > best.value) best = {g, t};
    }
    require(seen > 0, "gradient maximum over an empty region");
    return best;
}

inline GradientPeak max_gradient_neck(const Mesh& m, const Vector& f) {
    return max_gradient(m, f, [&m](std::size_t t) { return m.neck[t] != 0; });
}

} // namespace nclab
