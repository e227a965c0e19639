#pragma once

// Mesh generation for the two-dimensional domain D \ (D1 u D2).
//
// The neck |x'| <= R0 is a structured strip: vertical fibers at graded
// stations, L layers between the profile curves. The far field is a Delaunay
// refinement of the complement, built once at the touching configuration and
// carried to a given gap by a harmonic vertical displacement, so a whole
// epsilon sweep shares one far-field connectivity.

#include "nclab/delaunay.hpp"
#include "nclab/error.hpp"
#include "nclab/fem.hpp"
#include "nclab/geometry.hpp"
#include "nclab/mesh_types.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <unordered_map>
#include <vector>

namespace nclab {

struct MeshParams {
    int layers = 6;                       ///< L, cells across the gap
    double h_far = 0.25;                  ///< far-field target edge length
    double h_near = 0.02;                 ///< edge length along the inclusion caps
    double grade = 0.3;                   ///< growth of the edge length away from the caps
    double neck_step = 0.15;              ///< tangential step factor in the strip
    std::optional<double> grading_exponent; ///< strip step ~ (delta/lambda)^exponent; default 1/m
    int level = 0;                        ///< refinement level; lengths shrink by level_ratio^level
    double level_ratio = 1.5;

    void validate() const {
        require(layers >= 4, "layers across the gap must be >= 4", ErrorKind::Config);
        require(h_far > 0.0 && h_near > 0.0 && h_near <= h_far, "need 0 < h_near <= h_far", ErrorKind::Config);
        require(grade > 0.0, "grade must be positive", ErrorKind::Config);
        require(neck_step > 0.0, "neck step must be positive", ErrorKind::Config);
        require(level >= 0 && level_ratio > 1.0, "bad refinement level", ErrorKind::Config);
        if (grading_exponent)
            require(*grading_exponent > 0.0 && *grading_exponent <= 1.0, "grading exponent must lie in (0, 1]",
                    ErrorKind::Config);
    }

    bool operator==(const MeshParams&) const = default;

    double scale() const { return std::pow(level_ratio, level); }
    double exponent(const NeckProfile& p) const { return grading_exponent.value_or(1.0 / p.order()); }
};

namespace detail {

enum SegmentTag : int { kOuter = 0, kCap1 = 1, kCap2 = 2, kRight = 3, kLeft = 4, kMirror = 5 };

/// Vertex heights of the fiber at x: exact profile values at rows 0 and L.
inline std::vector<double> fiber_rows(const InclusionPair& g, double x, int layers) {
    Heights h = g.heights(x);
    double bot = h.lower, top = g.epsilon() + h.upper;
    double scale = std::max({1.0, std::abs(bot), std::abs(top)});
    if ((top - bot) / layers <= 64.0 * DBL_EPSILON * scale)
        fail(ErrorKind::Mesh, "gap too thin for the requested number of layers");
    std::vector<double> y(layers + 1);
    for (int k = 0; k <= layers; ++k) y[k] = bot + (top - bot) * (double(k) / layers);
    y.front() = bot;
    y.back() = top;
    return y;
}

/// Stations from `start` to R0 inclusive, step neck_step * (delta/lambda)^exponent.
inline std::vector<double> half_stations(const InclusionPair& g, const MeshParams& p, double start) {
    const double r0 = g.neck_radius();
    const double c = g.profile().coefficient();
    const double gamma = p.exponent(g.profile());
    const double eta = p.neck_step / p.scale();
    std::vector<double> xs{start};
    while (true) {
        double x = xs.back();
        double dx = eta * std::pow(g.gap(x) / c, gamma);
        if (!(dx > 0.0)) fail(ErrorKind::Mesh, "zero strip step (touching profiles need a cut-off)");
        if (x + dx >= r0) {
            if (r0 - x < 0.5 * dx && xs.size() > 1)
                xs.back() = r0;
            else
                xs.push_back(r0);
            break;
        }
        xs.push_back(x + dx);
        if (xs.size() > 2'000'000) fail(ErrorKind::Mesh, "strip station budget exceeded");
    }
    return xs;
}

struct FarField {
    std::vector<Vec2> points;
    std::vector<Triangle> triangles;
    std::vector<delaunay::Segment> segments;
    std::vector<int> right_rows, left_rows; ///< far-field point of row k on x' = +-R0
};

inline void add_polyline(delaunay::Pslg& G, int from, int to, int tag, const std::function<double(Vec2)>& size) {
    Vec2 a = G.points[from], b = G.points[to];
    double len = norm(b - a);
    std::vector<double> ts{0.0};
    while (true) {
        Vec2 q = a + (ts.back() / len) * (b - a);
        double t = ts.back() + size(q);
        if (t >= len) break;
        ts.push_back(t);
    }
    int n = int(ts.size());
    // spread evenly-graded parameters so the last piece is not a sliver
    double stretch = len / (ts.back() + size(a + (ts.back() / len) * (b - a)));
    int prev = from;
    for (int i = 1; i < n; ++i) {
        Vec2 q = a + (ts[i] * stretch / len) * (b - a);
        int id = G.add_point(q);
        G.segments.push_back({prev, id, tag});
        prev = id;
    }
    G.segments.push_back({prev, to, tag});
}

inline void add_arc(delaunay::Pslg& G, int arc, double t0, double t1, int from, int to, int tag, double h) {
    const delaunay::Arc& A = G.arcs[arc];
    int pieces = std::max(2, int(std::ceil(A.radius * std::abs(t1 - t0) / h)));
    int prev = from;
    double tprev = t0;
    for (int i = 1; i <= pieces; ++i) {
        double t = t0 + (t1 - t0) * (double(i) / pieces);
        int id = to;
        if (i < pieces) id = G.add_point({A.center.x + A.radius * std::cos(t), A.center.y + A.radius * std::sin(t)});
        delaunay::Segment s{prev, id, tag, arc, tprev, t};
        if (i == pieces) s.tb = t1;
        G.segments.push_back(s);
        prev = id;
        tprev = t;
    }
}

/// Delaunay far field of g; `half` meshes y > eps/2 and reflects.
inline FarField build_far_field(const InclusionPair& g, const MeshParams& p, bool half) {
    const int L = p.layers;
    const double s = p.scale();
    const double hf = p.h_far / s, hn = p.h_near / s, grade = p.grade / s;
    const double r0 = g.neck_radius(), rd = g.outer_radius(), oc = g.outer_center_height();
    const Cap& c1 = g.upper_cap();
    const Cap& c2 = g.lower_cap();
    const double yc = oc;
    if (half) require(g.mirror_symmetric() && L % 2 == 0, "half meshing needs a symmetric pair", ErrorKind::Mesh);

    auto size = [=](Vec2 q) {
        double d1 = norm(q - Vec2{0.0, c1.center_height}) - c1.radius;
        double d2 = norm(q - Vec2{0.0, c2.center_height}) - c2.radius;
        double d = std::max(0.0, std::min(d1, d2));
        return std::min(hf, hn + grade * d);
    };

    delaunay::Pslg G;
    G.arcs = {{{0.0, oc}, rd}, {{0.0, c1.center_height}, c1.radius}, {{0.0, c2.center_height}, c2.radius}};
    FarField F;
    std::vector<double> rows = fiber_rows(g, r0, L);
    const int k0 = half ? L / 2 : 0;
    if (half) rows[L / 2] = yc;
    F.right_rows.assign(L + 1, -1);
    F.left_rows.assign(L + 1, -1);
    for (int k = k0; k <= L; ++k) F.right_rows[k] = G.add_point({r0, rows[k]});
    for (int k = k0; k <= L; ++k) F.left_rows[k] = G.add_point({-r0, rows[k]});
    for (int k = k0; k < L; ++k) {
        G.segments.push_back({F.right_rows[k], F.right_rows[k + 1], kRight});
        G.segments.push_back({F.left_rows[k], F.left_rows[k + 1], kLeft});
    }

    const double t1 = std::atan2(c1.junction_height - c1.center_height, r0);
    add_arc(G, 1, t1, std::numbers::pi - t1, F.right_rows[L], F.left_rows[L], kCap1, hn);
    if (!half) {
        const double t2 = std::atan2(c2.junction_height - c2.center_height, r0);
        add_arc(G, 2, std::numbers::pi - t2, 2.0 * std::numbers::pi + t2, F.left_rows[0], F.right_rows[0], kCap2, hn);
    }

    const int outer_pieces = 2 * std::max(8, int(std::ceil(std::numbers::pi * rd / hf)));
    if (half) {
        int pr = G.add_point({rd, yc});
        int pl = G.add_point({-rd, yc});
        add_arc(G, 0, 0.0, std::numbers::pi, pr, pl, kOuter, 2.0 * std::numbers::pi * rd / outer_pieces);
        add_polyline(G, F.right_rows[L / 2], pr, kMirror, size);
        add_polyline(G, pl, F.left_rows[L / 2], kMirror, size);
    } else {
        int p0 = G.add_point({rd, oc});
        int pm = G.add_point({-rd, oc});
        double h = 2.0 * std::numbers::pi * rd / outer_pieces;
        add_arc(G, 0, 0.0, std::numbers::pi, p0, pm, kOuter, h);
        add_arc(G, 0, std::numbers::pi, 2.0 * std::numbers::pi, pm, p0, kOuter, h);
    }

    delaunay::RefineOptions opt;
    opt.min_angle_deg = 20.0;
    opt.size = size;
    opt.inside = [&g, r0, half, yc](Vec2 q) {
        return g.classify(q, r0) == Region::InFar && (!half || q.y > yc);
    };
    Vec2 seed{0.0, 0.5 * (c1.center_height + c1.radius + oc + rd)};
    delaunay::Refined R = delaunay::refine(G, seed, opt);

    F.points = std::move(R.points);
    F.triangles = std::move(R.triangles);
    for (const auto& seg : R.segments)
        if (seg.tag != kMirror) F.segments.push_back(seg);
    if (!half) return F;

    const int n = int(F.points.size());
    std::vector<int> mirror(n);
    for (int i = 0; i < n; ++i) {
        if (F.points[i].y == yc) {
            mirror[i] = i;
        } else {
            mirror[i] = int(F.points.size());
            F.points.push_back({F.points[i].x, 2.0 * yc - F.points[i].y});
        }
    }
    const std::size_t nt = F.triangles.size();
    for (std::size_t t = 0; t < nt; ++t) {
        Triangle T = F.triangles[t];
        F.triangles.push_back({mirror[T[0]], mirror[T[2]], mirror[T[1]]});
    }
    const std::size_t ns = F.segments.size();
    for (std::size_t i = 0; i < ns; ++i) {
        delaunay::Segment seg = F.segments[i];
        int tag = seg.tag == kCap1 ? kCap2 : seg.tag;
        F.segments.push_back({mirror[seg.b], mirror[seg.a], tag});
    }
    for (int k = 0; k < L / 2; ++k) {
        F.right_rows[k] = mirror[F.right_rows[L - k]];
        F.left_rows[k] = mirror[F.left_rows[L - k]];
    }
    return F;
}

/// Harmonic vertical displacement per unit gap change: 1 on the upper cap,
/// 0 on the lower cap, the outer-centre shift on the outer circle and the
/// fractional fiber height on the interfaces.
inline Vector unit_displacement(const FarField& F, const InclusionPair& g) {
    const std::size_t n = F.points.size();
    std::vector<std::uint8_t> fixed(n, 0);
    Vector val = Vector::Zero(Eigen::Index(n));
    Heights h = g.heights(g.neck_radius());
    const double bot = h.lower, top = g.epsilon() + h.upper;
    for (const auto& seg : F.segments)
        for (int v : {seg.a, seg.b}) {
            fixed[v] = 1;
            switch (seg.tag) {
            case kOuter: val[v] = g.outer_shift(); break;
            case kCap1: val[v] = 1.0; break;
            case kCap2: val[v] = 0.0; break;
            default: val[v] = (F.points[v].y - bot) / (top - bot); break;
            }
        }
    SparseMatrix K = assemble_stiffness(F.points, F.triangles);
    DirichletSolver solver(K, fixed);
    return solver.solve(val);
}

struct StripPiece {
    std::vector<double> stations;
    bool left_is_interface = true;  ///< first fiber is x' = -R0 (else an excision fiber)
    bool right_is_interface = true; ///< last fiber is x' = +R0
};

inline double cot_at(Vec2 apex, Vec2 a, Vec2 b) {
    Vec2 u = a - apex, v = b - apex;
    return dot(u, v) / std::abs(cross(u, v));
}

/// Zipper triangulation of a strip cell between two vertical chains.
inline void zip_cell(const std::vector<Vec2>& P, const std::vector<int>& left, const std::vector<int>& right,
                     bool prefer_rising, std::vector<Triangle>& out) {
    std::size_t i = 0, j = 0;
    while (i + 1 < left.size() || j + 1 < right.size()) {
        bool rise; // advance the right chain: diagonal from left[i] up to right[j+1]
        if (i + 1 == left.size()) {
            rise = true;
        } else if (j + 1 == right.size()) {
            rise = false;
        } else {
            Vec2 l0 = P[left[i]], l1 = P[left[i + 1]], r0 = P[right[j]], r1 = P[right[j + 1]];
            double ca = cot_at(r0, l0, r1) + cot_at(l1, r1, l0);
            double cb = cot_at(l0, r0, l1) + cot_at(r1, l1, r0);
            double tol = 1e-12 * (std::abs(ca) + std::abs(cb) + 1.0);
            if (std::abs(ca - cb) <= tol)
                rise = prefer_rising;
            else
                rise = ca > cb;
        }
        if (rise) {
            out.push_back({left[i], right[j], right[j + 1]});
            ++j;
        } else {
            out.push_back({left[i], right[j], left[i + 1]});
            ++i;
        }
    }
}

/// Restores the Delaunay property by edge flips; edges on the boundary and
/// edges between neck and far-field triangles never move.
inline int lawson_flips(Mesh& m) {
    const int nt = int(m.triangles.size());
    std::vector<std::array<int, 3>> nb(nt, {-1, -1, -1});
    std::unordered_map<std::uint64_t, std::pair<int, int>> open;
    open.reserve(3 * nt);
    for (int t = 0; t < nt; ++t)
        for (int i = 0; i < 3; ++i) {
            int a = m.triangles[t][(i + 1) % 3], b = m.triangles[t][(i + 2) % 3];
            auto key = delaunay::detail::edge_key(a, b);
            auto it = open.find(key);
            if (it == open.end()) {
                open.emplace(key, std::pair{t, i});
            } else {
                nb[t][i] = it->second.first;
                nb[it->second.first][it->second.second] = t;
                open.erase(it);
            }
        }
    std::vector<std::pair<int, int>> stack;
    for (int t = 0; t < nt; ++t)
        for (int i = 0; i < 3; ++i)
            if (nb[t][i] > t) stack.push_back({t, i});

    auto local = [&](int t, int v) {
        const Triangle& T = m.triangles[t];
        return T[0] == v ? 0 : (T[1] == v ? 1 : 2);
    };
    int flips = 0;
    while (!stack.empty()) {
        auto [t, i] = stack.back();
        stack.pop_back();
        int u = nb[t][i];
        if (u < 0 || m.neck[t] != m.neck[u]) continue;
        Triangle T = m.triangles[t];
        int p = T[i], q = T[(i + 1) % 3], r = T[(i + 2) % 3];
        Triangle U = m.triangles[u];
        int j = 3 - local(u, q) - local(u, r);
        if (U[(j + 1) % 3] != r || U[(j + 2) % 3] != q) continue;
        int s = U[j];
        const auto& V = m.vertices;
        double cp = cot_at(V[p], V[q], V[r]), cs = cot_at(V[s], V[r], V[q]);
        if (!(cp + cs < -1e-12 * (std::abs(cp) + std::abs(cs) + 1.0))) continue;

        int A = nb[t][(i + 1) % 3]; // across (r, p)
        int B = nb[t][(i + 2) % 3]; // across (p, q)
        int C = nb[u][local(u, r)]; // across (q, s)
        int D = nb[u][local(u, q)]; // across (s, r)
        m.triangles[t] = {p, q, s};
        nb[t] = {C, u, B};
        m.triangles[u] = {p, s, r};
        nb[u] = {D, A, t};
        if (C >= 0)
            for (int& x : nb[C]) if (x == u) x = t;
        if (A >= 0)
            for (int& x : nb[A]) if (x == t) x = u;
        ++flips;
        stack.push_back({t, 0});
        stack.push_back({t, 2});
        stack.push_back({u, 0});
        stack.push_back({u, 1});
    }
    return flips;
}

/// Joins a far field (already at the target gap) with structured strips.
inline Mesh assemble(const InclusionPair& g, const MeshParams& p, const FarField& F, std::vector<Vec2> far_points,
                     const std::vector<StripPiece>& pieces) {
    const int L = p.layers;
    Mesh m;
    m.vertices = std::move(far_points);
    m.triangles = F.triangles;
    m.neck.assign(F.triangles.size(), 0);
    m.layers = L;

    // interface points beyond the row vertices, by side
    std::vector<int> extra_right, extra_left;
    {
        std::vector<std::uint8_t> is_row(m.vertices.size(), 0);
        for (int v : F.right_rows) is_row[v] = 1;
        for (int v : F.left_rows) is_row[v] = 1;
        std::vector<std::uint8_t> seen(m.vertices.size(), 0);
        for (const auto& seg : F.segments) {
            if (seg.tag != kRight && seg.tag != kLeft) continue;
            for (int v : {seg.a, seg.b}) {
                if (is_row[v] || seen[v]) continue;
                seen[v] = 1;
                (seg.tag == kRight ? extra_right : extra_left).push_back(v);
            }
        }
        auto by_y = [&m](int a, int b) { return m.vertices[a].y < m.vertices[b].y; };
        std::sort(extra_right.begin(), extra_right.end(), by_y);
        std::sort(extra_left.begin(), extra_left.end(), by_y);
    }

    std::vector<BoundaryEdge> strip_edges;
    for (const StripPiece& piece : pieces) {
        const std::size_t ns = piece.stations.size();
        std::vector<std::vector<int>> fibers(ns);
        for (std::size_t i = 0; i < ns; ++i) {
            double x = piece.stations[i];
            std::vector<double> y = fiber_rows(g, x, L);
            bool left_iface = i == 0 && piece.left_is_interface;
            bool right_iface = i + 1 == ns && piece.right_is_interface;
            for (int k = 0; k <= L; ++k) {
                int v;
                if (left_iface) {
                    v = F.left_rows[k];
                    m.vertices[v] = {x, y[k]};
                } else if (right_iface) {
                    v = F.right_rows[k];
                    m.vertices[v] = {x, y[k]};
                } else {
                    v = int(m.vertices.size());
                    m.vertices.push_back({x, y[k]});
                }
                fibers[i].push_back(v);
            }
        }
        auto chain = [&](std::size_t i, int k) {
            std::vector<int> c{fibers[i][k]};
            const std::vector<int>* extra = nullptr;
            if (i == 0 && piece.left_is_interface) extra = &extra_left;
            if (i + 1 == ns && piece.right_is_interface) extra = &extra_right;
            if (extra) {
                double lo = m.vertices[fibers[i][k]].y, hi = m.vertices[fibers[i][k + 1]].y;
                for (int v : *extra)
                    if (m.vertices[v].y > lo && m.vertices[v].y < hi) c.push_back(v);
            }
            c.push_back(fibers[i][k + 1]);
            return c;
        };
        for (std::size_t i = 0; i + 1 < ns; ++i) {
            for (int k = 0; k < L; ++k) {
                zip_cell(m.vertices, chain(i, k), chain(i + 1, k), 2 * k + 1 < L, m.triangles);
                m.neck.resize(m.triangles.size(), 1);
            }
            strip_edges.push_back({fibers[i][L], fibers[i + 1][L], BoundaryTag::Inclusion1});
            strip_edges.push_back({fibers[i + 1][0], fibers[i][0], BoundaryTag::Inclusion2});
        }
        if (!piece.left_is_interface)
            for (int k = 0; k < L; ++k) strip_edges.push_back({fibers[0][k + 1], fibers[0][k], BoundaryTag::Excision});
        if (!piece.right_is_interface)
            for (int k = 0; k < L; ++k) strip_edges.push_back({fibers[ns - 1][k], fibers[ns - 1][k + 1], BoundaryTag::Excision});
        m.stations.insert(m.stations.end(), piece.stations.begin(), piece.stations.end());
        m.fibers.insert(m.fibers.end(), fibers.begin(), fibers.end());
    }

    for (const auto& seg : F.segments) {
        if (seg.tag == kOuter) m.boundary.push_back({seg.a, seg.b, BoundaryTag::Outer});
        if (seg.tag == kCap1) m.boundary.push_back({seg.a, seg.b, BoundaryTag::Inclusion1});
        if (seg.tag == kCap2) m.boundary.push_back({seg.a, seg.b, BoundaryTag::Inclusion2});
    }
    m.boundary.insert(m.boundary.end(), strip_edges.begin(), strip_edges.end());

    m.vertex_tags.assign(m.vertices.size(), VertexTag::Interior);
    for (const BoundaryEdge& b : m.boundary)
        if (b.tag != BoundaryTag::Excision) m.vertex_tags[b.a] = m.vertex_tags[b.b] = vertex_tag_for(b.tag);
    for (const BoundaryEdge& b : m.boundary)
        if (b.tag == BoundaryTag::Excision)
            for (int v : {b.a, b.b})
                if (m.vertex_tags[v] == VertexTag::Interior) m.vertex_tags[v] = VertexTag::Excision;

    lawson_flips(m);
    return m;
}

inline bool all_positive(const Mesh& m) {
    for (const Triangle& t : m.triangles)
        if (!(m.signed_area(t) > 0.0)) return false;
    return true;
}

} // namespace detail

/// Builds meshes for one geometry family (all parameters but the gap fixed).
/// The far field is refined once at the touching configuration.
class MeshGenerator {
public:
    MeshGenerator(const InclusionPair& family, MeshParams params)
        : ref_(family.with_epsilon(0.0)), params_(std::move(params)) {
        require(family.dimension() == 2, "meshing is implemented for n = 2 only", ErrorKind::Domain);
        params_.validate();
        half_ = ref_.mirror_symmetric() && params_.layers % 2 == 0;
        far_ = detail::build_far_field(ref_, params_, half_);
        lift_ = detail::unit_displacement(far_, ref_);
    }

    const MeshParams& params() const { return params_; }
    const InclusionPair& reference() const { return ref_; }

    Mesh generate(double eps) const {
        require(eps > 0.0, "mesh generation needs a positive gap", ErrorKind::Domain);
        InclusionPair g = ref_.with_epsilon(eps);
        std::vector<Vec2> pts = far_.points;
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i].y += eps * lift_[Eigen::Index(i)];
        Mesh m = detail::assemble(g, params_, far_, std::move(pts), {neck_piece(g)});
        if (detail::all_positive(m)) return m;
        // large gap: refine the far field afresh at this gap
        detail::FarField direct = detail::build_far_field(g, params_, half_);
        m = detail::assemble(g, params_, direct, direct.points, {neck_piece(g)});
        if (!detail::all_positive(m)) fail(ErrorKind::Mesh, "inverted triangles after meshing");
        return m;
    }

    /// Touching configuration with |x'| < r_cut removed; the two cut fibers
    /// join the inclusions into one conductor.
    Mesh generate_cusp(double r_cut) const {
        require(r_cut > 0.0 && r_cut < ref_.neck_radius(), "cut radius must lie in (0, R0)", ErrorKind::Domain);
        std::vector<double> pos = detail::half_stations(ref_, params_, r_cut);
        detail::StripPiece right{pos, false, true};
        detail::StripPiece left;
        for (auto it = pos.rbegin(); it != pos.rend(); ++it) left.stations.push_back(-*it);
        left.left_is_interface = true;
        left.right_is_interface = false;
        Mesh m = detail::assemble(ref_, params_, far_, far_.points, {left, right});
        if (!detail::all_positive(m)) fail(ErrorKind::Mesh, "inverted triangles in cusp mesh");
        return m;
    }

private:
    detail::StripPiece neck_piece(const InclusionPair& g) const {
        std::vector<double> pos = detail::half_stations(g, params_, 0.0);
        detail::StripPiece s;
        for (auto it = pos.rbegin(); it + 1 != pos.rend(); ++it) s.stations.push_back(-*it);
        s.stations.insert(s.stations.end(), pos.begin(), pos.end());
        return s;
    }

    InclusionPair ref_;
    MeshParams params_;
    bool half_ = false;
    detail::FarField far_;
    Vector lift_;
};

inline Mesh generate(const InclusionPair& g, const MeshParams& p) { return MeshGenerator(g, p).generate(g.epsilon()); }

} // namespace nclab
