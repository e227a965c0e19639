#pragma once

// Incremental Bowyer-Watson triangulation with Ruppert-style conforming
// refinement. Segments may lie on circular arcs; they are split at their arc
// midpoints so refined boundary vertices stay on the curve.

#include "nclab/error.hpp"
#include "nclab/geometry.hpp"
#include "nclab/mesh_types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

namespace nclab::delaunay {

namespace detail {

inline long double orient(Vec2 a, Vec2 b, Vec2 c) {
    long double abx = (long double)b.x - a.x, aby = (long double)b.y - a.y;
    long double acx = (long double)c.x - a.x, acy = (long double)c.y - a.y;
    return abx * acy - aby * acx;
}

/// Positive when d lies strictly inside the circumcircle of counterclockwise abc.
inline long double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    long double adx = (long double)a.x - d.x, ady = (long double)a.y - d.y;
    long double bdx = (long double)b.x - d.x, bdy = (long double)b.y - d.y;
    long double cdx = (long double)c.x - d.x, cdy = (long double)c.y - d.y;
    long double al = adx * adx + ady * ady;
    long double bl = bdx * bdx + bdy * bdy;
    long double cl = cdx * cdx + cdy * cdy;
    return al * (bdx * cdy - bdy * cdx) + bl * (cdx * ady - cdy * adx) + cl * (adx * bdy - ady * bdx);
}

inline Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    long double bx = (long double)b.x - a.x, by = (long double)b.y - a.y;
    long double cx = (long double)c.x - a.x, cy = (long double)c.y - a.y;
    long double d = 2.0L * (bx * cy - by * cx);
    long double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    long double ux = (cy * b2 - by * c2) / d;
    long double uy = (bx * c2 - cx * b2) / d;
    return {double(a.x + ux), double(a.y + uy)};
}

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

} // namespace detail

class Triangulation {
public:
    struct Tri {
        std::array<int, 3> v{};
        std::array<int, 3> nb{-1, -1, -1}; ///< nb[i] lies across the edge opposite v[i]
        bool alive = true;
    };

    static constexpr int kSuper = 3;

    /// Starts from a super triangle enclosing the disc of `radius` about `center`.
    Triangulation(Vec2 center, double radius) {
        const double r = 2000.0 * radius;
        for (int k = 0; k < 3; ++k) {
            double t = 1.5707963267948966 + k * 2.0943951023931957;
            pts_.push_back({center.x + r * std::cos(t), center.y + r * std::sin(t)});
            vtri_.push_back(0);
        }
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
    }

    const std::vector<Vec2>& points() const { return pts_; }
    const std::vector<Tri>& triangles() const { return tris_; }
    const Tri& tri(int t) const { return tris_[t]; }
    Vec2 point(int v) const { return pts_[v]; }
    bool is_super(int v) const { return v < kSuper; }

    int locate(Vec2 p) const {
        int t = (hint_ >= 0 && hint_ < int(tris_.size()) && tris_[hint_].alive) ? hint_ : first_alive();
        unsigned rot = 0;
        const std::size_t cap = 4 * tris_.size() + 16;
        for (std::size_t step = 0; step < cap; ++step) {
            const Tri& T = tris_[t];
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                int i = int((k + rot) % 3);
                if (detail::orient(pts_[T.v[(i + 1) % 3]], pts_[T.v[(i + 2) % 3]], p) < 0 && T.nb[i] >= 0) {
                    t = T.nb[i];
                    moved = true;
                    break;
                }
            }
            ++rot;
            if (!moved) return t;
        }
        for (int i = 0; i < int(tris_.size()); ++i) {
            if (!tris_[i].alive) continue;
            const Tri& T = tris_[i];
            if (detail::orient(pts_[T.v[0]], pts_[T.v[1]], p) >= 0 &&
                detail::orient(pts_[T.v[1]], pts_[T.v[2]], p) >= 0 &&
                detail::orient(pts_[T.v[2]], pts_[T.v[0]], p) >= 0)
                return i;
        }
        fail(ErrorKind::Mesh, "point location failed");
    }

    /// Inserts p and returns its vertex index; `created` receives the new triangles.
    int insert(Vec2 p, std::vector<int>* created = nullptr) {
        int t0 = locate(p);
        for (int v : tris_[t0].v)
            if (norm(pts_[v] - p) <= 1e-14 * (1.0 + norm(p))) fail(ErrorKind::Mesh, "duplicate vertex");

        ++stamp_;
        if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
        cavity_.clear();
        cavity_.push_back(t0);
        mark_[t0] = stamp_;
        for (std::size_t k = 0; k < cavity_.size(); ++k) {
            const Tri& T = tris_[cavity_[k]];
            for (int n : T.nb) {
                if (n < 0 || mark_[n] == stamp_) continue;
                const Tri& N = tris_[n];
                if (detail::incircle(pts_[N.v[0]], pts_[N.v[1]], pts_[N.v[2]], p) > 0) {
                    mark_[n] = stamp_;
                    cavity_.push_back(n);
                }
            }
        }

        struct Rim {
            int a, b, outer;
        };
        std::vector<Rim> rim;
        for (bool star_shaped = false; !star_shaped;) {
            star_shaped = true;
            rim.clear();
            for (int c : cavity_) {
                const Tri& T = tris_[c];
                for (int i = 0; i < 3; ++i) {
                    int n = T.nb[i];
                    if (n >= 0 && mark_[n] == stamp_) continue;
                    int a = T.v[(i + 1) % 3], b = T.v[(i + 2) % 3];
                    if (detail::orient(pts_[a], pts_[b], p) <= 0) {
                        if (n < 0) fail(ErrorKind::Mesh, "insertion outside the super triangle");
                        mark_[n] = stamp_;
                        cavity_.push_back(n);
                        star_shaped = false;
                        break;
                    }
                    rim.push_back({a, b, n});
                }
                if (!star_shaped) break;
            }
        }

        for (int c : cavity_)
            for (int v : tris_[c].v) {
                bool on_rim = false;
                for (const Rim& r : rim) on_rim = on_rim || r.a == v || r.b == v;
                if (!on_rim) fail(ErrorKind::Mesh, "cavity swallowed a vertex");
            }

        const int pi = int(pts_.size());
        pts_.push_back(p);
        vtri_.push_back(-1);
        for (int c : cavity_) {
            tris_[c].alive = false;
            free_.push_back(c);
        }

        std::vector<int> fresh(rim.size());
        for (std::size_t k = 0; k < rim.size(); ++k) {
            int id;
            if (!free_.empty()) {
                id = free_.back();
                free_.pop_back();
            } else {
                id = int(tris_.size());
                tris_.emplace_back();
                mark_.push_back(0);
            }
            fresh[k] = id;
            Tri& T = tris_[id];
            T.v = {rim[k].a, rim[k].b, pi};
            T.nb = {-1, -1, rim[k].outer};
            T.alive = true;
            if (rim[k].outer >= 0) {
                Tri& O = tris_[rim[k].outer];
                for (int j = 0; j < 3; ++j)
                    if (O.v[(j + 1) % 3] == rim[k].b && O.v[(j + 2) % 3] == rim[k].a) O.nb[j] = id;
            }
            vtri_[rim[k].a] = id;
            vtri_[rim[k].b] = id;
            vtri_[pi] = id;
        }
        for (std::size_t k = 0; k < rim.size(); ++k) {
            for (std::size_t j = 0; j < rim.size(); ++j) {
                if (rim[j].a == rim[k].b) tris_[fresh[k]].nb[0] = fresh[j];
                if (rim[j].b == rim[k].a) tris_[fresh[k]].nb[1] = fresh[j];
            }
        }
        hint_ = fresh.front();
        if (created) *created = fresh;
        return pi;
    }

    /// Triangles around vertex v.
    std::vector<int> star(int v) const {
        std::vector<int> out;
        int start = vtri_[v];
        int t = start;
        // counterclockwise sweep
        do {
            out.push_back(t);
            int i = local(t, v);
            t = tris_[t].nb[(i + 2) % 3];
        } while (t >= 0 && t != start);
        if (t == start) return out;
        t = start;
        while (true) {
            int i = local(t, v);
            t = tris_[t].nb[(i + 1) % 3];
            if (t < 0) break;
            out.push_back(t);
        }
        return out;
    }

    /// Finds the triangle holding directed edge a->b; returns -1 if absent.
    int find_directed(int a, int b, int& opposite_local) const {
        for (int t : star(a)) {
            int i = local(t, a);
            if (tris_[t].v[(i + 1) % 3] == b) {
                opposite_local = (i + 2) % 3;
                return t;
            }
        }
        return -1;
    }

    int local(int t, int v) const {
        const Tri& T = tris_[t];
        return T.v[0] == v ? 0 : (T.v[1] == v ? 1 : 2);
    }

private:
    int first_alive() const {
        for (int i = 0; i < int(tris_.size()); ++i)
            if (tris_[i].alive) return i;
        fail(ErrorKind::Mesh, "empty triangulation");
    }

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> vtri_;
    std::vector<int> free_;
    std::vector<unsigned> mark_;
    std::vector<int> cavity_;
    unsigned stamp_ = 0;
    mutable int hint_ = 0;
};

// ---------------------------------------------------------------------------
// Planar straight-line graph with optional circular-arc segments.

struct Arc {
    Vec2 center;
    double radius = 0.0;
};

struct Segment {
    int a = 0;
    int b = 0;
    int tag = 0;
    int arc = -1; ///< index into Pslg::arcs, -1 for a straight segment
    double ta = 0.0;
    double tb = 0.0; ///< arc angles of a and b
};

struct Pslg {
    std::vector<Vec2> points;
    std::vector<Segment> segments;
    std::vector<Arc> arcs;

    int add_point(Vec2 p) {
        points.push_back(p);
        return int(points.size()) - 1;
    }
};

struct RefineOptions {
    double min_angle_deg = 20.0;
    std::function<double(Vec2)> size;   ///< target edge length
    std::function<bool(Vec2)> inside;   ///< domain membership of triangle centroids
    std::size_t max_points = 4'000'000;
};

struct Refined {
    std::vector<Vec2> points; ///< input points first, in input order
    std::vector<Triangle> triangles;
    std::vector<Segment> segments;
};

/// Conforming Delaunay refinement. The output keeps the triangles reachable
/// from `seed` without crossing a segment.
inline Refined refine(const Pslg& g, Vec2 seed, const RefineOptions& opt) {
    require(!g.points.empty(), "empty PSLG", ErrorKind::Mesh);
    Vec2 lo = g.points.front(), hi = lo;
    for (Vec2 p : g.points) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const Vec2 center = 0.5 * (lo + hi);
    const double radius = std::max(0.5 * norm(hi - lo), 1e-300);
    Triangulation tr(center, radius);
    const int base = Triangulation::kSuper;
    for (Vec2 p : g.points) tr.insert(p);

    struct Seg {
        Segment s;
        bool alive = true;
    };
    std::vector<Seg> segs;
    std::unordered_map<std::uint64_t, int> seg_of;
    for (const Segment& s : g.segments) {
        Segment t = s;
        t.a += base;
        t.b += base;
        seg_of[detail::edge_key(t.a, t.b)] = int(segs.size());
        segs.push_back({t, true});
    }

    const double ratio_bound = 1.0 / (2.0 * std::sin(opt.min_angle_deg * 3.14159265358979323846 / 180.0));
    std::deque<int> segq;
    std::deque<std::pair<int, Triangle>> triq;

    auto pt = [&](int v) { return tr.point(v); };

    auto is_bad = [&](int t) {
        const auto& T = tr.tri(t);
        for (int v : T.v)
            if (tr.is_super(v)) return false;
        Vec2 a = pt(T.v[0]), b = pt(T.v[1]), c = pt(T.v[2]);
        Vec2 cen = (1.0 / 3.0) * (a + b + c);
        if (opt.inside && !opt.inside(cen)) return false;
        double la = norm(b - c), lb = norm(c - a), lc = norm(a - b);
        double lmin = std::min({la, lb, lc}), lmax = std::max({la, lb, lc});
        double area2 = std::abs(cross(b - a, c - a));
        double circ = la * lb * lc / (2.0 * area2);
        if (circ / lmin > ratio_bound) return true;
        return opt.size && lmax > opt.size(cen);
    };

    auto after_insert = [&](int v, const std::vector<int>& created) {
        for (int t : created) {
            const auto& T = tr.tri(t);
            int i = tr.local(t, v);
            int a = T.v[(i + 1) % 3], b = T.v[(i + 2) % 3];
            auto it = seg_of.find(detail::edge_key(a, b));
            if (it != seg_of.end()) segq.push_back(it->second);
            triq.emplace_back(t, Triangle{T.v[0], T.v[1], T.v[2]});
        }
        if (tr.points().size() > opt.max_points + base)
            fail(ErrorKind::Mesh, "refinement exceeded the vertex budget");
    };

    auto encroached = [&](int s) {
        const Segment& S = segs[s].s;
        int opp = 0;
        for (auto [a, b] : {std::pair{S.a, S.b}, std::pair{S.b, S.a}}) {
            int t = tr.find_directed(a, b, opp);
            if (t < 0) return true;
            int apex = tr.tri(t).v[opp];
            if (tr.is_super(apex)) continue;
            if (dot(pt(a) - pt(apex), pt(b) - pt(apex)) < 0.0) return true;
        }
        return false;
    };

    auto split = [&](int s) {
        Segment S = segs[s].s;
        segs[s].alive = false;
        seg_of.erase(detail::edge_key(S.a, S.b));
        Vec2 mid;
        double tm = 0.5 * (S.ta + S.tb);
        if (S.arc < 0) {
            mid = 0.5 * (pt(S.a) + pt(S.b));
        } else {
            const Arc& A = g.arcs[S.arc];
            mid = {A.center.x + A.radius * std::cos(tm), A.center.y + A.radius * std::sin(tm)};
        }
        std::vector<int> created;
        int m = tr.insert(mid, &created);
        Segment s1 = S, s2 = S;
        s1.b = m;
        s1.tb = tm;
        s2.a = m;
        s2.ta = tm;
        for (const Segment& n : {s1, s2}) {
            seg_of[detail::edge_key(n.a, n.b)] = int(segs.size());
            segq.push_back(int(segs.size()));
            segs.push_back({n, true});
        }
        after_insert(m, created);
    };

    auto drain = [&] {
        while (!segq.empty()) {
            int s = segq.front();
            segq.pop_front();
            if (segs[s].alive && encroached(s)) split(s);
        }
    };

    for (int s = 0; s < int(segs.size()); ++s) segq.push_back(s);
    drain();
    for (int t = 0; t < int(tr.triangles().size()); ++t)
        if (tr.tri(t).alive) {
            const auto& T = tr.tri(t);
            triq.emplace_back(t, Triangle{T.v[0], T.v[1], T.v[2]});
        }

    std::vector<int> hits;
    while (!triq.empty()) {
        drain();
        auto [t, verts] = triq.front();
        triq.pop_front();
        const auto& T = tr.tri(t);
        if (!T.alive || T.v[0] != verts[0] || T.v[1] != verts[1] || T.v[2] != verts[2]) continue;
        if (!is_bad(t)) continue;
        Vec2 c = detail::circumcenter(pt(T.v[0]), pt(T.v[1]), pt(T.v[2]));
        hits.clear();
        for (int s = 0; s < int(segs.size()); ++s) {
            if (!segs[s].alive) continue;
            const Segment& S = segs[s].s;
            if (dot(pt(S.a) - c, pt(S.b) - c) < 0.0) hits.push_back(s);
        }
        if (!hits.empty()) {
            for (int s : hits)
                if (segs[s].alive) split(s);
            triq.emplace_back(t, verts);
            continue;
        }
        std::vector<int> created;
        int v = tr.insert(c, &created);
        after_insert(v, created);
    }
    drain();

    // flood fill from the seed, stopping at segments
    int start = tr.locate(seed);
    std::vector<std::uint8_t> keep(tr.triangles().size(), 0);
    std::vector<int> stack{start};
    keep[start] = 1;
    while (!stack.empty()) {
        int t = stack.back();
        stack.pop_back();
        const auto& T = tr.tri(t);
        for (int i = 0; i < 3; ++i) {
            int n = T.nb[i];
            if (n < 0 || keep[n]) continue;
            int a = T.v[(i + 1) % 3], b = T.v[(i + 2) % 3];
            if (seg_of.count(detail::edge_key(a, b))) continue;
            for (int v : tr.tri(n).v)
                if (tr.is_super(v)) fail(ErrorKind::Mesh, "domain boundary is not closed");
            keep[n] = 1;
            stack.push_back(n);
        }
    }

    Refined out;
    out.points.assign(tr.points().begin() + base, tr.points().end());
    for (int t = 0; t < int(tr.triangles().size()); ++t)
        if (keep[t]) {
            const auto& T = tr.tri(t);
            out.triangles.push_back({T.v[0] - base, T.v[1] - base, T.v[2] - base});
        }
    for (const Seg& s : segs)
        if (s.alive) {
            Segment S = s.s;
            S.a -= base;
            S.b -= base;
            out.segments.push_back(S);
        }
    return out;
}

} // namespace nclab::delaunay
