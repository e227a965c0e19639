#pragma once

#include "nclab/error.hpp"
#include "nclab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace nclab {

/// Excision marks the artificial boundary of a truncated-cusp mesh, which
/// joins both inclusions into one conductor.
enum class BoundaryTag : std::uint8_t { Outer = 0, Inclusion1 = 1, Inclusion2 = 2, Excision = 3 };
enum class VertexTag : std::uint8_t { Interior, Outer, Inclusion1, Inclusion2, Excision };

inline const char* to_string(BoundaryTag t) {
    switch (t) {
    case BoundaryTag::Outer: return "Outer";
    case BoundaryTag::Inclusion1: return "Inclusion1";
    case BoundaryTag::Inclusion2: return "Inclusion2";
    case BoundaryTag::Excision: return "Excision";
    }
    return "?";
}

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    BoundaryTag tag = BoundaryTag::Outer;
};

using Triangle = std::array<int, 3>;

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles; ///< counterclockwise
    std::vector<BoundaryEdge> boundary;
    std::vector<VertexTag> vertex_tags;
    std::vector<std::uint8_t> neck; ///< per triangle: lies in Omega_{R0}

    // Structured neck strip: stations[i] is the x' of fiber i, fibers[i] lists
    // the vertex indices on that fiber from bottom to top.
    std::vector<double> stations;
    std::vector<std::vector<int>> fibers;
    int layers = 0;

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_triangles() const { return triangles.size(); }

    double signed_area(const Triangle& t) const {
        return 0.5 * cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
    }

    Vec2 centroid(const Triangle& t) const {
        return (1.0 / 3.0) * (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]);
    }

    /// Undirected edges with their incident triangle counts.
    std::map<std::pair<int, int>, int> edge_counts() const {
        std::map<std::pair<int, int>, int> edges;
        for (const Triangle& t : triangles)
            for (int i = 0; i < 3; ++i) {
                int a = t[i], b = t[(i + 1) % 3];
                ++edges[{std::min(a, b), std::max(a, b)}];
            }
        return edges;
    }
};

inline VertexTag vertex_tag_for(BoundaryTag t) {
    switch (t) {
    case BoundaryTag::Outer: return VertexTag::Outer;
    case BoundaryTag::Inclusion1: return VertexTag::Inclusion1;
    case BoundaryTag::Inclusion2: return VertexTag::Inclusion2;
    case BoundaryTag::Excision: return VertexTag::Excision;
    }
    return VertexTag::Interior;
}

// ---------------------------------------------------------------------------
// Audit

struct MeshAudit {
    bool watertight = false;
    bool oriented = false;
    bool tags_consistent = false;
    bool boundary_matches = false; ///< boundary edge list equals the topological boundary
    int euler = 0;                 ///< V - E + F
    int boundary_loops = 0;
    double far_min_angle_deg = 0.0;
    double far_max_aspect = 0.0;
    double neck_max_aspect = 0.0;
    std::size_t neck_triangles = 0;
    std::size_t far_triangles = 0;
    std::vector<std::string> problems;

    bool ok(int expected_loops = 3) const {
        return watertight && oriented && tags_consistent && boundary_matches &&
               boundary_loops == expected_loops && euler == 2 - expected_loops;
    }
};

namespace detail {
inline void triangle_angles(const Mesh& m, const Triangle& t, double& min_angle, double& aspect) {
    std::array<Vec2, 3> p{m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]};
    min_angle = 180.0;
    double lmax = 0.0;
    for (int i = 0; i < 3; ++i) {
        Vec2 u = p[(i + 1) % 3] - p[i];
        Vec2 v = p[(i + 2) % 3] - p[i];
        double ang = std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / 3.14159265358979323846;
        min_angle = std::min(min_angle, ang);
        lmax = std::max(lmax, norm(u));
    }
    double area = std::abs(m.signed_area(t));
    // longest edge over the height onto it
    aspect = area > 0.0 ? lmax * lmax / (2.0 * area) : INFINITY;
}
} // namespace detail

inline MeshAudit audit(const Mesh& m) {
    MeshAudit r;
    auto edges = m.edge_counts();

    r.watertight = true;
    std::set<std::pair<int, int>> topo_boundary;
    for (const auto& [e, c] : edges) {
        if (c > 2) {
            r.watertight = false;
            r.problems.push_back("edge shared by more than two triangles");
        }
        if (c == 1) topo_boundary.insert(e);
    }

    std::set<std::pair<int, int>> listed;
    for (const BoundaryEdge& b : m.boundary) listed.insert({std::min(b.a, b.b), std::max(b.a, b.b)});
    r.boundary_matches = listed == topo_boundary && listed.size() == m.boundary.size();
    if (!r.boundary_matches) r.problems.push_back("tagged boundary differs from topological boundary");
    r.watertight = r.watertight && r.boundary_matches;

    r.oriented = true;
    for (const Triangle& t : m.triangles)
        if (!(m.signed_area(t) > 0.0)) {
            r.oriented = false;
            r.problems.push_back("non-positive triangle area");
            break;
        }

    r.tags_consistent = m.vertex_tags.size() == m.vertices.size();
    if (!r.tags_consistent) {
        r.problems.push_back("vertex tag count mismatch");
        return r;
    }
    for (const BoundaryEdge& b : m.boundary) {
        for (int v : {b.a, b.b}) {
            VertexTag want = vertex_tag_for(b.tag);
            VertexTag have = m.vertex_tags[v];
            bool excision_corner = (b.tag == BoundaryTag::Excision || have == VertexTag::Excision) &&
                                   (have == VertexTag::Inclusion1 || have == VertexTag::Inclusion2 ||
                                    have == VertexTag::Excision);
            if (have != want && !excision_corner) {
                r.tags_consistent = false;
            }
        }
    }
    std::vector<std::uint8_t> on_boundary(m.vertices.size(), 0);
    for (const auto& e : topo_boundary) on_boundary[e.first] = on_boundary[e.second] = 1;
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
        if ((on_boundary[v] != 0) != (m.vertex_tags[v] != VertexTag::Interior)) r.tags_consistent = false;
    if (!r.tags_consistent) r.problems.push_back("vertex tags disagree with boundary edges");

    // boundary loops: connected components of the boundary edge graph
    std::map<int, std::vector<int>> adj;
    for (const auto& e : topo_boundary) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    std::set<int> visited;
    for (const auto& [v, _] : adj) {
        if (visited.count(v)) continue;
        ++r.boundary_loops;
        std::vector<int> stack{v};
        visited.insert(v);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int w : adj[u])
                if (visited.insert(w).second) stack.push_back(w);
        }
    }
    std::set<int> used;
    for (const Triangle& t : m.triangles) used.insert(t.begin(), t.end());
    r.euler = int(used.size()) - int(edges.size()) + int(m.triangles.size());

    r.far_min_angle_deg = 180.0;
    for (std::size_t i = 0; i < m.triangles.size(); ++i) {
        double ang, asp;
        detail::triangle_angles(m, m.triangles[i], ang, asp);
        if (m.neck[i]) {
            ++r.neck_triangles;
            r.neck_max_aspect = std::max(r.neck_max_aspect, asp);
        } else {
            ++r.far_triangles;
            r.far_min_angle_deg = std::min(r.far_min_angle_deg, ang);
            r.far_max_aspect = std::max(r.far_max_aspect, asp);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Plain-text mesh format:
//   V E T                (vertex, boundary-edge, triangle counts)
//   x y                  (V lines)
//   i j k                (T lines, zero-based, counterclockwise)
//   i j tag              (E lines; tag 0 Outer, 1 Inclusion1, 2 Inclusion2, 3 Excision)

inline void write_mesh(std::ostream& os, const Mesh& m) {
    os.precision(17);
    os << m.vertices.size() << ' ' << m.boundary.size() << ' ' << m.triangles.size() << '\n';
    for (Vec2 p : m.vertices) os << p.x << ' ' << p.y << '\n';
    for (const Triangle& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const BoundaryEdge& b : m.boundary) os << b.a << ' ' << b.b << ' ' << int(b.tag) << '\n';
}

/// Reads the format written by write_mesh; the neck flags and strip metadata
/// are not part of the format and come back empty / false.
inline Mesh read_mesh(std::istream& is) {
    Mesh m;
    std::size_t nv = 0, ne = 0, nt = 0;
    if (!(is >> nv >> ne >> nt)) fail(ErrorKind::Mesh, "bad mesh header");
    m.vertices.resize(nv);
    for (Vec2& p : m.vertices)
        if (!(is >> p.x >> p.y)) fail(ErrorKind::Mesh, "truncated vertex block");
    m.triangles.resize(nt);
    for (Triangle& t : m.triangles)
        if (!(is >> t[0] >> t[1] >> t[2])) fail(ErrorKind::Mesh, "truncated triangle block");
    auto valid = [nv](int i) { return i >= 0 && std::size_t(i) < nv; };
    for (const Triangle& t : m.triangles)
        if (!valid(t[0]) || !valid(t[1]) || !valid(t[2])) fail(ErrorKind::Mesh, "triangle index out of range");
    m.boundary.resize(ne);
    m.vertex_tags.assign(nv, VertexTag::Interior);
    for (BoundaryEdge& b : m.boundary) {
        int tag = 0;
        if (!(is >> b.a >> b.b >> tag) || tag < 0 || tag > 3 || !valid(b.a) || !valid(b.b))
            fail(ErrorKind::Mesh, "bad boundary edge");
        b.tag = static_cast<BoundaryTag>(tag);
    }
    for (const BoundaryEdge& b : m.boundary)
        for (int v : {b.a, b.b})
            if (m.vertex_tags[v] == VertexTag::Interior || b.tag != BoundaryTag::Excision)
                m.vertex_tags[v] = vertex_tag_for(b.tag);
    m.neck.assign(nt, 0);
    return m;
}

} // namespace nclab
