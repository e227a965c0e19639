#include "nclab/delaunay.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

using namespace nclab;
using namespace nclab::delaunay;

namespace {

// Unit square with a circular hole of radius 0.2 at its centre.
Pslg square_with_hole(int hole_points) {
    Pslg g;
    int c0 = g.add_point({0, 0}), c1 = g.add_point({1, 0}), c2 = g.add_point({1, 1}), c3 = g.add_point({0, 1});
    g.segments = {{c0, c1, 0}, {c1, c2, 0}, {c2, c3, 0}, {c3, c0, 0}};
    g.arcs.push_back({{0.5, 0.5}, 0.2});
    int first = int(g.points.size());
    for (int k = 0; k < hole_points; ++k) {
        double t = 2 * std::numbers::pi * k / hole_points;
        g.add_point({0.5 + 0.2 * std::cos(t), 0.5 + 0.2 * std::sin(t)});
    }
    for (int k = 0; k < hole_points; ++k) {
        Segment s{first + k, first + (k + 1) % hole_points, 1, 0};
        s.ta = 2 * std::numbers::pi * k / hole_points;
        s.tb = 2 * std::numbers::pi * (k + 1) / hole_points;
        g.segments.push_back(s);
    }
    return g;
}

double area(const Refined& r, const Triangle& t) {
    return 0.5 * cross(r.points[t[1]] - r.points[t[0]], r.points[t[2]] - r.points[t[0]]);
}

} // namespace

TEST(Triangulation, InsertsAndStaysDelaunay) {
    Triangulation tr({0.5, 0.5}, 1.0);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) tr.insert({0.1 * i + 0.001 * ((7 * i + 3 * j) % 5), 0.1 * j + 0.0007 * i});
    const auto& pts = tr.points();
    for (const auto& t : tr.triangles()) {
        if (!t.alive) continue;
        EXPECT_GT(delaunay::detail::orient(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]), 0);
        for (int i = 0; i < 3; ++i) {
            int n = t.nb[i];
            if (n < 0) continue;
            const auto& N = tr.tri(n);
            int opp = N.v[0] + N.v[1] + N.v[2] - t.v[(i + 1) % 3] - t.v[(i + 2) % 3];
            double in = double(delaunay::detail::incircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], pts[opp]));
            EXPECT_LE(in, 1e-12);
        }
    }
}

TEST(Triangulation, RejectsDuplicates) {
    Triangulation tr({0, 0}, 1.0);
    tr.insert({0.1, 0.2});
    EXPECT_THROW(tr.insert({0.1, 0.2}), Error);
}

TEST(Refine, SquareWithHoleMeetsQualityAndCoversDomain) {
    RefineOptions opt;
    opt.size = [](Vec2) { return 0.05; };
    opt.inside = [](Vec2 p) { return norm(p - Vec2{0.5, 0.5}) > 0.2; };
    Refined r = refine(square_with_hole(16), {0.05, 0.05}, opt);

    double total = 0.0, min_angle = 180.0, max_edge = 0.0;
    for (const auto& t : r.triangles) {
        double a = area(r, t);
        ASSERT_GT(a, 0.0);
        total += a;
        for (int i = 0; i < 3; ++i) {
            Vec2 u = r.points[t[(i + 1) % 3]] - r.points[t[i]];
            Vec2 v = r.points[t[(i + 2) % 3]] - r.points[t[i]];
            min_angle = std::min(min_angle, std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180 / std::numbers::pi);
            max_edge = std::max(max_edge, norm(u));
        }
    }
    EXPECT_GE(min_angle, 20.0 - 1e-9);
    EXPECT_LE(max_edge, 0.05 + 1e-12);
    // polygonal hole area lies between the inscribed 16-gon and the disc
    double disc = std::numbers::pi * 0.04;
    EXPECT_GT(total, 1.0 - disc - 1e-12);
    EXPECT_LT(total, 1.0 - disc + 0.04 * disc);

    // every segment is an edge of exactly one kept triangle
    std::map<std::pair<int, int>, int> uses;
    for (const auto& t : r.triangles)
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            ++uses[{std::min(a, b), std::max(a, b)}];
        }
    for (const auto& s : r.segments) EXPECT_EQ((uses[{std::min(s.a, s.b), std::max(s.a, s.b)}]), 1);

    // refined hole vertices stay on the circle
    for (const auto& s : r.segments) {
        if (s.tag != 1) continue;
        EXPECT_NEAR(norm(r.points[s.a] - Vec2{0.5, 0.5}), 0.2, 1e-14);
    }
}

TEST(Refine, OpenBoundaryIsReported) {
    Pslg g = square_with_hole(8);
    g.segments.erase(g.segments.begin());
    RefineOptions opt;
    EXPECT_THROW(refine(g, {0.05, 0.05}, opt), Error);
}
