#pragma once

// Six-point triangle quadrature (Albrecht-Collatz): three edge midpoints and
// three interior nodes, exact for polynomials up to degree 3. Cell integrals
// fan-triangulate each convex polygon and apply the rule per triangle.

#include "vec3.hpp"

#include <array>
#include <functional>
#include <vector>

namespace voromesh {

struct QuadratureRule {
    // Barycentric nodes and weights; weights sum to 1 (area-normalized).
    std::array<std::array<double, 3>, 6> nodes;
    std::array<double, 6> weights;
    int degree = 0;
};

inline const QuadratureRule& albrecht_collatz_rule() {
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.nodes = {{{0.5, 0.5, 0.0},
                    {0.0, 0.5, 0.5},
                    {0.5, 0.0, 0.5},
                    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}}};
        r.weights = {1.0 / 30.0, 1.0 / 30.0, 1.0 / 30.0, 3.0 / 10.0, 3.0 / 10.0, 3.0 / 10.0};
        r.degree = 3;
        return r;
    }();
    return rule;
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

// Integral of f over the 3D triangle (a,b,c).
template <class F>
double integrate_triangle(const Vec3& a, const Vec3& b, const Vec3& c, F&& f) {
    const QuadratureRule& rule = albrecht_collatz_rule();
    double area = triangle_area(a, b, c);
    if (area <= 0.0) return 0.0;
    double sum = 0.0;
    for (int q = 0; q < 6; ++q) {
        const auto& l = rule.nodes[q];
        Vec3 x = a * l[0] + b * l[1] + c * l[2];
        sum += rule.weights[q] * f(x);
    }
    return sum * area;
}

// Integral of f over a planar convex polygon, fan-triangulated from vertex 0
// into k-2 triangles. Degenerate polygons integrate to 0.
template <class F>
double integrate_polygon(const std::vector<Vec3>& poly, F&& f) {
    if (poly.size() < 3) return 0.0;
    double sum = 0.0;
    for (size_t k = 1; k + 1 < poly.size(); ++k)
        sum += integrate_triangle(poly[0], poly[k], poly[k + 1], f);
    return sum;
}

// Vector-valued variant used by the energy gradients.
template <class F>
Vec3 integrate_polygon_vec(const std::vector<Vec3>& poly, F&& f) {
    if (poly.size() < 3) return {};
    const QuadratureRule& rule = albrecht_collatz_rule();
    Vec3 sum{};
    for (size_t k = 1; k + 1 < poly.size(); ++k) {
        const Vec3 &a = poly[0], &b = poly[k], &c = poly[k + 1];
        double area = triangle_area(a, b, c);
        if (area <= 0.0) continue;
        Vec3 tri{};
        for (int q = 0; q < 6; ++q) {
            const auto& l = rule.nodes[q];
            Vec3 x = a * l[0] + b * l[1] + c * l[2];
            tri += f(x) * rule.weights[q];
        }
        sum += tri * area;
    }
    return sum;
}

// 2-point Gauss quadrature along a 3D segment.
template <class F>
double integrate_segment(const Vec3& a, const Vec3& b, F&& f) {
    double len = (b - a).norm();
    if (len <= 0.0) return 0.0;
    const double t = 0.5 / std::sqrt(3.0);
    Vec3 mid = (a + b) * 0.5, half = (b - a) * 0.5;
    return 0.5 * len * (f(mid - half * (2.0 * t)) + f(mid + half * (2.0 * t)));
}

} // namespace voromesh
