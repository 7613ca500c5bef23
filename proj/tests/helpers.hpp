#pragma once

// Procedural meshes and small utilities shared by the test suites.

#include <voromesh/voromesh.hpp>

#include <map>
#include <random>
#include <tuple>
#include <vector>

namespace testutil {

using voromesh::Face;
using voromesh::TriangleMesh;
using voromesh::Vec3;

class MeshBuilder {
public:
    int vertex(const Vec3& p) {
        auto key = std::make_tuple(p.x, p.y, p.z);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(mesh_.vertices.size());
        mesh_.vertices.push_back(p);
        index_[key] = id;
        return id;
    }

    void triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
        mesh_.faces.push_back({vertex(a), vertex(b), vertex(c)});
    }

    // Subdivided quad patch; (u, v) grid mapped by corners, CCW as given.
    void quad(const Vec3& p00, const Vec3& p10, const Vec3& p11, const Vec3& p01, int nu, int nv) {
        auto at = [&](int i, int j) {
            double u = static_cast<double>(i) / nu, v = static_cast<double>(j) / nv;
            return p00 * ((1 - u) * (1 - v)) + p10 * (u * (1 - v)) + p11 * (u * v) +
                   p01 * ((1 - u) * v);
        };
        for (int i = 0; i < nu; ++i)
            for (int j = 0; j < nv; ++j) {
                triangle(at(i, j), at(i + 1, j), at(i + 1, j + 1));
                triangle(at(i, j), at(i + 1, j + 1), at(i, j + 1));
            }
    }

    TriangleMesh take() {
        mesh_.finalize();
        return std::move(mesh_);
    }

private:
    TriangleMesh mesh_;
    std::map<std::tuple<double, double, double>, int> index_;
};

// Axis-aligned box with outward-facing faces; per-axis subdivision counts
// (matched across shared edges so the surface welds without T-junctions).
inline TriangleMesh make_box(double sx, double sy, double sz, int nx, int ny, int nz) {
    MeshBuilder b;
    Vec3 o{0, 0, 0};
    Vec3 X{sx, 0, 0}, Y{0, sy, 0}, Z{0, 0, sz};
    b.quad(o + Z, o + X + Z, o + X + Y + Z, o + Y + Z, nx, ny);          // top (+z)
    b.quad(o, o + Y, o + X + Y, o + X, ny, nx);                          // bottom (-z)
    b.quad(o, o + X, o + X + Z, o + Z, nx, nz);                          // front (-y)
    b.quad(o + Y, o + Y + Z, o + X + Y + Z, o + X + Y, nz, nx);          // back (+y)
    b.quad(o, o + Z, o + Y + Z, o + Y, nz, ny);                          // left (-x)
    b.quad(o + X, o + X + Y, o + X + Y + Z, o + X + Z, ny, nz);          // right (+x)
    return b.take();
}

inline TriangleMesh make_cube(int n = 4) { return make_box(1, 1, 1, n, n, n); }

// Flat unit square in the z=0 plane.
inline TriangleMesh make_square(int n = 8) {
    MeshBuilder b;
    b.quad({0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, n, n);
    return b.take();
}

inline TriangleMesh make_single_triangle() {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    m.finalize();
    return m;
}

// Icosphere of the given radius; subdiv levels of 4-way refinement.
inline TriangleMesh make_sphere(int subdiv = 3, double radius = 1.0) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (Vec3& v : verts) v = v.normalized();
    for (int level = 0; level < subdiv; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = voromesh::edge_key(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 m = ((verts[a] + verts[b]) * 0.5).normalized();
            verts.push_back(m);
            int id = static_cast<int>(verts.size()) - 1;
            midpoint[key] = id;
            return id;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const Face& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    TriangleMesh m;
    for (const Vec3& v : verts) m.vertices.push_back(v * radius);
    m.faces = faces;
    m.finalize();
    return m;
}

// Smoothly perturbed sphere, an organic-like closed surface.
inline TriangleMesh make_bumpy_sphere(int subdiv = 3, double amplitude = 0.12) {
    TriangleMesh m = make_sphere(subdiv, 1.0);
    for (Vec3& v : m.vertices) {
        double r = 1.0 + amplitude * std::sin(2.0 * v.x) * std::cos(3.0 * v.y) +
                   0.5 * amplitude * std::sin(5.0 * v.z);
        v = v.normalized() * r;
    }
    m.finalize();
    return m;
}

// Cube with one top edge replaced by a 45-degree bevel of the given width.
inline TriangleMesh make_chamfered_cube(double width, int n = 6) {
    // Cross-section in (y, z): square with the (y=1, z=1) corner cut.
    double w = width / std::sqrt(2.0);
    std::vector<Vec3> profile = {{0, 0, 0},     {0, 1, 0},         {0, 1, 1 - w},
                                 {0, 1 - w, 1}, {0, 0, 1}};
    MeshBuilder b;
    Vec3 X{1, 0, 0};
    // Side strips along x.
    for (size_t k = 0; k < profile.size(); ++k) {
        const Vec3& a = profile[k];
        const Vec3& c = profile[(k + 1) % profile.size()];
        b.quad(a, c, c + X, a + X, n, n);
    }
    // Caps (fans; the profile is convex).
    for (size_t k = 1; k + 1 < profile.size(); ++k) {
        b.triangle(profile[0], profile[k + 1], profile[k]);
        b.triangle(profile[0] + X, profile[k] + X, profile[k + 1] + X);
    }
    return b.take();
}

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline Vec3 random_point(std::mt19937_64& r, double lo = -1.0, double hi = 1.0) {
    auto u = [&] { return lo + (hi - lo) * voromesh::uniform01(r); };
    double x = u(), y = u(), z = u();
    return {x, y, z};
}

// Nearest index by linear scan with (distance, index) ordering.
inline std::pair<int, double> brute_nearest(const std::vector<Vec3>& pts, const Vec3& q) {
    int best = 0;
    double bd = (pts[0] - q).squaredNorm();
    for (size_t i = 1; i < pts.size(); ++i) {
        double d = (pts[i] - q).squaredNorm();
        if (d < bd) {
            bd = d;
            best = static_cast<int>(i);
        }
    }
    return {best, std::sqrt(bd)};
}

} // namespace testutil
