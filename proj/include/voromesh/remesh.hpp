#pragma once

// Dual triangulation of a restricted Voronoi decomposition: one vertex per
// non-empty site, one triangle per corner where three cells meet. Corners are
// found combinatorially from polygon edge tags (two consecutive bisector edges
// of a cell meet at a corner shared with those two neighbors) and clustered
// geometrically so degenerate corners where four or more cells coincide can be
// fan-triangulated deterministically.

#include "rvd.hpp"

#include <map>
#include <set>
#include <unordered_map>
#include <vector>

namespace voromesh {

struct DualMesh {
    TriangleMesh mesh;
    std::vector<int> site_of_vertex;  // dual vertex -> site index
};

struct QualityReport {
    double triangle_q_min = 0.0;
    double triangle_q_mean = 0.0;
    int open_b = 0;
    int nmv = 0;
};

// Shape quality (6/sqrt(3)) * area / (half_perimeter * longest_edge):
// 1 for equilateral triangles, 0 for degenerate ones.
inline double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
    double la = (b - a).norm(), lb = (c - b).norm(), lc = (a - c).norm();
    double h = std::max({la, lb, lc});
    double p = 0.5 * (la + lb + lc);
    if (h <= 0.0 || p <= 0.0) return 0.0;
    double s = 0.5 * (b - a).cross(c - a).norm();
    return (6.0 / std::sqrt(3.0)) * s / (p * h);
}

namespace detail {

struct CornerEmission {
    Vec3 position;
    Vec3 normal;
    int owner, left, right;  // owner's ring neighbors around the corner
};

} // namespace detail

inline DualMesh extract_dual(const Decomposition& d, const SiteSet& sites) {
    const int n = static_cast<int>(sites.size());

    std::vector<detail::CornerEmission> emissions;
    std::vector<double> tolerance;  // per emission, from the local site spacing
    for (const RestrictedCell& cell : d.cells)
        for (const CellPolygon& poly : cell.polygons) {
            const size_t m = poly.verts.size();
            for (size_t k = 0; k < m; ++k) {
                int ta = poly.edge_tags[k], tb = poly.edge_tags[(k + 1) % m];
                if (ta < 0 || tb < 0 || ta == tb) continue;
                if (ta == cell.owner || tb == cell.owner) continue;
                emissions.push_back(
                    {poly.verts[(k + 1) % m], poly.normal, cell.owner, ta, tb});
                double spacing =
                    std::min({(sites.positions[ta] - sites.positions[cell.owner]).norm(),
                              (sites.positions[tb] - sites.positions[cell.owner]).norm(),
                              (sites.positions[tb] - sites.positions[ta]).norm()});
                tolerance.push_back(0.05 * spacing);
            }
        }

    // Cluster emissions that describe the same corner. Feature-aligned site
    // configurations sit close to the degenerate case where four or more
    // cells meet in one point; the corners they split into are separated by
    // a sliver scale well below the site spacing, so the merge radius is a
    // fraction of the local spacing rather than a fixed epsilon.
    double grid_cell = 1e-300;
    for (double t : tolerance) grid_cell = std::max(grid_cell, t);
    std::unordered_map<uint64_t, std::vector<int>> grid;
    auto cell_of = [&](const Vec3& p, int dx, int dy, int dz) {
        auto h = [&](double v, int dd) {
            return static_cast<uint64_t>(static_cast<int64_t>(std::floor(v / grid_cell)) + dd +
                                         (1ll << 30));
        };
        return (h(p.x, dx) << 42) ^ (h(p.y, dy) << 21) ^ h(p.z, dz);
    };
    detail::UnionFind uf(emissions.size());
    for (size_t e = 0; e < emissions.size(); ++e) {
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find(cell_of(emissions[e].position, dx, dy, dz));
                    if (it == grid.end()) continue;
                    for (int o : it->second)
                        if ((emissions[e].position - emissions[o].position).norm() <=
                            std::min(tolerance[e], tolerance[o]))
                            uf.unite(static_cast<int>(e), o);
                }
        grid[cell_of(emissions[e].position, 0, 0, 0)].push_back(static_cast<int>(e));
    }
    std::map<int, std::vector<int>> clusters;
    for (size_t e = 0; e < emissions.size(); ++e)
        clusters[uf.find(static_cast<int>(e))].push_back(static_cast<int>(e));

    std::set<std::array<int, 3>> seen;
    std::vector<std::array<int, 3>> triangles;  // oriented
    auto add_triangle = [&](int i, int j, int k, const Vec3& n_ref) {
        std::array<int, 3> key{i, j, k};
        std::sort(key.begin(), key.end());
        if (key[0] == key[1] || key[1] == key[2]) return;
        if (!seen.insert(key).second) return;  // duplicate corners merge
        Vec3 nf = (sites.positions[j] - sites.positions[i])
                      .cross(sites.positions[k] - sites.positions[i]);
        if (nf.dot(n_ref) >= 0.0) triangles.push_back({i, j, k});
        else triangles.push_back({i, k, j});
    };

    for (auto& [root, members] : clusters) {
        std::set<int> cells_here;
        Vec3 n_ref{};
        for (int e : members) {
            cells_here.insert(emissions[e].owner);
            cells_here.insert(emissions[e].left);
            cells_here.insert(emissions[e].right);
            n_ref += emissions[e].normal;
        }
        if (cells_here.size() < 3) continue;
        if (cells_here.size() == 3) {
            auto it = cells_here.begin();
            int i = *it++, j = *it++, k = *it;
            add_triangle(i, j, k, n_ref);
            continue;
        }
        // Degenerate corner where four or more cells meet: order the sites
        // by angle around the corner in the plane normal to the averaged
        // surface normal, then fan from the lowest-index site.
        Vec3 center{};
        for (int e : members) center += emissions[e].position;
        center = center / static_cast<double>(members.size());
        Vec3 nz = n_ref.normalized();
        Vec3 nx = std::fabs(nz.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        nx = (nx - nz * nx.dot(nz)).normalized();
        Vec3 ny = nz.cross(nx);
        std::vector<std::pair<double, int>> by_angle;
        for (int c : cells_here) {
            Vec3 r = sites.positions[c] - center;
            by_angle.push_back({std::atan2(r.dot(ny), r.dot(nx)), c});
        }
        std::sort(by_angle.begin(), by_angle.end());
        std::vector<int> order;
        size_t lowest = 0;
        for (size_t t = 1; t < by_angle.size(); ++t)
            if (by_angle[t].second < by_angle[lowest].second) lowest = t;
        for (size_t t = 0; t < by_angle.size(); ++t)
            order.push_back(by_angle[(lowest + t) % by_angle.size()].second);
        for (size_t t = 1; t + 1 < order.size(); ++t)
            add_triangle(order[0], order[t], order[t + 1], n_ref);
    }

    // Vertices: non-empty sites, in site order.
    DualMesh dual;
    std::vector<int> vertex_of_site(n, -1);
    for (int i = 0; i < n; ++i) {
        if (d.cells[i].empty()) continue;
        vertex_of_site[i] = static_cast<int>(dual.mesh.vertices.size());
        dual.mesh.vertices.push_back(sites.positions[i]);
        dual.site_of_vertex.push_back(i);
    }
    for (const auto& t : triangles) {
        int a = vertex_of_site[t[0]], b = vertex_of_site[t[1]], c = vertex_of_site[t[2]];
        if (a < 0 || b < 0 || c < 0) continue;
        dual.mesh.faces.push_back({a, b, c});
    }
    dual.mesh.finalize();
    return dual;
}

inline QualityReport quality_report(const TriangleMesh& mesh) {
    QualityReport r;
    if (!mesh.faces.empty()) {
        double sum = 0.0, mn = std::numeric_limits<double>::max();
        for (const Face& f : mesh.faces) {
            double q = triangle_quality(mesh.vertices[f[0]], mesh.vertices[f[1]],
                                        mesh.vertices[f[2]]);
            sum += q;
            mn = std::min(mn, q);
        }
        r.triangle_q_mean = sum / static_cast<double>(mesh.faces.size());
        r.triangle_q_min = mn;
    }
    auto [open_b, nmv] = manifold_report(mesh);
    r.open_b = open_b;
    r.nmv = nmv;
    return r;
}

} // namespace voromesh
