#pragma once

// Restricted Voronoi decomposition of a triangle mesh.
//
// Each base face is clipped against the bisector half-spaces of nearby sites,
// with candidates gathered by a security-radius query from the face's owning
// sites and propagation across cut edges. Every polygon edge carries a tag:
// the opposing site of the bisector that created it, or the local index of the
// original face edge it lies on. Tags drive cell adjacency, dual extraction,
// and the two-stage thin-plate repair with inward-biased sites.

#include "spatial.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace voromesh {

// Edge tags: values >= 0 name the opposing site of a bisector cut. Negative
// values -1..-3 encode original face edges as -(1 + local_edge). kSeamTag
// marks thin-plate repair seams between pieces of the same real site.
constexpr int kSeamTag = -4;

inline bool is_mesh_edge_tag(int tag) { return tag >= -3 && tag <= -1; }
inline int local_edge_from_tag(int tag) { return -tag - 1; }

// Feature a projected site landed on; constrains the directions a gradient
// step can move it. Sites projected into face interiors (or onto edges
// between near-coplanar faces) move in the tangent plane; sites whose
// closest point lies on a crease or boundary edge slide along it; sites on a
// corner vertex stay put. This is what lets sites settle exactly onto sharp
// features instead of hovering next to them.
enum class SiteLock { Face, Edge, Vertex };

// Movable sites constrained to the base surface.
struct SiteSet {
    std::vector<Vec3> positions;         // projected onto the surface
    std::vector<int> faces;              // containing face per site
    std::vector<Vec3> normals;           // outward normal of the containing face
    std::vector<Vec3> biased_positions;  // positions[i] - bias * normals[i]
    std::vector<SiteLock> locks;
    std::vector<Vec3> lock_dirs;         // edge direction for Edge locks

    size_t size() const { return positions.size(); }

    SiteLock lock(size_t i) const { return i < locks.size() ? locks[i] : SiteLock::Face; }
    Vec3 lock_dir(size_t i) const { return i < lock_dirs.size() ? lock_dirs[i] : Vec3{}; }

    void push_site(const Vec3& p, int face, const Vec3& normal,
                   SiteLock lock_kind = SiteLock::Face, const Vec3& dir = {}) {
        positions.push_back(p);
        faces.push_back(face);
        normals.push_back(normal);
        locks.push_back(lock_kind);
        lock_dirs.push_back(dir);
    }

    void bias_inward(double bias) {
        biased_positions.resize(positions.size());
        for (size_t i = 0; i < positions.size(); ++i)
            biased_positions[i] = positions[i] - normals[i] * bias;
    }
};

namespace detail {

inline bool edge_is_crease(const TriangleMesh& mesh, int a, int b, double cos_thresh) {
    auto it = mesh.edge_adjacency.find(edge_key(a, b));
    if (it == mesh.edge_adjacency.end()) return false;
    const auto& fs = it->second;
    if (fs.size() == 1) return true;  // boundary
    if (fs.size() != 2) return true;  // non-manifold seam, treat as feature
    return mesh.face_normals[fs[0]].dot(mesh.face_normals[fs[1]]) < cos_thresh;
}

} // namespace detail

// Projects raw points onto the surface; records face, normal, and the
// feature lock when the closest point lies on a crease edge (dihedral above
// crease_angle_deg), a boundary edge, or a corner vertex.
inline SiteSet make_site_set(const SurfaceIndex& surface, const std::vector<Vec3>& points,
                             double crease_angle_deg = 30.0) {
    const TriangleMesh& mesh = surface.mesh();
    const double cos_thresh = std::cos(crease_angle_deg * 3.14159265358979323846 / 180.0);
    SiteSet s;
    s.positions.reserve(points.size());
    for (const Vec3& p : points) {
        SurfacePoint sp = surface.project(p);
        const Face& t = mesh.faces[sp.face];
        SiteLock lock_kind = SiteLock::Face;
        Vec3 dir{};
        if (sp.region >= kRegionEdgeAB && sp.region <= kRegionEdgeCA) {
            int k = sp.region - kRegionEdgeAB;
            int a = t[k], b = t[(k + 1) % 3];
            if (detail::edge_is_crease(mesh, a, b, cos_thresh)) {
                lock_kind = SiteLock::Edge;
                dir = (mesh.vertices[b] - mesh.vertices[a]).normalized();
            }
        } else if (sp.region <= kRegionVertexC) {
            int v = t[sp.region];
            std::vector<Vec3> dirs;
            for (const auto& [e, fs] : mesh.edge_adjacency) {
                if (e.first != v && e.second != v) continue;
                if (!detail::edge_is_crease(mesh, e.first, e.second, cos_thresh)) continue;
                dirs.push_back((mesh.vertices[e.second] - mesh.vertices[e.first]).normalized());
            }
            if (!dirs.empty()) {
                bool collinear = true;
                for (const Vec3& d : dirs)
                    if (std::fabs(d.dot(dirs[0])) < 0.999) collinear = false;
                if (collinear) {
                    lock_kind = SiteLock::Edge;  // straight feature line through v
                    dir = dirs[0];
                } else {
                    lock_kind = SiteLock::Vertex;
                }
            }
        }
        s.push_site(sp.point, sp.face, mesh.face_normals[sp.face], lock_kind, dir);
    }
    return s;
}

struct CellPolygon {
    int source_face = -1;
    Vec3 normal{};                // base face normal
    double area = 0.0;
    std::vector<Vec3> verts;      // convex ring
    std::vector<int> edge_tags;   // tag of edge verts[k] -> verts[(k+1)%n]
};

struct RestrictedCell {
    int owner = -1;
    std::vector<CellPolygon> polygons;  // ordered by source face

    double area() const {
        double a = 0.0;
        for (const CellPolygon& p : polygons) a += p.area;
        return a;
    }
    bool empty() const { return polygons.empty(); }
};

struct Decomposition {
    std::vector<RestrictedCell> cells;  // one per site, possibly empty
    std::vector<int> empty_sites;
    double total_area = 0.0;

    void refresh_summary() {
        empty_sites.clear();
        total_area = 0.0;
        for (size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].empty()) empty_sites.push_back(static_cast<int>(i));
            total_area += cells[i].area();
        }
    }
};

namespace detail {

inline double polygon_area(const std::vector<Vec3>& v) {
    if (v.size() < 3) return 0.0;
    Vec3 s{};
    for (size_t k = 1; k + 1 < v.size(); ++k) s += (v[k] - v[0]).cross(v[k + 1] - v[0]);
    return 0.5 * s.norm();
}

// Clips (verts, tags) by the half-space closer to site i than site j.
// Edges created by the cut get tag new_tag. Returns false if the plane left
// the polygon untouched. Assumes a convex input ring.
inline bool clip_by_bisector(std::vector<Vec3>& verts, std::vector<int>& tags, const Vec3& site,
                             const Vec3& other, int new_tag, double dedup_eps2) {
    const Vec3 mid = (site + other) * 0.5;
    const Vec3 dir = other - site;
    const size_t n = verts.size();
    static thread_local std::vector<double> s;
    s.resize(n);
    bool any_out = false, all_out = true;
    for (size_t k = 0; k < n; ++k) {
        s[k] = (verts[k] - mid).dot(dir);
        if (s[k] > 0.0) any_out = true;
        else all_out = false;
    }
    if (!any_out) return false;
    if (all_out) {
        verts.clear();
        tags.clear();
        return true;
    }
    std::vector<Vec3> nv;
    std::vector<int> nt;
    nv.reserve(n + 2);
    nt.reserve(n + 2);
    for (size_t k = 0; k < n; ++k) {
        size_t k1 = (k + 1) % n;
        bool in_a = s[k] <= 0.0, in_b = s[k1] <= 0.0;
        if (in_a) {
            nv.push_back(verts[k]);
            nt.push_back(tags[k]);
            if (!in_b) {
                double t = s[k] / (s[k] - s[k1]);
                nv.push_back(verts[k] + (verts[k1] - verts[k]) * t);
                nt.push_back(new_tag);
            }
        } else if (in_b) {
            double t = s[k] / (s[k] - s[k1]);
            nv.push_back(verts[k] + (verts[k1] - verts[k]) * t);
            nt.push_back(tags[k]);
        }
    }
    // Drop zero-length edges introduced by on-plane vertices.
    std::vector<Vec3> fv;
    std::vector<int> ft;
    for (size_t k = 0; k < nv.size(); ++k) {
        size_t k1 = (k + 1) % nv.size();
        if ((nv[k] - nv[k1]).squaredNorm() <= dedup_eps2) continue;
        fv.push_back(nv[k]);
        ft.push_back(nt[k]);
    }
    if (fv.size() < 3) {
        fv.clear();
        ft.clear();
    }
    verts = std::move(fv);
    tags = std::move(ft);
    return true;
}

struct FacePiece {
    int owner;
    std::vector<Vec3> verts;
    std::vector<int> tags;
    double area;
};

// All restricted-cell pieces of one base face.
inline std::vector<FacePiece> face_pieces(const TriangleMesh& mesh, int face,
                                          const std::vector<Vec3>& sites, const PointIndex& index,
                                          bool propagate_all_candidates) {
    const Face& t = mesh.faces[face];
    const Vec3 corners[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    const double diam2 = std::max({(corners[1] - corners[0]).squaredNorm(),
                                   (corners[2] - corners[1]).squaredNorm(),
                                   (corners[0] - corners[2]).squaredNorm()});
    const double dedup_eps2 = 1e-24 * diam2;
    const double area_eps = 1e-14 * mesh.face_areas[face];

    std::vector<FacePiece> out;
    std::vector<int> stack{index.nearest(mesh.face_centroid(face)).first};
    std::set<int> visited;
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        if (!visited.insert(i).second) continue;

        std::vector<Vec3> verts(corners, corners + 3);
        std::vector<int> tags{-1, -2, -3};
        const Vec3& si = sites[i];
        double r2 = 0.0;
        for (const Vec3& c : corners) r2 = std::max(r2, (c - si).squaredNorm());
        std::vector<int> candidates = index.radius_query(si, 2.0 * std::sqrt(r2));
        std::vector<int> cutters;
        if (propagate_all_candidates)
            cutters = candidates;
        for (int j : candidates) {
            if (j == i) continue;
            double dij2 = (sites[j] - si).squaredNorm();
            if (dij2 > 4.0 * r2) break;
            if (dij2 == 0.0) {
                // Coincident sites: lowest index keeps the region.
                if (j < i) {
                    verts.clear();
                    tags.clear();
                    break;
                }
                continue;
            }
            if (clip_by_bisector(verts, tags, si, sites[j], j, dedup_eps2)) {
                cutters.push_back(j);
                if (verts.empty()) break;
                r2 = 0.0;
                for (const Vec3& v : verts) r2 = std::max(r2, (v - si).squaredNorm());
            }
        }
        double area = polygon_area(verts);
        if (area > area_eps) {
            for (int tag : tags)
                if (tag >= 0 && !visited.count(tag)) stack.push_back(tag);
            out.push_back({i, std::move(verts), std::move(tags), area});
        }
        for (int j : cutters)
            if (!visited.count(j)) stack.push_back(j);
    }
    std::sort(out.begin(), out.end(),
              [](const FacePiece& a, const FacePiece& b) { return a.owner < b.owner; });
    return out;
}

// Voronoi pieces of every face for an arbitrary point set, grouped per point.
inline std::vector<std::vector<CellPolygon>> decompose_points(const TriangleMesh& mesh,
                                                              const std::vector<Vec3>& points) {
    if (points.empty()) throw std::invalid_argument("decompose_points: no sites");
    PointIndex index(points);
    const int nf = static_cast<int>(mesh.faces.size());
    std::vector<std::vector<FacePiece>> per_face(nf);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (int f = 0; f < nf; ++f) {
        if (mesh.face_areas[f] <= 0.0) continue;  // degenerate faces are excluded
        auto pieces = face_pieces(mesh, f, points, index, false);
        double covered = 0.0;
        for (const FacePiece& p : pieces) covered += p.area;
        if (covered < mesh.face_areas[f] * (1.0 - 1e-9))
            pieces = face_pieces(mesh, f, points, index, true);
        per_face[f] = std::move(pieces);
    }
    std::vector<std::vector<CellPolygon>> cells(points.size());
    for (int f = 0; f < nf; ++f)
        for (FacePiece& p : per_face[f])
            cells[p.owner].push_back(
                {f, mesh.face_normals[f], p.area, std::move(p.verts), std::move(p.tags)});
    return cells;
}

// Parameter of point p along mesh edge (a, b), by projection.
inline double edge_parameter(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 d = b - a;
    double l2 = d.squaredNorm();
    return l2 > 0.0 ? (p - a).dot(d) / l2 : 0.0;
}

struct EdgeInterval {
    int poly;       // index into a flat polygon list
    double t0, t1;  // sorted parameters along the mesh edge
};

// Buckets polygon edges lying on original mesh edges, keyed by mesh edge.
template <class PolyRange>
std::map<std::pair<int, int>, std::vector<EdgeInterval>> collect_edge_intervals(
    const TriangleMesh& mesh, const PolyRange& polys) {
    std::map<std::pair<int, int>, std::vector<EdgeInterval>> buckets;
    for (size_t pi = 0; pi < polys.size(); ++pi) {
        const CellPolygon& poly = polys[pi];
        const Face& t = mesh.faces[poly.source_face];
        for (size_t k = 0; k < poly.verts.size(); ++k) {
            if (!is_mesh_edge_tag(poly.edge_tags[k])) continue;
            int le = local_edge_from_tag(poly.edge_tags[k]);
            int a = t[le], b = t[(le + 1) % 3];
            auto key = edge_key(a, b);
            double ta = edge_parameter(poly.verts[k], mesh.vertices[key.first], mesh.vertices[key.second]);
            double tb = edge_parameter(poly.verts[(k + 1) % poly.verts.size()],
                                       mesh.vertices[key.first], mesh.vertices[key.second]);
            if (ta > tb) std::swap(ta, tb);
            buckets[key].push_back({static_cast<int>(pi), ta, tb});
        }
    }
    return buckets;
}

// Emits f(poly_a, poly_b) for polygon pairs sharing a mesh-edge segment of
// positive length.
template <class PolyRange, class F>
void for_each_edge_overlap(const TriangleMesh& mesh, const PolyRange& polys, F&& f) {
    auto buckets = collect_edge_intervals(mesh, polys);
    for (auto& [key, ivs] : buckets) {
        double len = (mesh.vertices[key.second] - mesh.vertices[key.first]).norm();
        double eps = 1e-9;  // parametric
        if (len <= 0.0) continue;
        for (size_t a = 0; a < ivs.size(); ++a)
            for (size_t b = a + 1; b < ivs.size(); ++b) {
                double lo = std::max(ivs[a].t0, ivs[b].t0);
                double hi = std::min(ivs[a].t1, ivs[b].t1);
                if (hi - lo > eps) f(ivs[a].poly, ivs[b].poly);
            }
    }
}

// Emits f(poly_a, poly_b) for same-face polygon pairs sharing a collinear
// interior segment of positive length (bisector cuts and repair seams).
template <class PolyRange, class F>
void for_each_interior_overlap(const TriangleMesh& mesh, const PolyRange& polys, F&& f) {
    std::map<int, std::vector<int>> by_face;
    for (size_t pi = 0; pi < polys.size(); ++pi)
        by_face[polys[pi].source_face].push_back(static_cast<int>(pi));
    for (auto& [face, ids] : by_face) {
        if (ids.size() < 2) continue;
        struct Seg {
            int poly;
            Vec3 a, b;
        };
        std::vector<Seg> segs;
        for (int pi : ids) {
            const CellPolygon& poly = polys[pi];
            for (size_t k = 0; k < poly.verts.size(); ++k)
                if (!is_mesh_edge_tag(poly.edge_tags[k]))
                    segs.push_back({pi, poly.verts[k], poly.verts[(k + 1) % poly.verts.size()]});
        }
        const Face& t = mesh.faces[face];
        double diam = std::sqrt(std::max({(mesh.vertices[t[1]] - mesh.vertices[t[0]]).squaredNorm(),
                                          (mesh.vertices[t[2]] - mesh.vertices[t[1]]).squaredNorm(),
                                          (mesh.vertices[t[0]] - mesh.vertices[t[2]]).squaredNorm()}));
        double col_eps = 1e-9 * diam;
        for (size_t a = 0; a < segs.size(); ++a) {
            Vec3 u = segs[a].b - segs[a].a;
            double len = u.norm();
            if (len <= 0.0) continue;
            u = u / len;
            for (size_t b = a + 1; b < segs.size(); ++b) {
                if (segs[a].poly == segs[b].poly) continue;
                Vec3 pa = segs[b].a - segs[a].a, pb = segs[b].b - segs[a].a;
                if ((pa - u * pa.dot(u)).norm() > col_eps) continue;
                if ((pb - u * pb.dot(u)).norm() > col_eps) continue;
                double lo = std::max(0.0, std::min(pa.dot(u), pb.dot(u)));
                double hi = std::min(len, std::max(pa.dot(u), pb.dot(u)));
                if (hi - lo > 1e-9 * len) f(segs[a].poly, segs[b].poly);
            }
        }
    }
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace detail

// Plain restricted Voronoi decomposition; no thin-plate repair.
inline Decomposition compute_rvd(const TriangleMesh& mesh, const SiteSet& sites) {
    auto raw = detail::decompose_points(mesh, sites.positions);
    Decomposition d;
    d.cells.resize(sites.size());
    for (size_t i = 0; i < sites.size(); ++i) {
        d.cells[i].owner = static_cast<int>(i);
        d.cells[i].polygons = std::move(raw[i]);
    }
    d.refresh_summary();
    return d;
}

// Two-stage thin-plate repair. Stage 1 decomposes against real sites plus
// inward-biased copies. Stage 2 takes each connected component of biased-owned
// polygons, finds the real sites on its bounding bisectors, and re-partitions
// the component among them by nearest contributor. Components with no real
// contributor fall back to the globally nearest real site.
//
// When the biased sites win nothing the plain decomposition is returned, so
// the repair is exactly a no-op on thick models.
inline Decomposition compute_rvd_thinplate(const TriangleMesh& mesh, const SiteSet& sites,
                                           double bias,
                                           std::vector<std::string>* log = nullptr) {
    if (bias <= 0.0) throw std::invalid_argument("compute_rvd_thinplate: bias must be positive");
    const int n = static_cast<int>(sites.size());
    SiteSet biased = sites;
    if (biased.biased_positions.size() != sites.size()) biased.bias_inward(bias);

    std::vector<Vec3> all = sites.positions;
    all.insert(all.end(), biased.biased_positions.begin(), biased.biased_positions.end());
    auto raw = detail::decompose_points(mesh, all);

    bool any_biased = false;
    for (int i = n; i < 2 * n; ++i)
        if (!raw[i].empty()) any_biased = true;
    if (!any_biased) return compute_rvd(mesh, sites);

    // Flat list of biased-owned polygons, with (face, owner) lookup.
    std::vector<CellPolygon> marked;
    std::vector<int> marked_owner;
    std::map<std::pair<int, int>, int> by_face_owner;
    for (int i = n; i < 2 * n; ++i)
        for (CellPolygon& p : raw[i]) {
            by_face_owner[{p.source_face, i}] = static_cast<int>(marked.size());
            marked_owner.push_back(i);
            marked.push_back(std::move(p));
        }

    // Connected components of the marked region: biased cells touching across
    // bisector cuts within a face, or across original mesh edges.
    detail::UnionFind uf(marked.size());
    for (size_t pi = 0; pi < marked.size(); ++pi)
        for (int tag : marked[pi].edge_tags) {
            if (tag < n) continue;  // real neighbor or mesh edge
            auto it = by_face_owner.find({marked[pi].source_face, tag});
            if (it != by_face_owner.end()) uf.unite(static_cast<int>(pi), it->second);
        }
    detail::for_each_edge_overlap(mesh, marked, [&](int a, int b) { uf.unite(a, b); });

    std::map<int, std::vector<int>> components;
    for (size_t pi = 0; pi < marked.size(); ++pi)
        components[uf.find(static_cast<int>(pi))].push_back(static_cast<int>(pi));

    Decomposition d;
    d.cells.resize(n);
    for (int i = 0; i < n; ++i) {
        d.cells[i].owner = i;
        d.cells[i].polygons = std::move(raw[i]);
        // Remap tags referencing biased sites to their real parents.
        for (CellPolygon& p : d.cells[i].polygons)
            for (int& tag : p.edge_tags) {
                if (tag >= n) tag -= n;
                if (tag == i) tag = kSeamTag;
            }
    }

    for (auto& [root, members] : components) {
        // Real contributors: real sites opposite any bounding bisector.
        std::set<int> contributors;
        for (int pi : members)
            for (int tag : marked[pi].edge_tags)
                if (tag >= 0 && tag < n) contributors.insert(tag);

        std::vector<int> c(contributors.begin(), contributors.end());
        if (c.empty()) {
            // No real site on the boundary; hand the component to the nearest
            // real site (its parent, in every practical case).
            Vec3 centroid{};
            double area = 0.0;
            for (int pi : members) {
                Vec3 pc{};
                for (const Vec3& v : marked[pi].verts) pc += v;
                pc = pc / static_cast<double>(marked[pi].verts.size());
                centroid += pc * marked[pi].area;
                area += marked[pi].area;
            }
            if (area > 0.0) centroid = centroid / area;
            int best = 0;
            for (int i = 1; i < n; ++i)
                if ((sites.positions[i] - centroid).squaredNorm() <
                    (sites.positions[best] - centroid).squaredNorm())
                    best = i;
            if (log)
                log->push_back("thin-plate component with no real contributor assigned to site " +
                               std::to_string(best));
            c.push_back(best);
        }

        const double dedup_scale = 1e-24;
        for (int pi : members) {
            const CellPolygon& poly = marked[pi];
            double diam2 = 0.0;
            for (size_t k = 0; k < poly.verts.size(); ++k)
                diam2 = std::max(diam2,
                                 (poly.verts[(k + 1) % poly.verts.size()] - poly.verts[k]).squaredNorm());
            for (int owner : c) {
                std::vector<Vec3> verts = poly.verts;
                std::vector<int> tags = poly.edge_tags;
                for (int other : c) {
                    if (other == owner || verts.empty()) continue;
                    detail::clip_by_bisector(verts, tags, sites.positions[owner],
                                             sites.positions[other], other, dedup_scale * diam2);
                }
                double area = detail::polygon_area(verts);
                if (area <= 1e-14 * poly.area || verts.size() < 3) continue;
                for (int& tag : tags) {
                    if (tag >= n) tag -= n;
                    if (tag == owner) tag = kSeamTag;
                }
                d.cells[owner].polygons.push_back(
                    {poly.source_face, poly.normal, area, std::move(verts), std::move(tags)});
            }
        }
    }

    for (RestrictedCell& cell : d.cells)
        std::stable_sort(cell.polygons.begin(), cell.polygons.end(),
                         [](const CellPolygon& a, const CellPolygon& b) {
                             return a.source_face < b.source_face;
                         });
    d.refresh_summary();
    return d;
}

namespace detail {

// Flat view of all polygons of a decomposition with their owners.
struct FlatPolys {
    std::vector<const CellPolygon*> polys;
    std::vector<int> owners;
    size_t size() const { return polys.size(); }
    const CellPolygon& operator[](size_t i) const { return *polys[i]; }
};

inline FlatPolys flatten(const Decomposition& d) {
    FlatPolys f;
    for (const RestrictedCell& cell : d.cells)
        for (const CellPolygon& p : cell.polygons) {
            f.polys.push_back(&p);
            f.owners.push_back(cell.owner);
        }
    return f;
}

} // namespace detail

// Site pairs whose cells share a boundary segment of positive length.
inline std::vector<std::pair<int, int>> cell_adjacency(const TriangleMesh& mesh,
                                                       const Decomposition& d) {
    std::set<std::pair<int, int>> pairs;
    for (const RestrictedCell& cell : d.cells)
        for (const CellPolygon& p : cell.polygons)
            for (int tag : p.edge_tags)
                if (tag >= 0 && tag != cell.owner)
                    pairs.insert(edge_key(cell.owner, tag));
    auto flat = detail::flatten(d);
    auto cross = [&](int a, int b) {
        if (flat.owners[a] != flat.owners[b]) pairs.insert(edge_key(flat.owners[a], flat.owners[b]));
    };
    detail::for_each_edge_overlap(mesh, flat, cross);
    detail::for_each_interior_overlap(mesh, flat, cross);
    return {pairs.begin(), pairs.end()};
}

// Number of connected components of each cell's region. A cell satisfying
// "one site, one region" has exactly one.
inline std::vector<int> cell_component_counts(const TriangleMesh& mesh, const Decomposition& d) {
    auto flat = detail::flatten(d);
    detail::UnionFind uf(flat.size());
    auto same_owner = [&](int a, int b) {
        if (flat.owners[a] == flat.owners[b]) uf.unite(a, b);
    };
    detail::for_each_edge_overlap(mesh, flat, same_owner);
    detail::for_each_interior_overlap(mesh, flat, same_owner);
    std::vector<std::set<int>> roots(d.cells.size());
    for (size_t pi = 0; pi < flat.size(); ++pi)
        roots[flat.owners[pi]].insert(uf.find(static_cast<int>(pi)));
    std::vector<int> counts(d.cells.size());
    for (size_t i = 0; i < d.cells.size(); ++i) counts[i] = static_cast<int>(roots[i].size());
    return counts;
}

// Writes each cell as an OBJ group with a distinct material color.
inline void export_rvd(const Decomposition& d, const std::string& path) {
    std::string mtl_path = path;
    auto dot = mtl_path.find_last_of('.');
    if (dot != std::string::npos) mtl_path = mtl_path.substr(0, dot);
    mtl_path += ".mtl";

    std::ofstream mtl(mtl_path);
    if (!mtl) throw MeshError("cannot open '" + mtl_path + "' for writing");
    const int palette = 12;
    for (int k = 0; k < palette; ++k) {
        double h = k / static_cast<double>(palette) * 6.0;
        int s = static_cast<int>(h);
        double f = h - s;
        double r = 0, g = 0, b = 0;
        switch (s % 6) {
            case 0: r = 1; g = f; break;
            case 1: r = 1 - f; g = 1; break;
            case 2: g = 1; b = f; break;
            case 3: g = 1 - f; b = 1; break;
            case 4: r = f; b = 1; break;
            default: r = 1; b = 1 - f; break;
        }
        mtl << "newmtl cell" << k << "\nKd " << 0.25 + 0.75 * r << " " << 0.25 + 0.75 * g << " "
            << 0.25 + 0.75 * b << "\n";
    }

    std::ofstream out(path);
    if (!out) throw MeshError("cannot open '" + path + "' for writing");
    out.precision(17);
    auto slash = mtl_path.find_last_of("/\\");
    out << "mtllib " << (slash == std::string::npos ? mtl_path : mtl_path.substr(slash + 1))
        << "\n";
    int base = 1;
    for (const RestrictedCell& cell : d.cells) {
        if (cell.empty()) continue;  // empty cells are omitted
        out << "g cell_" << cell.owner << "\nusemtl cell" << cell.owner % palette << "\n";
        for (const CellPolygon& p : cell.polygons) {
            for (const Vec3& v : p.verts) out << "v " << v << "\n";
            out << "f";
            for (size_t k = 0; k < p.verts.size(); ++k) out << " " << base + static_cast<int>(k);
            out << "\n";
            base += static_cast<int>(p.verts.size());
        }
    }
    if (!out) throw MeshError("write failed for '" + path + "'");
}

} // namespace voromesh
