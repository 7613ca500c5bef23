#pragma once

// Exact nearest-neighbor queries over point sets (kd-tree), closest point on
// a triangle mesh (AABB tree), and area-uniform surface sampling.

#include "mesh.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>
#include <vector>

namespace voromesh {

// Exact nearest neighbors, ties broken by lowest point index.
class PointIndex {
public:
    PointIndex() = default;

    explicit PointIndex(std::vector<Vec3> points) : pts_(std::move(points)) {
        if (pts_.empty()) throw std::invalid_argument("PointIndex: empty point set");
        order_.resize(pts_.size());
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(2 * pts_.size());
        root_ = build(0, static_cast<int>(pts_.size()));
    }

    size_t size() const { return pts_.size(); }
    const Vec3& point(int i) const { return pts_[i]; }

    // (index, distance) of the exact nearest point.
    std::pair<int, double> nearest(const Vec3& q) const {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::max();
        search(root_, q, best, best_d2);
        return {best, std::sqrt(best_d2)};
    }

    // Indices of all points within distance r of q, sorted by (distance, index).
    std::vector<int> radius_query(const Vec3& q, double r) const {
        std::vector<int> out;
        radius_search(root_, q, r * r, out);
        std::sort(out.begin(), out.end(), [&](int a, int b) {
            double da = (pts_[a] - q).squaredNorm(), db = (pts_[b] - q).squaredNorm();
            return da != db ? da < db : a < b;
        });
        return out;
    }

private:
    struct Node {
        int axis = -1;           // -1 for leaves
        double split = 0.0;
        int left = -1, right = -1;
        int begin = 0, end = 0;  // range in order_ for leaves
    };

    static constexpr int kLeafSize = 8;

    int build(int begin, int end) {
        Node n;
        Box3 box;
        for (int i = begin; i < end; ++i) box.expand(pts_[order_[i]]);
        if (end - begin <= kLeafSize) {
            n.begin = begin;
            n.end = end;
            nodes_.push_back(n);
            return static_cast<int>(nodes_.size()) - 1;
        }
        Vec3 ext = box.extent();
        int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
        int mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) { return pts_[a][axis] < pts_[b][axis]; });
        n.axis = axis;
        n.split = pts_[order_[mid]][axis];
        int self = static_cast<int>(nodes_.size());
        nodes_.push_back(n);
        int l = build(begin, mid);
        int r = build(mid, end);
        nodes_[self].left = l;
        nodes_[self].right = r;
        return self;
    }

    void search(int ni, const Vec3& q, int& best, double& best_d2) const {
        const Node& n = nodes_[ni];
        if (n.axis < 0) {
            for (int i = n.begin; i < n.end; ++i) {
                int idx = order_[i];
                double d2 = (pts_[idx] - q).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
                    best_d2 = d2;
                    best = idx;
                }
            }
            return;
        }
        double delta = q[n.axis] - n.split;
        int near = delta <= 0.0 ? n.left : n.right;
        int far = delta <= 0.0 ? n.right : n.left;
        search(near, q, best, best_d2);
        // Visit the far side on exact ties too, so the lowest index wins.
        if (delta * delta <= best_d2) search(far, q, best, best_d2);
    }

    void radius_search(int ni, const Vec3& q, double r2, std::vector<int>& out) const {
        const Node& n = nodes_[ni];
        if (n.axis < 0) {
            for (int i = n.begin; i < n.end; ++i)
                if ((pts_[order_[i]] - q).squaredNorm() <= r2) out.push_back(order_[i]);
            return;
        }
        double delta = q[n.axis] - n.split;
        radius_search(delta <= 0.0 ? n.left : n.right, q, r2, out);
        if (delta * delta <= r2) radius_search(delta <= 0.0 ? n.right : n.left, q, r2, out);
    }

    std::vector<Vec3> pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Feature of a triangle that carries a closest point: a vertex, the interior
// of an edge, or the face interior. Vertex k of the face is k, edge from
// vertex k to k+1 is 3+k, the interior is 6.
enum TriangleRegion {
    kRegionVertexA = 0,
    kRegionVertexB = 1,
    kRegionVertexC = 2,
    kRegionEdgeAB = 3,
    kRegionEdgeBC = 4,
    kRegionEdgeCA = 5,
    kRegionInterior = 6,
};

// Closest point on the closed triangle (a,b,c) to p. Ericson, RTCD 5.1.5.
// The branch structure identifies the supporting region exactly.
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                                      int* region = nullptr) {
    auto in = [&](int r) {
        if (region) *region = r;
    };
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        in(kRegionVertexA);
        return a;
    }

    Vec3 bp = p - b;
    double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        in(kRegionVertexB);
        return b;
    }

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        in(kRegionEdgeAB);
        return a + ab * (d1 / (d1 - d3));
    }

    Vec3 cp = p - c;
    double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        in(kRegionVertexC);
        return c;
    }

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        in(kRegionEdgeCA);
        return a + ac * (d2 / (d2 - d6));
    }

    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        in(kRegionEdgeBC);
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }

    double denom = 1.0 / (va + vb + vc);
    in(kRegionInterior);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

struct SurfacePoint {
    Vec3 point;
    int face = -1;
    int region = kRegionInterior;  // TriangleRegion within that face
};

// AABB tree over mesh faces for exact closest-point-on-surface queries.
// Degenerate (zero-area) faces are excluded; they carry no usable normal.
class SurfaceIndex {
public:
    explicit SurfaceIndex(const TriangleMesh& mesh) : mesh_(&mesh) {
        for (size_t f = 0; f < mesh.faces.size(); ++f)
            if (mesh.face_areas[f] > 0.0) face_ids_.push_back(static_cast<int>(f));
        if (face_ids_.empty()) throw MeshError("SurfaceIndex: mesh has no non-degenerate faces");
        nodes_.reserve(2 * face_ids_.size());
        root_ = build(0, static_cast<int>(face_ids_.size()));
    }

    const TriangleMesh& mesh() const { return *mesh_; }

    // (closest point, face id); ties broken by lowest face id.
    std::pair<Vec3, int> closest_point(const Vec3& q) const {
        SurfacePoint sp = project(q);
        return {sp.point, sp.face};
    }

    // Closest point with the supporting triangle region.
    SurfacePoint project(const Vec3& q) const {
        SurfacePoint best;
        double best_d2 = std::numeric_limits<double>::max();
        search(root_, q, best, best_d2);
        return best;
    }

private:
    struct Node {
        Box3 box;
        int left = -1, right = -1;
        int begin = 0, end = 0;
    };

    static constexpr int kLeafSize = 4;

    Box3 face_box(int f) const {
        Box3 b;
        for (int k = 0; k < 3; ++k) b.expand(mesh_->vertices[mesh_->faces[f][k]]);
        return b;
    }

    int build(int begin, int end) {
        Node n;
        for (int i = begin; i < end; ++i) n.box.expand(face_box(face_ids_[i]));
        if (end - begin <= kLeafSize) {
            n.begin = begin;
            n.end = end;
            nodes_.push_back(n);
            return static_cast<int>(nodes_.size()) - 1;
        }
        Vec3 ext = n.box.extent();
        int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
        int mid = (begin + end) / 2;
        std::nth_element(
            face_ids_.begin() + begin, face_ids_.begin() + mid, face_ids_.begin() + end,
            [&](int a, int b) {
                double ca = mesh_->face_centroid(a)[axis], cb = mesh_->face_centroid(b)[axis];
                return ca != cb ? ca < cb : a < b;
            });
        int self = static_cast<int>(nodes_.size());
        n.left = n.right = -1;
        nodes_.push_back(n);
        int l = build(begin, mid);
        int r = build(mid, end);
        nodes_[self].left = l;
        nodes_[self].right = r;
        return self;
    }

    void search(int ni, const Vec3& q, SurfacePoint& best, double& best_d2) const {
        const Node& n = nodes_[ni];
        if (n.box.squaredDistance(q) > best_d2) return;
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i) {
                int f = face_ids_[i];
                const Face& t = mesh_->faces[f];
                int region = kRegionInterior;
                Vec3 cp = closest_point_on_triangle(q, mesh_->vertices[t[0]], mesh_->vertices[t[1]],
                                                    mesh_->vertices[t[2]], &region);
                double d2 = (cp - q).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && f < best.face)) {
                    best_d2 = d2;
                    best = {cp, f, region};
                }
            }
            return;
        }
        double dl = nodes_[n.left].box.squaredDistance(q);
        double dr = nodes_[n.right].box.squaredDistance(q);
        if (dl <= dr) {
            search(n.left, q, best, best_d2);
            if (dr <= best_d2) search(n.right, q, best, best_d2);
        } else {
            search(n.right, q, best, best_d2);
            if (dl <= best_d2) search(n.left, q, best, best_d2);
        }
    }

    const TriangleMesh* mesh_;
    std::vector<int> face_ids_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

struct SurfaceSample {
    Vec3 point;
    Vec3 normal;
    int face = -1;
};

// Area-uniform samples: face chosen proportional to area, barycentric uniform
// within the face. Bit-identical for a fixed seed on one platform.
inline std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, int count,
                                                 uint64_t seed) {
    if (count <= 0) throw std::invalid_argument("sample_surface: count must be positive");
    if (mesh.total_area <= 0.0) throw MeshError("sample_surface: zero-area mesh");
    std::vector<double> cumulative(mesh.faces.size());
    double acc = 0.0;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        acc += mesh.face_areas[f];
        cumulative[f] = acc;
    }
    std::mt19937_64 rng(seed);
    std::vector<SurfaceSample> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        double u = uniform01(rng) * acc;
        size_t f = std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
        if (f >= mesh.faces.size()) f = mesh.faces.size() - 1;
        double r1 = std::sqrt(uniform01(rng));
        double r2 = uniform01(rng);
        const Face& t = mesh.faces[f];
        Vec3 p = mesh.vertices[t[0]] * (1.0 - r1) + mesh.vertices[t[1]] * (r1 * (1.0 - r2)) +
                 mesh.vertices[t[2]] * (r1 * r2);
        out.push_back({p, mesh.face_normals[f], static_cast<int>(f)});
    }
    return out;
}

} // namespace voromesh
