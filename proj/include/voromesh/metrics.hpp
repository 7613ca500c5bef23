#pragma once

// Evaluation suite for (ground truth, simplified) mesh pairs: Chamfer and
// two-sided Hausdorff distance, F-score, normal consistency, edge-restricted
// Chamfer/F-score over sharp feature edges, triangle quality and manifold
// defect counts. All nearest-neighbor queries are exact.

#include "remesh.hpp"
#include "spatial.hpp"

#include <json.hpp>

#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace voromesh {

struct MetricsConfig {
    int sample_count = 100000;
    double f1_threshold = 0.005;    // fraction of the ground-truth bbox diagonal
    double edge_dihedral_deg = 30.0;
    int edge_sample_count = 20000;
    uint64_t seed = 0;

    void validate() const {
        if (sample_count <= 0 || edge_sample_count <= 0)
            throw std::invalid_argument("metrics: sample counts must be positive");
        if (f1_threshold <= 0.0 || edge_dihedral_deg <= 0.0)
            throw std::invalid_argument("metrics: thresholds must be positive");
    }
};

struct MetricsReport {
    double cd = 0.0, hd = 0.0, f1 = 0.0, nc = 0.0, ecd = 0.0, ef1 = 0.0;
    double triangle_q_mean = 0.0, triangle_q_min = 0.0;
    int open_b = 0, nmv = 0;
    MetricsConfig config;
    double f1_threshold_abs = 0.0;
};

namespace detail {

inline std::vector<double> nearest_distances(const std::vector<Vec3>& from, const PointIndex& to) {
    std::vector<double> d(from.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long i = 0; i < static_cast<long>(from.size()); ++i)
        d[i] = to.nearest(from[i]).second;
    return d;
}

} // namespace detail

// Symmetric mean of unsquared nearest distances.
inline double chamfer(const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    if (x.empty() || y.empty()) throw std::invalid_argument("chamfer: empty sample set");
    PointIndex ix(x), iy(y);
    double sx = 0.0, sy = 0.0;
    for (double d : detail::nearest_distances(x, iy)) sx += d;
    for (double d : detail::nearest_distances(y, ix)) sy += d;
    return 0.5 * sx / static_cast<double>(x.size()) + 0.5 * sy / static_cast<double>(y.size());
}

// max of the two one-sided sup-min distances.
inline double hausdorff(const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    if (x.empty() || y.empty()) throw std::invalid_argument("hausdorff: empty sample set");
    PointIndex ix(x), iy(y);
    double h = 0.0;
    for (double d : detail::nearest_distances(x, iy)) h = std::max(h, d);
    for (double d : detail::nearest_distances(y, ix)) h = std::max(h, d);
    return h;
}

// Harmonic mean of precision (fraction of y within threshold of x) and recall
// (fraction of x within threshold of y); 0 when both vanish.
inline double fscore(const std::vector<Vec3>& x, const std::vector<Vec3>& y, double threshold) {
    if (x.empty() || y.empty()) throw std::invalid_argument("fscore: empty sample set");
    PointIndex ix(x), iy(y);
    size_t py = 0, rx = 0;
    for (double d : detail::nearest_distances(y, ix))
        if (d <= threshold) ++py;
    for (double d : detail::nearest_distances(x, iy))
        if (d <= threshold) ++rx;
    double precision = static_cast<double>(py) / static_cast<double>(y.size());
    double recall = static_cast<double>(rx) / static_cast<double>(x.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

// Symmetric average of |n(p) . n(nearest(p))|.
inline double normal_consistency(const std::vector<SurfaceSample>& x,
                                 const std::vector<SurfaceSample>& y) {
    if (x.empty() || y.empty()) throw std::invalid_argument("normal_consistency: empty sample set");
    std::vector<Vec3> xp(x.size()), yp(y.size());
    for (size_t i = 0; i < x.size(); ++i) xp[i] = x[i].point;
    for (size_t i = 0; i < y.size(); ++i) yp[i] = y[i].point;
    PointIndex ix(std::move(xp)), iy(std::move(yp));
    double sx = 0.0, sy = 0.0;
    for (const SurfaceSample& s : x) sx += std::fabs(s.normal.dot(y[iy.nearest(s.point).first].normal));
    for (const SurfaceSample& s : y) sy += std::fabs(s.normal.dot(x[ix.nearest(s.point).first].normal));
    return 0.5 * sx / static_cast<double>(x.size()) + 0.5 * sy / static_cast<double>(y.size());
}

// Edges whose dihedral normal deviation exceeds the threshold.
inline std::vector<std::pair<Vec3, Vec3>> feature_edges(const TriangleMesh& mesh,
                                                        double dihedral_deg) {
    const double cos_thresh = std::cos(dihedral_deg * 3.14159265358979323846 / 180.0);
    std::vector<std::pair<Vec3, Vec3>> out;
    for (const auto& [e, fs] : mesh.edge_adjacency) {
        if (fs.size() != 2) continue;
        if (mesh.face_normals[fs[0]].dot(mesh.face_normals[fs[1]]) < cos_thresh)
            out.push_back({mesh.vertices[e.first], mesh.vertices[e.second]});
    }
    return out;
}

// Length-uniform samples along a set of segments; deterministic per seed.
inline std::vector<Vec3> sample_edges(const std::vector<std::pair<Vec3, Vec3>>& edges, int count,
                                      uint64_t seed) {
    std::vector<Vec3> out;
    if (edges.empty() || count <= 0) return out;
    std::vector<double> cumulative(edges.size());
    double acc = 0.0;
    for (size_t e = 0; e < edges.size(); ++e) {
        acc += (edges[e].second - edges[e].first).norm();
        cumulative[e] = acc;
    }
    if (acc <= 0.0) return out;
    std::mt19937_64 rng(seed);
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        double u = uniform01(rng) * acc;
        size_t e = std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
        if (e >= edges.size()) e = edges.size() - 1;
        double t = uniform01(rng);
        out.push_back(edges[e].first + (edges[e].second - edges[e].first) * t);
    }
    return out;
}

// Edge Chamfer distance and edge F-score. When only one mesh has feature
// edges the pair is maximally inconsistent: ECD reports the ground-truth bbox
// diagonal as a sentinel and EF1 is 0. When neither has feature edges the pair
// is trivially consistent: ECD 0, EF1 1.
inline std::pair<double, double> edge_metrics(const TriangleMesh& gt,
                                              const TriangleMesh& simplified,
                                              const MetricsConfig& cfg) {
    auto eg = feature_edges(gt, cfg.edge_dihedral_deg);
    auto es = feature_edges(simplified, cfg.edge_dihedral_deg);
    const double diag = gt.bounding_box().diagonal();
    if (eg.empty() && es.empty()) return {0.0, 1.0};
    if (eg.empty() || es.empty()) return {diag, 0.0};
    auto xs = sample_edges(eg, cfg.edge_sample_count, cfg.seed);
    auto ys = sample_edges(es, cfg.edge_sample_count, cfg.seed);
    return {chamfer(xs, ys), fscore(xs, ys, cfg.f1_threshold * diag)};
}

inline MetricsReport full_report(const TriangleMesh& gt, const TriangleMesh& simplified,
                                 const MetricsConfig& cfg) {
    cfg.validate();
    MetricsReport r;
    r.config = cfg;
    r.f1_threshold_abs = cfg.f1_threshold * gt.bounding_box().diagonal();

    auto xs = sample_surface(gt, cfg.sample_count, cfg.seed);
    auto ys = sample_surface(simplified, cfg.sample_count, cfg.seed);
    std::vector<Vec3> xp(xs.size()), yp(ys.size());
    for (size_t i = 0; i < xs.size(); ++i) xp[i] = xs[i].point;
    for (size_t i = 0; i < ys.size(); ++i) yp[i] = ys[i].point;

    r.cd = chamfer(xp, yp);
    r.hd = hausdorff(xp, yp);
    r.f1 = fscore(xp, yp, r.f1_threshold_abs);
    r.nc = normal_consistency(xs, ys);
    std::tie(r.ecd, r.ef1) = edge_metrics(gt, simplified, cfg);

    QualityReport q = quality_report(simplified);
    r.triangle_q_mean = q.triangle_q_mean;
    r.triangle_q_min = q.triangle_q_min;
    r.open_b = q.open_b;
    r.nmv = q.nmv;
    return r;
}

inline nlohmann::json to_json(const MetricsReport& r) {
    return {{"cd", r.cd},
            {"hd", r.hd},
            {"f1", r.f1},
            {"nc", r.nc},
            {"ecd", r.ecd},
            {"ef1", r.ef1},
            {"triangle_q_mean", r.triangle_q_mean},
            {"triangle_q_min", r.triangle_q_min},
            {"open_b", r.open_b},
            {"nmv", r.nmv},
            {"config_echo",
             {{"sample_count", r.config.sample_count},
              {"f1_threshold", r.config.f1_threshold},
              {"f1_threshold_abs", r.f1_threshold_abs},
              {"edge_dihedral_deg", r.config.edge_dihedral_deg},
              {"edge_sample_count", r.config.edge_sample_count},
              {"seed", r.config.seed}}}};
}

} // namespace voromesh
