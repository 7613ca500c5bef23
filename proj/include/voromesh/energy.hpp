#pragma once

// The combined functional over a restricted Voronoi decomposition:
//
//   E = lambda_na * sum_i \int_{cell i} ((x - x_i) . n_x)^2 ds
//     + lambda_cvt * sum_i \int_{cell i} rho(x) |x - x_i|^2 ds
//
// with n_x the (piecewise constant) base-face normal. Gradients use the area
// terms only; the boundary line integrals that appear when the decomposition
// moves are available separately as a validation quantity.

#include "quadrature.hpp"
#include "rvd.hpp"

#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace voromesh {

enum class CvtMetric { Identity, Density };

struct KernelConfig {
    double lambda_na = 1.0;
    double lambda_cvt = 1.0;
    CvtMetric cvt_metric = CvtMetric::Identity;
    std::vector<double> density;  // per face, used when cvt_metric == Density

    double rho(int face) const {
        return cvt_metric == CvtMetric::Density ? density[face] : 1.0;
    }
};

struct EnergyReport {
    double e_na = 0.0;       // raw normal-anisotropy term
    double e_cvt = 0.0;      // raw CVT term
    double e_total = 0.0;    // lambda_na * e_na + lambda_cvt * e_cvt
    std::vector<Vec3> grad;  // lambda-weighted gradient per site
    std::vector<double> per_site_na;
    std::vector<double> per_site_cvt;
};

inline EnergyReport eval_energy(const Decomposition& d, const SiteSet& sites,
                                const KernelConfig& kernel) {
    const int n = static_cast<int>(sites.size());
    if (static_cast<int>(d.cells.size()) != n)
        throw std::invalid_argument("eval_energy: decomposition/site-count mismatch");
    if (kernel.lambda_na < 0.0 || kernel.lambda_cvt < 0.0 ||
        (kernel.lambda_na == 0.0 && kernel.lambda_cvt == 0.0))
        throw std::invalid_argument("eval_energy: at least one lambda must be positive");

    EnergyReport r;
    r.grad.assign(n, Vec3{});
    r.per_site_na.assign(n, 0.0);
    r.per_site_cvt.assign(n, 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (int i = 0; i < n; ++i) {
        const Vec3 xi = sites.positions[i];
        double na = 0.0, cvt = 0.0;
        Vec3 g{};
        for (const CellPolygon& poly : d.cells[i].polygons) {
            const Vec3 nx = poly.normal;
            const double rho = kernel.rho(poly.source_face);
            na += integrate_polygon(poly.verts, [&](const Vec3& x) {
                double t = (x - xi).dot(nx);
                return t * t;
            });
            cvt += integrate_polygon(poly.verts, [&](const Vec3& x) {
                return rho * (x - xi).squaredNorm();
            });
            if (kernel.lambda_na > 0.0)
                g += integrate_polygon_vec(poly.verts, [&](const Vec3& x) {
                    return nx * (-2.0 * (x - xi).dot(nx));
                }) * kernel.lambda_na;
            if (kernel.lambda_cvt > 0.0)
                g += integrate_polygon_vec(poly.verts, [&](const Vec3& x) {
                    return (x - xi) * (-2.0 * rho);
                }) * kernel.lambda_cvt;
        }
        r.per_site_na[i] = na;
        r.per_site_cvt[i] = cvt;
        r.grad[i] = g;
    }
    for (int i = 0; i < n; ++i) {
        r.e_na += r.per_site_na[i];
        r.e_cvt += r.per_site_cvt[i];
    }
    r.e_total = kernel.lambda_na * r.e_na + kernel.lambda_cvt * r.e_cvt;
    return r;
}

// Boundary line integrals of the normal-anisotropy gradient: the terms the
// production gradient omits. For site i they sum, over every cell-boundary
// segment shared with a neighbor j,
//
//   ( \int ((x-x_i).n)^2 dl - \int ((x-x_j).n)^2 dl ) * e_ij / (2 |e_ij|)
//
// with e_ij = x_j - x_i and 2-point Gauss quadrature per segment. Validation
// only; never used in descent.
inline std::vector<Vec3> eval_boundary_correction(const Decomposition& d, const SiteSet& sites) {
    const int n = static_cast<int>(sites.size());
    if (static_cast<int>(d.cells.size()) != n)
        throw std::invalid_argument("eval_boundary_correction: decomposition/site-count mismatch");
    std::vector<Vec3> corr(n, Vec3{});
    for (int i = 0; i < n; ++i) {
        const Vec3 xi = sites.positions[i];
        for (const CellPolygon& poly : d.cells[i].polygons) {
            const Vec3 nx = poly.normal;
            const size_t m = poly.verts.size();
            for (size_t k = 0; k < m; ++k) {
                int j = poly.edge_tags[k];
                if (j < 0 || j == i) continue;
                const Vec3 xj = sites.positions[j];
                Vec3 eij = xj - xi;
                double len = eij.norm();
                if (len <= 0.0) continue;
                const Vec3 &a = poly.verts[k], &b = poly.verts[(k + 1) % m];
                double own = integrate_segment(a, b, [&](const Vec3& x) {
                    double t = (x - xi).dot(nx);
                    return t * t;
                });
                double other = integrate_segment(a, b, [&](const Vec3& x) {
                    double t = (x - xj).dot(nx);
                    return t * t;
                });
                corr[i] += eij * ((own - other) / (2.0 * len));
            }
        }
    }
    return corr;
}

enum class DensityMode { Uniform, Lfs };

// Per-face density for the isotropic CVT metric. "Lfs" approximates the local
// feature size by the distance from each face centroid to the nearest feature
// vertex (a vertex with an incident edge whose dihedral normal deviation
// exceeds feature_angle_deg); density is 1/lfs^2 scaled to the mean and
// clamped to [1, 100]. Meshes with no feature vertices get uniform density.
inline std::vector<double> density_field(const TriangleMesh& mesh, DensityMode mode,
                                         double feature_angle_deg = 30.0) {
    std::vector<double> rho(mesh.faces.size(), 1.0);
    if (mode == DensityMode::Uniform) return rho;

    const double cos_thresh = std::cos(feature_angle_deg * 3.14159265358979323846 / 180.0);
    std::vector<char> feature(mesh.vertices.size(), 0);
    bool any = false;
    for (const auto& [e, fs] : mesh.edge_adjacency) {
        if (fs.size() != 2) continue;
        if (mesh.face_normals[fs[0]].dot(mesh.face_normals[fs[1]]) < cos_thresh) {
            feature[e.first] = feature[e.second] = 1;
            any = true;
        }
    }
    if (!any) return rho;

    std::vector<Vec3> pts;
    for (size_t v = 0; v < mesh.vertices.size(); ++v)
        if (feature[v]) pts.push_back(mesh.vertices[v]);
    PointIndex index(std::move(pts));

    std::vector<double> lfs(mesh.faces.size(), 0.0);
    double mean = 0.0;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        lfs[f] = std::max(index.nearest(mesh.face_centroid(f)).second, 1e-12);
        mean += lfs[f];
    }
    mean /= static_cast<double>(mesh.faces.size());
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        double v = (mean / lfs[f]) * (mean / lfs[f]);
        rho[f] = std::min(100.0, std::max(1.0, v));
    }
    return rho;
}

} // namespace voromesh
