#pragma once

// Site initialization and the outer optimization loop: per iteration the CVT
// weight decays geometrically, one L-BFGS step is taken with the thin-plate
// repaired decomposition recomputed at every function evaluation, and sites
// are kept on the surface by projection inside each evaluation.

#include "energy.hpp"
#include "lbfgs.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace voromesh {

struct OptimizerConfig {
    double lambda_na0 = 1.0;
    double lambda_cvt0 = 1.0;
    double tau = 0.95;        // per-iteration CVT weight decay
    double mu = 1.05;         // CVT-rise termination tolerance
    double grad_tol = 1e-8;
    int max_iters = 100;
    int lbfgs_memory = 7;
    uint64_t seed = 0;
    double bias = -1.0;       // thin-plate bias; < 0 selects 0.01 * bbox diagonal

    void validate() const {
        if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in (0, 1]");
        if (!(mu >= 1.0)) throw std::invalid_argument("mu must be >= 1");
        if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
        if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
        if (lambda_na0 < 0.0 || lambda_cvt0 < 0.0 || (lambda_na0 == 0.0 && lambda_cvt0 == 0.0))
            throw std::invalid_argument("at least one lambda must be positive");
    }
};

inline double decay_schedule(double lambda0, double tau, int i) {
    return lambda0 * std::pow(tau, i);
}

enum class StopReason { GradTol, CvtRise, MaxIters, LineSearchFailure };

inline const char* stop_reason_string(StopReason r) {
    switch (r) {
        case StopReason::GradTol: return "grad-tol";
        case StopReason::CvtRise: return "cvt-rise";
        case StopReason::MaxIters: return "max-iters";
        default: return "line-search-failure";
    }
}

struct IterationRecord {
    int iter = 0;
    double lambda_cvt = 0.0;  // weight in effect at the iterate
    double e_na = 0.0, e_cvt = 0.0, e_total = 0.0;
    double grad_norm = 0.0;
    double wallclock = 0.0;   // seconds since optimization start
    int evaluations = 0;      // function evaluations spent this iteration
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    StopReason stop_reason = StopReason::MaxIters;
    std::vector<std::string> log;

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw MeshError("cannot open '" + path + "' for writing");
        out.precision(17);
        out << "iter,lambda_cvt,e_na,e_cvt,grad_norm,stop_reason\n";
        for (size_t k = 0; k < records.size(); ++k) {
            const IterationRecord& r = records[k];
            out << r.iter << "," << r.lambda_cvt << "," << r.e_na << "," << r.e_cvt << ","
                << r.grad_norm << ",";
            if (k + 1 == records.size()) out << stop_reason_string(stop_reason);
            out << "\n";
        }
    }
};

enum class InitStrategy { PoissonDisk, Random, Custom };

namespace detail {

// Draws single area-uniform surface samples; same stream as sample_surface.
class SurfaceSampler {
public:
    SurfaceSampler(const TriangleMesh& mesh, uint64_t seed) : mesh_(&mesh), rng_(seed) {
        cumulative_.resize(mesh.faces.size());
        double acc = 0.0;
        for (size_t f = 0; f < mesh.faces.size(); ++f) {
            acc += mesh.face_areas[f];
            cumulative_[f] = acc;
        }
        total_ = acc;
    }

    SurfaceSample draw() {
        double u = uniform01(rng_) * total_;
        size_t f = std::lower_bound(cumulative_.begin(), cumulative_.end(), u) -
                   cumulative_.begin();
        if (f >= mesh_->faces.size()) f = mesh_->faces.size() - 1;
        double r1 = std::sqrt(uniform01(rng_));
        double r2 = uniform01(rng_);
        const Face& t = mesh_->faces[f];
        Vec3 p = mesh_->vertices[t[0]] * (1.0 - r1) + mesh_->vertices[t[1]] * (r1 * (1.0 - r2)) +
                 mesh_->vertices[t[2]] * (r1 * r2);
        return {p, mesh_->face_normals[f], static_cast<int>(f)};
    }

private:
    const TriangleMesh* mesh_;
    std::mt19937_64 rng_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

// Uniform hash grid for dart-throwing rejection tests.
class DartGrid {
public:
    DartGrid(const Box3& box, double radius) : lo_(box.lo), cell_(std::max(radius, 1e-12)) {}

    bool too_close(const Vec3& p, double r) const {
        auto [ix, iy, iz] = key(p);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find(pack(ix + dx, iy + dy, iz + dz));
                    if (it == cells_.end()) continue;
                    for (const Vec3& q : it->second)
                        if ((p - q).squaredNorm() < r * r) return true;
                }
        return false;
    }

    void insert(const Vec3& p) {
        auto [ix, iy, iz] = key(p);
        cells_[pack(ix, iy, iz)].push_back(p);
    }

private:
    std::tuple<int64_t, int64_t, int64_t> key(const Vec3& p) const {
        return {static_cast<int64_t>(std::floor((p.x - lo_.x) / cell_)),
                static_cast<int64_t>(std::floor((p.y - lo_.y) / cell_)),
                static_cast<int64_t>(std::floor((p.z - lo_.z) / cell_))};
    }
    static uint64_t pack(int64_t x, int64_t y, int64_t z) {
        auto h = [](int64_t v) { return static_cast<uint64_t>(v + (1ll << 20)); };
        return (h(x) << 42) ^ (h(y) << 21) ^ h(z);
    }
    Vec3 lo_;
    double cell_;
    std::unordered_map<uint64_t, std::vector<Vec3>> cells_;
};

} // namespace detail

// Places n sites on the surface. Poisson-disk uses dart throwing with pairwise
// radius 0.7 * sqrt(total_area / n); when 100*n darts fail to place n points
// the radius relaxes by 0.9 and throwing continues (logged). Custom points are
// taken verbatim and projected onto the surface.
inline SiteSet initialize_sites(const TriangleMesh& mesh, const SurfaceIndex& surface, int n,
                                InitStrategy strategy, uint64_t seed,
                                const std::vector<Vec3>& custom_points = {},
                                std::vector<std::string>* log = nullptr) {
    if (n < 1) throw std::invalid_argument("initialize_sites: n must be >= 1");
    if (strategy == InitStrategy::Custom) {
        if (static_cast<int>(custom_points.size()) != n)
            throw std::invalid_argument("initialize_sites: custom point count mismatch");
        return make_site_set(surface, custom_points);
    }

    detail::SurfaceSampler sampler(mesh, seed);
    SiteSet sites;
    if (strategy == InitStrategy::Random) {
        for (int i = 0; i < n; ++i) {
            SurfaceSample s = sampler.draw();
            sites.push_site(s.point, s.face, s.normal);
        }
        return sites;
    }

    double radius = 0.7 * std::sqrt(mesh.total_area / n);
    detail::DartGrid grid(mesh.bounding_box(), radius);
    long attempts = 0;
    const long attempts_per_level = 100l * n;
    while (static_cast<int>(sites.positions.size()) < n) {
        if (attempts >= attempts_per_level) {
            radius *= 0.9;
            attempts = 0;
            if (log)
                log->push_back("poisson-disk: relaxed radius to " + std::to_string(radius));
        }
        ++attempts;
        SurfaceSample s = sampler.draw();
        if (grid.too_close(s.point, radius)) continue;
        grid.insert(s.point);
        sites.push_site(s.point, s.face, s.normal);
    }
    return sites;
}

struct SimplifyResult {
    SiteSet sites;
    Decomposition decomposition;
    IterationTrace trace;
};

// Full optimization of n sites on a (normalized) mesh.
inline SimplifyResult simplify(const TriangleMesh& mesh, const OptimizerConfig& config,
                               const KernelConfig& kernel_in, const SiteSet& initial) {
    config.validate();
    const int n = static_cast<int>(initial.size());
    if (n < 1) throw std::invalid_argument("simplify: empty site set");

    SurfaceIndex surface(mesh);
    const double bias = config.bias > 0.0 ? config.bias : 0.01 * mesh.bounding_box().diagonal();

    SimplifyResult result;
    IterationTrace& trace = result.trace;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    // Raw per-term values and tangent-projected per-term gradients at the last
    // evaluated point; the lambda composition happens outside so that a weight
    // change between iterations does not require a re-evaluation.
    struct Stash {
        double e_na = 0.0, e_cvt = 0.0;
        std::vector<double> g_na, g_cvt;
        SiteSet sites;
        Decomposition d;
    } stash;

    KernelConfig kernel = kernel_in;
    double lambda_na = config.lambda_na0;
    double lambda_cvt = config.lambda_cvt0;
    // The CVT weight decays by tau at every function evaluation, matching the
    // arithmetic of the solver this pipeline reproduces; the per-iteration
    // trace stores the weight in effect at each accepted iterate.
    long eval_count = 0;

    // Sites this close to a crease edge of their containing face consolidate
    // onto it. The hover offset of a near-feature site shrinks with the CVT
    // weight, so this only engages in the terminal iterations; the zone is a
    // small fraction of the site spacing, far below any geometry scale.
    const double snap_eps = 0.005 * std::sqrt(mesh.total_area / n);
    const double cos_crease = std::cos(30.0 * 3.14159265358979323846 / 180.0);

    auto snap_to_creases = [&](SiteSet& s) {
        for (int i = 0; i < n; ++i) {
            if (s.lock(i) != SiteLock::Face) continue;
            const Face& t = mesh.faces[s.faces[i]];
            for (int k = 0; k < 3; ++k) {
                int a = t[k], b = t[(k + 1) % 3];
                if (!detail::edge_is_crease(mesh, a, b, cos_crease)) continue;
                const Vec3 &va = mesh.vertices[a], &vb = mesh.vertices[b];
                Vec3 d = vb - va;
                double tt = std::clamp((s.positions[i] - va).dot(d) / d.squaredNorm(), 0.0, 1.0);
                Vec3 q = va + d * tt;
                if ((q - s.positions[i]).norm() < snap_eps) {
                    s.positions[i] = q;
                    s.locks[i] = SiteLock::Edge;
                    s.lock_dirs[i] = d.normalized();
                    break;
                }
            }
        }
    };

    auto evaluate_raw = [&](const std::vector<double>& x) {
        lambda_cvt = config.lambda_cvt0 *
                     std::pow(config.tau, static_cast<double>(eval_count));
        ++eval_count;
        std::vector<Vec3> pts(n);
        for (int i = 0; i < n; ++i) pts[i] = {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
        stash.sites = make_site_set(surface, pts);
        snap_to_creases(stash.sites);
        stash.sites.bias_inward(bias);
        stash.d = compute_rvd_thinplate(mesh, stash.sites, bias, &trace.log);

        // Evaluate both terms with unit weights to keep raw gradients separate.
        KernelConfig probe = kernel;
        probe.lambda_na = 1.0;
        probe.lambda_cvt = 0.0;
        EnergyReport na = eval_energy(stash.d, stash.sites, probe);
        probe.lambda_na = 0.0;
        probe.lambda_cvt = 1.0;
        EnergyReport cvt = eval_energy(stash.d, stash.sites, probe);

        stash.e_na = na.e_na;
        stash.e_cvt = cvt.e_cvt;
        stash.g_na.assign(3 * n, 0.0);
        stash.g_cvt.assign(3 * n, 0.0);
        for (int i = 0; i < n; ++i) {
            // Project each gradient onto the directions the site may move:
            // the tangent plane, a feature edge, or nothing at a corner.
            Vec3 gn = na.grad[i], gc = cvt.grad[i];
            switch (stash.sites.lock(i)) {
                case SiteLock::Face: {
                    const Vec3& nrm = stash.sites.normals[i];
                    gn -= nrm * gn.dot(nrm);
                    gc -= nrm * gc.dot(nrm);
                    break;
                }
                case SiteLock::Edge: {
                    const Vec3 t = stash.sites.lock_dir(i);
                    gn = t * gn.dot(t);
                    gc = t * gc.dot(t);
                    break;
                }
                case SiteLock::Vertex:
                    gn = gc = Vec3{};
                    break;
            }
            for (int k = 0; k < 3; ++k) {
                stash.g_na[3 * i + k] = gn[k];
                stash.g_cvt[3 * i + k] = gc[k];
            }
        }
    };
    auto compose = [&](std::vector<double>& g) {
        g.resize(3 * n);
        for (int k = 0; k < 3 * n; ++k)
            g[k] = lambda_na * stash.g_na[k] + lambda_cvt * stash.g_cvt[k];
        return lambda_na * stash.e_na + lambda_cvt * stash.e_cvt;
    };
    LbfgsSolver::Objective objective = [&](const std::vector<double>& x, std::vector<double>& g) {
        evaluate_raw(x);
        return compose(g);
    };
    auto norm2 = [](const std::vector<double>& g) {
        double s = 0.0;
        for (double v : g) s += v * v;
        return std::sqrt(s);
    };

    std::vector<double> x(3 * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < 3; ++k) x[3 * i + k] = initial.positions[i][k];

    LbfgsSolver solver(LbfgsOptions{config.lbfgs_memory, 1e-4, 0.9, 20});
    std::vector<double> g;

    // Moves every empty site to the barycenter of the k-th largest polygon,
    // iterating cells by area then polygons by area. Returns true if anything
    // moved (the caller must re-evaluate).
    auto reseed_empty_sites = [&](int iter) {
        if (stash.d.empty_sites.empty()) return false;
        std::vector<std::pair<double, int>> cell_rank;
        for (int i = 0; i < n; ++i) cell_rank.push_back({-stash.d.cells[i].area(), i});
        std::sort(cell_rank.begin(), cell_rank.end());
        std::vector<Vec3> spots;
        for (auto& [neg_area, ci] : cell_rank) {
            std::vector<std::pair<double, const CellPolygon*>> polys;
            for (const CellPolygon& p : stash.d.cells[ci].polygons)
                polys.push_back({-p.area, &p});
            std::sort(polys.begin(), polys.end());
            for (auto& [na_, p] : polys) {
                Vec3 c{};
                double area = 0.0;
                for (size_t k = 1; k + 1 < p->verts.size(); ++k) {
                    double a = triangle_area(p->verts[0], p->verts[k], p->verts[k + 1]);
                    c += (p->verts[0] + p->verts[k] + p->verts[k + 1]) * (a / 3.0);
                    area += a;
                }
                if (area > 0.0) spots.push_back(c / area);
                if (spots.size() >= stash.d.empty_sites.size()) break;
            }
            if (spots.size() >= stash.d.empty_sites.size()) break;
        }
        bool moved = false;
        for (size_t k = 0; k < stash.d.empty_sites.size() && k < spots.size(); ++k) {
            int i = stash.d.empty_sites[k];
            for (int c = 0; c < 3; ++c) x[3 * i + c] = spots[k][c];
            trace.log.push_back("iter " + std::to_string(iter) + ": re-seeded empty site " +
                                std::to_string(i));
            moved = true;
        }
        return moved;
    };

    evaluate_raw(x);
    if (reseed_empty_sites(0)) evaluate_raw(x);
    double fx = compose(g);
    trace.records.push_back({0, lambda_cvt, stash.e_na, stash.e_cvt, fx, norm2(g), elapsed(),
                             static_cast<int>(eval_count)});

    double min_ecvt = stash.e_cvt;
    StopReason reason = StopReason::MaxIters;
    bool stopped = false;

    if (norm2(g) < config.grad_tol) {
        reason = StopReason::GradTol;
        stopped = true;
    }

    for (int iter = 1; iter <= config.max_iters && !stopped; ++iter) {
        long evals_before = eval_count;
        fx = compose(g);

        LbfgsStepStatus st = solver.step(objective, x, fx, g);
        if (st.steepest_restart)
            trace.log.push_back("iter " + std::to_string(iter) + ": restarted from steepest descent");
        if (st.line_search_failed) {
            trace.log.push_back("iter " + std::to_string(iter) + ": line search failed twice, stopping");
            reason = StopReason::LineSearchFailure;
            evaluate_raw(x);  // leave stash at the current iterate
            fx = compose(g);
            trace.records.push_back({iter, lambda_cvt, stash.e_na, stash.e_cvt, fx, norm2(g),
                                     elapsed(), static_cast<int>(eval_count - evals_before)});
            break;
        }

        // The stash holds the accepted iterate (the line search re-evaluates it).
        fx = compose(g);
        trace.records.push_back({iter, lambda_cvt, stash.e_na, stash.e_cvt, fx, norm2(g),
                                 elapsed(), static_cast<int>(eval_count - evals_before)});

        if (reseed_empty_sites(iter)) {
            solver.reset();
            evaluate_raw(x);
            fx = compose(g);
        }

        if (norm2(g) < config.grad_tol) {
            reason = StopReason::GradTol;
            break;
        }
        if (stash.e_cvt >= config.mu * min_ecvt) {
            reason = StopReason::CvtRise;
            break;
        }
        min_ecvt = std::min(min_ecvt, stash.e_cvt);
    }

    trace.stop_reason = reason;
    result.sites = stash.sites;
    result.decomposition = stash.d;
    return result;
}

} // namespace voromesh
