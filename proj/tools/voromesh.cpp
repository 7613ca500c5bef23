// Command-line front-end: `simplify` runs the full pipeline and writes the
// dual mesh plus a run manifest, `metrics` evaluates a (ground truth,
// simplified) pair, `rvd` computes and exports a decomposition on its own.

#include <voromesh/voromesh.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace voromesh;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 1 I/O failure, 2 invalid configuration, 3 optimization failure.
enum ExitCode { kOk = 0, kIoError = 1, kConfigError = 2, kOptimizationError = 3 };

void apply_thread_cap(int threads) {
#ifdef _OPENMP
    if (threads <= 0) {
        const char* env = std::getenv("CWF_THREADS");
        if (env) threads = std::atoi(env);
    }
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

std::vector<Vec3> load_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open points file '" + path + "'");
    std::vector<Vec3> pts;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        Vec3 p;
        if (ls >> p.x >> p.y >> p.z) pts.push_back(p);  // extra columns ignored
    }
    if (pts.empty()) throw MeshError("points file '" + path + "' contains no points");
    return pts;
}

InitStrategy parse_init(const std::string& name) {
    if (name == "poisson") return InitStrategy::PoissonDisk;
    if (name == "random") return InitStrategy::Random;
    if (name == "file") return InitStrategy::Custom;
    throw std::invalid_argument("unknown init strategy '" + name + "'");
}

Decomposition denormalized_copy(const Decomposition& d, const NormalizationTransform& tf) {
    Decomposition out = d;
    for (RestrictedCell& cell : out.cells)
        for (CellPolygon& p : cell.polygons)
            for (Vec3& v : p.verts) v = tf.invert(v);
    return out;
}

struct SimplifyArgs {
    std::string input, output = "out.obj";
    int target_vertices = 0;
    double lambda_na = 1.0, lambda_cvt = 1.0, tau = 0.95, mu = 1.05, grad_tol = 1e-8;
    int max_iters = 100;
    std::string init = "poisson", init_file, density = "uniform";
    double bias = 0.01;
    uint64_t seed = 0;
    std::string export_rvd_path, trace_csv, manifest_path;
    int threads = 0;
};

json config_json(const SimplifyArgs& a) {
    return {{"target_vertices", a.target_vertices},
            {"lambda_na", a.lambda_na},
            {"lambda_cvt", a.lambda_cvt},
            {"tau", a.tau},
            {"mu", a.mu},
            {"grad_tol", a.grad_tol},
            {"max_iters", a.max_iters},
            {"init", a.init},
            {"init_file", a.init_file},
            {"density", a.density},
            {"bias", a.bias},
            {"seed", a.seed}};
}

void load_manifest_defaults(const std::string& path, SimplifyArgs& a) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open manifest '" + path + "'");
    json m = json::parse(in);
    json c = m.at("config");
    a.input = m.at("input").get<std::string>();
    a.output = m.at("output").get<std::string>();
    a.target_vertices = c.at("target_vertices").get<int>();
    a.lambda_na = c.at("lambda_na").get<double>();
    a.lambda_cvt = c.at("lambda_cvt").get<double>();
    a.tau = c.at("tau").get<double>();
    a.mu = c.at("mu").get<double>();
    a.grad_tol = c.at("grad_tol").get<double>();
    a.max_iters = c.at("max_iters").get<int>();
    a.init = c.at("init").get<std::string>();
    a.init_file = c.at("init_file").get<std::string>();
    a.density = c.at("density").get<std::string>();
    a.bias = c.at("bias").get<double>();
    a.seed = c.at("seed").get<uint64_t>();
}

int run_simplify(const SimplifyArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    apply_thread_cap(a.threads);

    TriangleMesh input = load_mesh(a.input);
    auto [mesh, transform] = normalize_area(input);
    SurfaceIndex surface(mesh);

    KernelConfig kernel;
    kernel.lambda_na = a.lambda_na;
    kernel.lambda_cvt = a.lambda_cvt;
    if (a.density == "lfs") {
        kernel.cvt_metric = CvtMetric::Density;
        kernel.density = density_field(mesh, DensityMode::Lfs);
    } else if (a.density != "uniform") {
        throw std::invalid_argument("unknown density mode '" + a.density + "'");
    }

    OptimizerConfig cfg;
    cfg.lambda_na0 = a.lambda_na;
    cfg.lambda_cvt0 = a.lambda_cvt;
    cfg.tau = a.tau;
    cfg.mu = a.mu;
    cfg.grad_tol = a.grad_tol;
    cfg.max_iters = a.max_iters;
    cfg.seed = a.seed;
    cfg.bias = a.bias * mesh.bounding_box().diagonal();
    cfg.validate();

    InitStrategy strategy = parse_init(a.init);
    std::vector<Vec3> custom;
    if (strategy == InitStrategy::Custom) {
        if (a.init_file.empty())
            throw std::invalid_argument("--init file requires --init-file");
        for (const Vec3& p : load_points(a.init_file)) custom.push_back(transform.apply(p));
        if (static_cast<int>(custom.size()) != a.target_vertices)
            throw std::invalid_argument("--init-file holds " + std::to_string(custom.size()) +
                                        " points, --target-vertices is " +
                                        std::to_string(a.target_vertices));
    }
    SiteSet init =
        initialize_sites(mesh, surface, a.target_vertices, strategy, a.seed, custom);

    SimplifyResult res = simplify(mesh, cfg, kernel, init);

    DualMesh dual = extract_dual(res.decomposition, res.sites);
    TriangleMesh out_mesh = denormalize(dual.mesh, transform);
    write_mesh(out_mesh, a.output);

    if (!a.export_rvd_path.empty())
        export_rvd(denormalized_copy(res.decomposition, transform), a.export_rvd_path);
    if (!a.trace_csv.empty()) res.trace.write_csv(a.trace_csv);

    double wallclock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto [open_b, nmv] = manifold_report(out_mesh);
    std::string manifest_path =
        a.manifest_path.empty() ? a.output + ".manifest.json" : a.manifest_path;
    json manifest = {{"tool", "voromesh"},
                     {"version", kVersion},
                     {"input", a.input},
                     {"output", a.output},
                     {"export_rvd", a.export_rvd_path},
                     {"trace_csv", a.trace_csv},
                     {"config", config_json(a)},
                     {"seed", a.seed},
                     {"stop_reason", stop_reason_string(res.trace.stop_reason)},
                     {"iterations", res.trace.records.back().iter},
                     {"final_e_na", res.trace.records.back().e_na},
                     {"final_e_cvt", res.trace.records.back().e_cvt},
                     {"dual_vertices", out_mesh.vertices.size()},
                     {"dual_faces", out_mesh.faces.size()},
                     {"open_b", open_b},
                     {"nmv", nmv},
                     {"wallclock_seconds", wallclock}};
    std::ofstream mout(manifest_path);
    if (!mout) throw MeshError("cannot write manifest '" + manifest_path + "'");
    mout << manifest.dump(2) << "\n";

    std::cout << "wrote " << a.output << " (" << out_mesh.vertices.size() << " vertices, "
              << out_mesh.faces.size() << " faces), stop reason "
              << stop_reason_string(res.trace.stop_reason) << ", " << wallclock << " s\n";
    for (const std::string& line : res.trace.log) std::cout << "note: " << line << "\n";

    return res.trace.stop_reason == StopReason::LineSearchFailure ? kOptimizationError : kOk;
}

int run_metrics(const std::string& gt_path, const std::string& simp_path, MetricsConfig cfg,
                const std::string& json_path, int threads) {
    apply_thread_cap(threads);
    TriangleMesh gt = load_mesh(gt_path);
    TriangleMesh simp = load_mesh(simp_path);
    MetricsReport r = full_report(gt, simp, cfg);

    std::cout.precision(6);
    std::cout << "CD        " << r.cd << "\n"
              << "F1        " << r.f1 << "\n"
              << "NC        " << r.nc << "\n"
              << "ECD       " << r.ecd << "\n"
              << "EF1       " << r.ef1 << "\n"
              << "TriangleQ " << r.triangle_q_mean << " (min " << r.triangle_q_min << ")\n"
              << "HD        " << r.hd << "\n"
              << "OpenB     " << r.open_b << "\n"
              << "NMV       " << r.nmv << "\n"
              << "F1 threshold: " << cfg.f1_threshold << " x bbox diagonal = "
              << r.f1_threshold_abs << "\n";
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw MeshError("cannot write report '" + json_path + "'");
        out << to_json(r).dump(2) << "\n";
    }
    return kOk;
}

int run_rvd(const std::string& input, const std::string& sites_file, int num_sites,
            const std::string& init, uint64_t seed, double bias_frac, bool no_thin_fix,
            const std::string& output, int threads) {
    apply_thread_cap(threads);
    TriangleMesh mesh = load_mesh(input);
    SurfaceIndex surface(mesh);

    SiteSet sites;
    if (!sites_file.empty()) {
        sites = make_site_set(surface, load_points(sites_file));
    } else {
        if (num_sites < 1)
            throw std::invalid_argument("either --sites or --num-sites is required");
        sites = initialize_sites(mesh, surface, num_sites, parse_init(init), seed);
    }

    double bias = bias_frac * mesh.bounding_box().diagonal();
    std::vector<std::string> log;
    Decomposition d = no_thin_fix ? compute_rvd(mesh, sites)
                                  : compute_rvd_thinplate(mesh, sites, bias, &log);
    export_rvd(d, output);

    auto counts = cell_component_counts(mesh, d);
    int multi = 0;
    for (size_t i = 0; i < counts.size(); ++i)
        if (counts[i] > 1) {
            ++multi;
            std::cout << "warning: cell " << i << " has " << counts[i]
                      << " connected components\n";
        }
    std::cout << "wrote " << output << ": " << sites.size() << " sites, "
              << d.empty_sites.size() << " empty, " << multi << " multi-component cells\n";
    for (const std::string& line : log) std::cout << "note: " << line << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voronoi-based mesh simplification and evaluation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // simplify
    SimplifyArgs sa;
    auto* simp = app.add_subcommand("simplify", "Simplify a mesh to N movable vertices");
    simp->add_option("input", sa.input, "input mesh (OBJ or PLY)");
    simp->add_option("--target-vertices,-n", sa.target_vertices, "number of output vertices");
    simp->add_option("-o,--output", sa.output, "output OBJ path")->capture_default_str();
    simp->add_option("--lambda-na", sa.lambda_na, "normal anisotropy weight")
        ->capture_default_str();
    simp->add_option("--lambda-cvt", sa.lambda_cvt, "initial CVT weight")->capture_default_str();
    simp->add_option("--tau", sa.tau, "per-iteration CVT weight decay")->capture_default_str();
    simp->add_option("--mu", sa.mu, "CVT-rise termination tolerance")->capture_default_str();
    simp->add_option("--grad-tol", sa.grad_tol, "gradient norm tolerance")->capture_default_str();
    simp->add_option("--max-iters", sa.max_iters, "iteration cap")->capture_default_str();
    simp->add_option("--init", sa.init, "site initialization: poisson, random, file")
        ->capture_default_str();
    simp->add_option("--init-file", sa.init_file, "points file for --init file");
    simp->add_option("--density", sa.density, "CVT density: uniform or lfs")
        ->capture_default_str();
    simp->add_option("--bias", sa.bias, "thin-plate bias, fraction of bbox diagonal")
        ->capture_default_str();
    simp->add_option("--seed", sa.seed, "random seed")->capture_default_str();
    simp->add_option("--export-rvd", sa.export_rvd_path, "also export the final RVD as OBJ");
    simp->add_option("--trace-csv", sa.trace_csv, "write per-iteration trace CSV");
    simp->add_option("--manifest", sa.manifest_path,
                     "manifest path (default: OUTPUT.manifest.json)");
    simp->add_option("--threads", sa.threads, "thread cap (default: all cores; env CWF_THREADS)");
    std::string from_manifest;
    simp->add_option("--from-manifest", from_manifest, "re-run a recorded configuration");

    // metrics
    std::string gt_path, simp_path, json_path;
    MetricsConfig mcfg;
    int mthreads = 0;
    auto* met = app.add_subcommand("metrics", "Evaluate a (ground truth, simplified) pair");
    met->add_option("gt", gt_path, "ground-truth mesh")->required();
    met->add_option("simplified", simp_path, "simplified mesh")->required();
    met->add_option("--samples", mcfg.sample_count, "surface sample count")
        ->capture_default_str();
    met->add_option("--f1-threshold", mcfg.f1_threshold, "F1 threshold, fraction of bbox diagonal")
        ->capture_default_str();
    met->add_option("--edge-dihedral", mcfg.edge_dihedral_deg, "feature edge dihedral (degrees)")
        ->capture_default_str();
    met->add_option("--edge-samples", mcfg.edge_sample_count, "edge sample count")
        ->capture_default_str();
    met->add_option("--seed", mcfg.seed, "sampling seed")->capture_default_str();
    met->add_option("--json", json_path, "write the JSON report here");
    met->add_option("--threads", mthreads, "thread cap");

    // rvd
    std::string rvd_input, rvd_sites, rvd_init = "poisson", rvd_out = "rvd.obj";
    int rvd_n = 0, rvd_threads = 0;
    uint64_t rvd_seed = 0;
    double rvd_bias = 0.01;
    bool no_thin_fix = false;
    auto* rvd = app.add_subcommand("rvd", "Compute and export a decomposition without optimizing");
    rvd->add_option("input", rvd_input, "input mesh")->required();
    rvd->add_option("--sites", rvd_sites, "site points file (xyz per line)");
    rvd->add_option("--num-sites", rvd_n, "generate this many sites instead");
    rvd->add_option("--init", rvd_init, "generator: poisson or random")->capture_default_str();
    rvd->add_option("--seed", rvd_seed, "random seed")->capture_default_str();
    rvd->add_option("--bias", rvd_bias, "thin-plate bias, fraction of bbox diagonal")
        ->capture_default_str();
    rvd->add_flag("--no-thin-fix", no_thin_fix, "skip the thin-plate repair");
    rvd->add_option("-o,--output", rvd_out, "output OBJ path")->capture_default_str();
    rvd->add_option("--threads", rvd_threads, "thread cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (simp->parsed()) {
            if (!from_manifest.empty()) {
                SimplifyArgs replay;
                load_manifest_defaults(from_manifest, replay);
                replay.export_rvd_path = sa.export_rvd_path;
                replay.trace_csv = sa.trace_csv;
                replay.manifest_path = sa.manifest_path;
                replay.threads = sa.threads;
                if (!sa.output.empty() && *simp->get_option("-o")) replay.output = sa.output;
                return run_simplify(replay);
            }
            if (sa.input.empty()) throw std::invalid_argument("input mesh path is required");
            if (sa.target_vertices < 1)
                throw std::invalid_argument("--target-vertices must be at least 1");
            return run_simplify(sa);
        }
        if (met->parsed()) return run_metrics(gt_path, simp_path, mcfg, json_path, mthreads);
        if (rvd->parsed())
            return run_rvd(rvd_input, rvd_sites, rvd_n, rvd_init, rvd_seed, rvd_bias,
                           no_thin_fix, rvd_out, rvd_threads);
    } catch (const MeshError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOptimizationError;
    }
    return kOk;
}
