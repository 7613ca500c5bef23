#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace voromesh;

TEST_CASE("decay schedule") {
    REQUIRE(decay_schedule(1.0, 0.95, 0) == 1.0);
    REQUIRE(decay_schedule(1.0, 1.0, 123) == 1.0);
    double after50 = decay_schedule(1.0, 0.95, 50);
    REQUIRE(after50 >= 0.0769);
    REQUIRE(after50 <= 0.0770);
}

TEST_CASE("L-BFGS solver") {
    SECTION("minimizes the Rosenbrock function") {
        LbfgsSolver solver;
        LbfgsSolver::Objective f = [](const std::vector<double>& x, std::vector<double>& g) {
            double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
            g = {-2.0 * a - 400.0 * x[0] * b, 200.0 * b};
            return a * a + 100.0 * b * b;
        };
        std::vector<double> x{-1.2, 1.0}, g;
        double fx = f(x, g);
        for (int it = 0; it < 200 && fx > 1e-12; ++it) {
            auto st = solver.step(f, x, fx, g);
            REQUIRE_FALSE(st.line_search_failed);
            fx = f(x, g);
        }
        REQUIRE(fx < 1e-12);
        REQUIRE(x[0] == Catch::Approx(1.0).margin(1e-5));
    }
    SECTION("reports failure on an unbounded descent") {
        LbfgsSolver solver;
        LbfgsSolver::Objective f = [](const std::vector<double>& x, std::vector<double>& g) {
            g = {-1.0};
            return -x[0];
        };
        std::vector<double> x{0.0}, g{-1.0};
        auto st = solver.step(f, x, 0.0, g);
        REQUIRE(st.line_search_failed);
        REQUIRE(x[0] == 0.0);
    }
}

TEST_CASE("initialize_sites") {
    TriangleMesh cube = testutil::make_cube(4);
    SurfaceIndex surf(cube);
    SECTION("single site") {
        SiteSet s = initialize_sites(cube, surf, 1, InitStrategy::Random, 5);
        REQUIRE(s.size() == 1);
    }
    SECTION("poisson-disk spacing bound") {
        std::vector<std::string> log;
        SiteSet s = initialize_sites(cube, surf, 500, InitStrategy::PoissonDisk, 11, {}, &log);
        REQUIRE(s.size() == 500);
        int relaxations = 0;
        for (const auto& line : log)
            if (line.find("relaxed") != std::string::npos) ++relaxations;
        double radius = 0.7 * std::sqrt(cube.total_area / 500.0) * std::pow(0.9, relaxations);
        double min_d = std::numeric_limits<double>::max();
        for (size_t i = 0; i < s.size(); ++i)
            for (size_t j = i + 1; j < s.size(); ++j)
                min_d = std::min(min_d, (s.positions[i] - s.positions[j]).norm());
        REQUIRE(min_d >= radius - 1e-12);
    }
    SECTION("custom points are projected onto the surface") {
        std::vector<Vec3> raw = {{0.5, 0.5, 2.0}, {-1.0, 0.5, 0.5}};
        SiteSet s = initialize_sites(cube, surf, 2, InitStrategy::Custom, 0, raw);
        REQUIRE((s.positions[0] - Vec3{0.5, 0.5, 1.0}).norm() < 1e-12);
        REQUIRE((s.positions[1] - Vec3{0.0, 0.5, 0.5}).norm() < 1e-12);
    }
    SECTION("deterministic per seed") {
        SiteSet a = initialize_sites(cube, surf, 100, InitStrategy::PoissonDisk, 21);
        SiteSet b = initialize_sites(cube, surf, 100, InitStrategy::PoissonDisk, 21);
        for (size_t i = 0; i < a.size(); ++i) REQUIRE(a.positions[i] == b.positions[i]);
    }
}

TEST_CASE("pure CVT descent on a flat square never increases the energy") {
    TriangleMesh square = testutil::make_square(10);
    SurfaceIndex surf(square);
    SiteSet init = initialize_sites(square, surf, 50, InitStrategy::PoissonDisk, 3);
    OptimizerConfig cfg;
    cfg.lambda_na0 = 0.0;
    cfg.lambda_cvt0 = 1.0;
    cfg.tau = 1.0;  // no decay
    cfg.max_iters = 30;
    KernelConfig kernel;
    kernel.lambda_na = 0.0;
    SimplifyResult res = simplify(square, cfg, kernel, init);
    REQUIRE(res.trace.records.size() >= 2);
    for (size_t k = 1; k < res.trace.records.size(); ++k) {
        REQUIRE(res.trace.records[k].e_cvt <=
                res.trace.records[k - 1].e_cvt * (1.0 + 1e-9) + 1e-15);
        REQUIRE(res.trace.records[k].lambda_cvt == 1.0);
    }
}

TEST_CASE("simplify keeps sites on the surface and obeys the trace laws") {
    TriangleMesh cube0 = testutil::make_cube(6);
    auto [cube, transform] = normalize_area(cube0);
    SurfaceIndex surf(cube);
    SiteSet init = initialize_sites(cube, surf, 40, InitStrategy::PoissonDisk, 7);
    OptimizerConfig cfg;
    cfg.max_iters = 12;
    KernelConfig kernel;
    SimplifyResult res = simplify(cube, cfg, kernel, init);

    SECTION("sites on surface within 1e-7") {
        for (const Vec3& p : res.sites.positions) {
            auto [q, f] = surf.closest_point(p);
            REQUIRE((p - q).norm() < 1e-7);
            (void)f;
        }
    }
    SECTION("lambda decays by tau each iteration") {
        const auto& rec = res.trace.records;
        for (size_t k = 1; k < rec.size(); ++k)
            REQUIRE(rec[k].lambda_cvt ==
                    Catch::Approx(rec[k - 1].lambda_cvt * cfg.tau).epsilon(1e-12));
    }
    SECTION("energies and gradients recorded, e_total composed") {
        for (const auto& r : res.trace.records) {
            REQUIRE(r.e_na >= 0.0);
            REQUIRE(r.e_cvt >= 0.0);
            REQUIRE(r.e_total ==
                    Catch::Approx(cfg.lambda_na0 * r.e_na + r.lambda_cvt * r.e_cvt).epsilon(1e-12));
        }
    }
    SECTION("no empty cells at termination") {
        REQUIRE(res.decomposition.empty_sites.empty());
    }
    SECTION("deterministic end to end") {
        SimplifyResult res2 = simplify(cube, cfg, kernel, init);
        REQUIRE(res2.sites.positions.size() == res.sites.positions.size());
        for (size_t i = 0; i < res.sites.positions.size(); ++i)
            REQUIRE(res.sites.positions[i] == res2.sites.positions[i]);
    }
}

TEST_CASE("termination reasons") {
    SECTION("cvt-rise run satisfies the trace inequality") {
        // With the NA term dominant and decaying CVT weight on a cube, the
        // raw CVT energy eventually rises.
        TriangleMesh cube0 = testutil::make_cube(6);
        auto [cube, transform] = normalize_area(cube0);
        SurfaceIndex surf(cube);
        SiteSet init = initialize_sites(cube, surf, 30, InitStrategy::PoissonDisk, 13);
        OptimizerConfig cfg;
        cfg.max_iters = 100;
        KernelConfig kernel;
        SimplifyResult res = simplify(cube, cfg, kernel, init);
        const auto& rec = res.trace.records;
        if (res.trace.stop_reason == StopReason::CvtRise) {
            double run_min = std::numeric_limits<double>::max();
            for (size_t k = 0; k + 1 < rec.size(); ++k)
                run_min = std::min(run_min, rec[k].e_cvt);
            REQUIRE(rec.back().e_cvt >= cfg.mu * run_min);
        }
        // Exactly one stop reason exists by construction; it must be one of
        // the four and the trace must be non-empty.
        REQUIRE(rec.size() >= 1);
    }
    SECTION("max-iters reached on a pure CVT run") {
        TriangleMesh square = testutil::make_square(6);
        SurfaceIndex surf(square);
        SiteSet init = initialize_sites(square, surf, 10, InitStrategy::Random, 2);
        OptimizerConfig cfg;
        cfg.lambda_na0 = 0.0;
        cfg.tau = 1.0;
        cfg.max_iters = 5;
        KernelConfig kernel;
        kernel.lambda_na = 0.0;
        SimplifyResult res = simplify(square, cfg, kernel, init);
        REQUIRE((res.trace.stop_reason == StopReason::MaxIters ||
                 res.trace.stop_reason == StopReason::GradTol));
        REQUIRE(res.trace.records.back().iter <= 5);
    }
}

TEST_CASE("coincident initial sites are re-seeded until none are empty") {
    TriangleMesh square = testutil::make_square(8);
    SurfaceIndex surf(square);
    std::vector<Vec3> same(5, Vec3{0.5, 0.5, 0});
    SiteSet init = initialize_sites(square, surf, 5, InitStrategy::Custom, 0, same);
    OptimizerConfig cfg;
    cfg.lambda_na0 = 0.0;
    cfg.tau = 1.0;
    cfg.max_iters = 10;
    KernelConfig kernel;
    kernel.lambda_na = 0.0;
    SimplifyResult res = simplify(square, cfg, kernel, init);
    REQUIRE(res.decomposition.empty_sites.empty());
    bool reseeded = false;
    for (const auto& line : res.trace.log)
        if (line.find("re-seeded") != std::string::npos) reseeded = true;
    REQUIRE(reseeded);
}

TEST_CASE("trace CSV export") {
    TriangleMesh square = testutil::make_square(6);
    SurfaceIndex surf(square);
    SiteSet init = initialize_sites(square, surf, 8, InitStrategy::Random, 6);
    OptimizerConfig cfg;
    cfg.max_iters = 3;
    KernelConfig kernel;
    SimplifyResult res = simplify(square, cfg, kernel, init);
    std::string path = (std::filesystem::temp_directory_path() / "vm_trace.csv").string();
    res.trace.write_csv(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "iter,lambda_cvt,e_na,e_cvt,grad_norm,stop_reason");
    int rows = 0;
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) {
            ++rows;
            last = line;
        }
    REQUIRE(rows == static_cast<int>(res.trace.records.size()));
    REQUIRE(last.find(stop_reason_string(res.trace.stop_reason)) != std::string::npos);
}
