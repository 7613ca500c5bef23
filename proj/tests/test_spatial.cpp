#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace voromesh;

TEST_CASE("PointIndex nearest") {
    SECTION("two points") {
        PointIndex idx({{0, 0, 0}, {1, 0, 0}});
        auto [i, d] = idx.nearest({0.4, 0, 0});
        REQUIRE(i == 0);
        REQUIRE(d == Catch::Approx(0.4));
    }
    SECTION("query at a stored point") {
        PointIndex idx({{0, 0, 0}, {1, 2, 3}});
        auto [i, d] = idx.nearest({1, 2, 3});
        REQUIRE(i == 1);
        REQUIRE(d == 0.0);
    }
    SECTION("matches linear scan on 1000 random points") {
        auto r = testutil::rng(42);
        std::vector<Vec3> pts;
        for (int i = 0; i < 1000; ++i) pts.push_back(testutil::random_point(r));
        PointIndex idx(pts);
        for (int q = 0; q < 100; ++q) {
            Vec3 p = testutil::random_point(r);
            auto [i, d] = idx.nearest(p);
            auto [bi, bd] = testutil::brute_nearest(pts, p);
            REQUIRE(i == bi);
            REQUIRE(d == bd);
        }
    }
    SECTION("ties break to the lowest index") {
        PointIndex idx({{2, 0, 0}, {-1, 0, 0}, {1, 0, 0}, {-1, 0, 0}});
        auto [i, d] = idx.nearest({0, 0, 0});
        REQUIRE(i == 1);  // -1 and +1 tie; lowest index among equals
        REQUIRE(d == 1.0);
        auto [j, dj] = idx.nearest({-1, 0, 0});
        REQUIRE(j == 1);  // duplicate points, lowest index
        REQUIRE(dj == 0.0);
    }
    SECTION("empty set is rejected") {
        REQUIRE_THROWS(PointIndex(std::vector<Vec3>{}));
    }
    SECTION("radius query is sorted and complete") {
        auto r = testutil::rng(3);
        std::vector<Vec3> pts;
        for (int i = 0; i < 300; ++i) pts.push_back(testutil::random_point(r));
        PointIndex idx(pts);
        Vec3 q = {0.1, -0.2, 0.3};
        double rad = 0.8;
        auto hits = idx.radius_query(q, rad);
        std::set<int> got(hits.begin(), hits.end());
        for (size_t i = 0; i < pts.size(); ++i)
            REQUIRE(got.count(static_cast<int>(i)) == ((pts[i] - q).norm() <= rad ? 1u : 0u));
        for (size_t k = 1; k < hits.size(); ++k)
            REQUIRE((pts[hits[k - 1]] - q).squaredNorm() <= (pts[hits[k]] - q).squaredNorm());
    }
}

TEST_CASE("SurfaceIndex closest point") {
    TriangleMesh cube = testutil::make_cube(4);
    SurfaceIndex surf(cube);

    SECTION("point above a face projects straight down") {
        Vec3 q{0.31, 0.47, 1.8};
        auto [p, f] = surf.closest_point(q);
        REQUIRE(p.x == Catch::Approx(0.31));
        REQUIRE(p.y == Catch::Approx(0.47));
        REQUIRE(p.z == Catch::Approx(1.0));
        REQUIRE(f >= 0);
    }
    SECTION("point on the surface maps to itself") {
        Vec3 q{0.5, 0.25, 0.0};
        auto [p, f] = surf.closest_point(q);
        REQUIRE((p - q).norm() < 1e-12);
        (void)f;
    }
    SECTION("point beyond an edge lands on the edge") {
        Vec3 q{1.5, 0.5, 1.5};
        auto [p, f] = surf.closest_point(q);
        REQUIRE(p.x == Catch::Approx(1.0));
        REQUIRE(p.z == Catch::Approx(1.0));
        REQUIRE(p.y == Catch::Approx(0.5));
        (void)f;
    }
    SECTION("agrees with a dense barycentric grid oracle and beats vertices") {
        TriangleMesh bump = testutil::make_bumpy_sphere(2);
        SurfaceIndex surf2(bump);
        auto r = testutil::rng(11);
        for (int k = 0; k < 40; ++k) {
            Vec3 q = testutil::random_point(r, -1.6, 1.6);
            auto [p, f] = surf2.closest_point(q);
            double d = (p - q).norm();
            REQUIRE(f >= 0);
            // On the face it claims.
            const Face& t = bump.faces[f];
            Vec3 cp = closest_point_on_triangle(q, bump.vertices[t[0]], bump.vertices[t[1]],
                                                bump.vertices[t[2]]);
            REQUIRE((cp - p).norm() < 1e-12);
            // No mesh vertex is closer.
            for (const Vec3& v : bump.vertices) REQUIRE(d <= (v - q).norm() + 1e-9);
            // A dense grid over every face never beats it by more than grid error.
            double grid_best = std::numeric_limits<double>::max();
            const int g = 12;
            for (const Face& face : bump.faces)
                for (int i = 0; i <= g; ++i)
                    for (int j = 0; j + i <= g; ++j) {
                        double a = static_cast<double>(i) / g, b = static_cast<double>(j) / g;
                        Vec3 x = bump.vertices[face[0]] * (1 - a - b) + bump.vertices[face[1]] * a +
                                 bump.vertices[face[2]] * b;
                        grid_best = std::min(grid_best, (x - q).norm());
                    }
            REQUIRE(d <= grid_best + 1e-9);
        }
    }
}

TEST_CASE("sample_surface") {
    TriangleMesh cube = testutil::make_cube(2);
    SECTION("per-face counts follow the area distribution") {
        const int n = 100000;
        auto samples = sample_surface(cube, n, 9);
        REQUIRE(static_cast<int>(samples.size()) == n);
        std::vector<int> per_face(cube.faces.size(), 0);
        for (const auto& s : samples) {
            REQUIRE(s.face >= 0);
            ++per_face[s.face];
        }
        for (size_t f = 0; f < cube.faces.size(); ++f) {
            double p = cube.face_areas[f] / cube.total_area;
            double mean = n * p, sigma = std::sqrt(n * p * (1 - p));
            REQUIRE(std::fabs(per_face[f] - mean) <= 5.0 * sigma);
        }
    }
    SECTION("single sample lands on a face") {
        auto s = sample_surface(cube, 1, 123);
        REQUIRE(s.size() == 1);
        SurfaceIndex surf(cube);
        REQUIRE((surf.closest_point(s[0].point).first - s[0].point).norm() < 1e-12);
    }
    SECTION("same seed reproduces bit-identical output") {
        auto a = sample_surface(cube, 5000, 77);
        auto b = sample_surface(cube, 5000, 77);
        for (size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].point == b[i].point);
            REQUIRE(a[i].face == b[i].face);
        }
    }
}
