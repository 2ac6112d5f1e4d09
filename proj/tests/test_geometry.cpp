#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "fnet/elements.hpp"
#include "fnet/graph.hpp"
#include "fnet/structure.hpp"
#include "test_oracles.hpp"

using namespace fnet;
using namespace testing_oracles;

TEST_CASE("minimum image wraps across the periodic boundary") {
    Mat3 cell = Mat3::from_rows({10, 0, 0}, {0, 10, 0}, {0, 0, 10});
    const Vec3 d = minimum_image_displacement({9.5, 0, 0}, {0.5, 0, 0}, cell, {true, true, false});
    CHECK(d.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.y == doctest::Approx(0.0));
    CHECK(d.z == doctest::Approx(0.0));
}

TEST_CASE("minimum image is the raw difference without pbc") {
    Mat3 cell;
    const Vec3 d = minimum_image_displacement({1, 2, 3}, {1, 2, 3}, cell, {false, false, false});
    CHECK(d.x == 0.0);
    CHECK(d.y == 0.0);
    CHECK(d.z == 0.0);
}

TEST_CASE("minimum image equals brute-force enumeration on triclinic cells") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat3 cell = random_cell(rng, 6.0 + 4.0 * uni(rng));
        const std::array<bool, 3> pbc = {true, true, trial % 2 == 0};
        const Vec3 a = Vec3{uni(rng), uni(rng), uni(rng)} * cell;
        const Vec3 b = Vec3{uni(rng), uni(rng), uni(rng)} * cell;

        Vec3 best = b - a;
        double best_r2 = best.norm2();
        for (int m0 = -2; m0 <= 2; ++m0)
            for (int m1 = -2; m1 <= 2; ++m1)
                for (int m2 = -2; m2 <= 2; ++m2) {
                    if (!pbc[2] && m2 != 0) continue;
                    const Vec3 shift = cell.row(0) * double(m0) + cell.row(1) * double(m1) +
                                       cell.row(2) * double(m2);
                    const Vec3 d = (b - a) - shift;
                    if (d.norm2() < best_r2) {
                        best_r2 = d.norm2();
                        best = d;
                    }
                }

        const Vec3 got = minimum_image_displacement(a, b, cell, pbc);
        CHECK(got.norm() == doctest::Approx(best.norm()).epsilon(1e-12));
        CHECK((got - best).norm() < 1e-9);
    }
}

TEST_CASE("minimum image rejects singular cells under pbc") {
    Mat3 cell = Mat3::zero();
    CHECK_THROWS_AS(minimum_image_displacement({0, 0, 0}, {1, 0, 0}, cell, {true, false, false}),
                    std::invalid_argument);
}

TEST_CASE("two isolated atoms give two directed edges") {
    AtomicStructure s;
    s.pbc = {false, false, false};
    s.atomic_numbers = {1, 1};
    s.positions = {{0, 0, 0}, {3, 0, 0}};
    s.fixed_mask = {0, 0};
    const RadiusGraph g = build_radius_graph(s, 6.0);
    CHECK(g.edges.size() == 2);
    CHECK(g.neighbor_counts[0] == 1);
    CHECK(g.neighbor_counts[1] == 1);
    CHECK(g.edges[0].dst == 0);
    CHECK(g.edges[1].dst == 1);
}

TEST_CASE("single atom in a small periodic cell sees its own images") {
    AtomicStructure s;
    s.pbc = {true, true, false};
    s.cell = Mat3::from_rows({4, 0, 0}, {0, 4, 0}, {0, 0, 20});
    s.atomic_numbers = {29};
    s.positions = {{1.0, 1.0, 5.0}};
    s.fixed_mask = {0};
    const RadiusGraph g = build_radius_graph(s, 6.0);

    const auto brute = brute_force_edges(s, 6.0);
    CHECK(g.edges.size() == brute.size());
    CHECK(g.edges.size() == 8);  // 4 at distance 4, 4 at 4*sqrt(2)
    for (const Edge& e : g.edges) {
        CHECK(e.src == 0);
        CHECK(e.dst == 0);
        CHECK(e.disp.norm() > 0.0);
        CHECK(e.disp.norm() <= 6.0);
    }
}

TEST_CASE("cell-list graph equals brute force on random structures") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 64);
        const std::array<bool, 3> pbc = {true, trial % 3 != 0, trial % 2 == 0};
        AtomicStructure s = random_structure(rng, n, 8.0 + (trial % 7), pbc);
        const double cutoff = 3.0 + 0.5 * (trial % 8);

        const RadiusGraph g = build_radius_graph(s, cutoff);
        const auto brute = brute_force_edges(s, cutoff);

        REQUIRE(g.edges.size() == brute.size());
        for (std::size_t i = 0; i < brute.size(); ++i) {
            CHECK(g.edges[i].src == brute[i].src);
            CHECK(g.edges[i].dst == brute[i].dst);
            CHECK(g.edges[i].image == brute[i].image);
            CHECK(g.edges[i].disp.x == brute[i].disp.x);
            CHECK(g.edges[i].disp.y == brute[i].disp.y);
            CHECK(g.edges[i].disp.z == brute[i].disp.z);
        }
    }
}

TEST_CASE("graph construction rejects bad input") {
    AtomicStructure s;
    s.pbc = {false, false, false};
    s.atomic_numbers = {1};
    s.positions = {{0, 0, 0}};
    s.fixed_mask = {0};
    CHECK_THROWS_AS(build_radius_graph(s, 0.0), std::invalid_argument);
    s.positions[0].x = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(build_radius_graph(s, 6.0), std::invalid_argument);
}

TEST_CASE("graph displacement multiset is invariant under rigid translation") {
    std::mt19937_64 rng(11);
    AtomicStructure s = random_structure(rng, 24, 9.0);
    const RadiusGraph g0 = build_radius_graph(s, 5.0);

    AtomicStructure t = s;
    const Vec3 shift{3.7, -11.2, 0.9};
    for (auto& p : t.positions) p += shift;
    const RadiusGraph g1 = build_radius_graph(t, 5.0);

    REQUIRE(g0.edges.size() == g1.edges.size());
    auto key = [](const Edge& e) {
        return std::tuple(e.dst, e.src, e.disp.x, e.disp.y, e.disp.z);
    };
    std::vector<std::tuple<int, int, double, double, double>> k0, k1;
    for (const auto& e : g0.edges) k0.push_back(key(e));
    for (const auto& e : g1.edges) k1.push_back(key(e));
    std::sort(k0.begin(), k0.end());
    std::sort(k1.begin(), k1.end());
    for (std::size_t i = 0; i < k0.size(); ++i) {
        CHECK(std::get<0>(k0[i]) == std::get<0>(k1[i]));
        CHECK(std::get<1>(k0[i]) == std::get<1>(k1[i]));
        CHECK(std::get<2>(k0[i]) == doctest::Approx(std::get<2>(k1[i])).epsilon(1e-9));
        CHECK(std::get<3>(k0[i]) == doctest::Approx(std::get<3>(k1[i])).epsilon(1e-9));
        CHECK(std::get<4>(k0[i]) == doctest::Approx(std::get<4>(k1[i])).epsilon(1e-9));
    }
}

TEST_CASE("graph displacements rotate with the structure") {
    std::mt19937_64 rng(13);
    AtomicStructure s = random_structure(rng, 20, 9.0);
    const RadiusGraph g0 = build_radius_graph(s, 5.0);

    const double angle = 0.83;
    AtomicStructure r = rotate_structure(s, angle, {0, 0, 1});
    const RadiusGraph g1 = build_radius_graph(r, 5.0);
    REQUIRE(g0.edges.size() == g1.edges.size());

    const Mat3 rot = rotation_about_z(angle);
    for (std::size_t i = 0; i < g0.edges.size(); ++i) {
        CHECK(g0.edges[i].src == g1.edges[i].src);
        CHECK(g0.edges[i].dst == g1.edges[i].dst);
        const Vec3 expect = rotate(rot, g0.edges[i].disp);
        CHECK((expect - g1.edges[i].disp).norm() < 1e-9);
    }
}

TEST_CASE("edge features match the direct arithmetic") {
    // |d| = 2 along x, radii 0.5/0.5, cutoff 6
    RadiusGraph g;
    g.cutoff = 6.0;
    g.edges.push_back({0, 1, {2, 0, 0}, {0, 0, 0}});
    RadiiTable radii;
    radii.set_radius(1, 0.5);
    const auto f = compute_edge_features(g, {1, 1}, radii, 6.0);
    REQUIRE(f.size() == 1);
    CHECK(f[0][0] == doctest::Approx(1.0));
    CHECK(f[0][1] == doctest::Approx(0.0));
    CHECK(f[0][2] == doctest::Approx(0.0));
    CHECK(f[0][3] == doctest::Approx(2.0 / 6.0));
    CHECK(f[0][4] == doctest::Approx(0.25));
    CHECK(f[0][5] == doctest::Approx(0.25));
    CHECK(f[0][6] == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("edge feature boundary and hydrogen-pair values") {
    RadiusGraph g;
    g.cutoff = 6.0;
    g.edges.push_back({0, 1, {6.0, 0, 0}, {0, 0, 0}});   // exactly at the cutoff
    g.edges.push_back({0, 1, {0, 1.0, 0}, {0, 0, 0}});   // H pair at 1 A
    const auto f = compute_edge_features(g, {1, 1}, default_radii(), 6.0);
    CHECK(f[0][3] == 1.0);
    // Slater radius of H is 0.25 A
    CHECK(f[1][3] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(f[1][4] == doctest::Approx(0.75 / 6.0).epsilon(1e-12));
    CHECK(f[1][5] == doctest::Approx(0.75 / 6.0).epsilon(1e-12));
    CHECK(f[1][6] == doctest::Approx(0.5 / 6.0).epsilon(1e-12));

    RadiusGraph bad;
    bad.cutoff = 6.0;
    bad.edges.push_back({0, 1, {0, 0, 0}, {0, 0, 0}});
    CHECK_THROWS_AS(compute_edge_features(bad, {1, 1}, default_radii(), 6.0), std::domain_error);
}

TEST_CASE("norm of edge directions is 1") {
    std::mt19937_64 rng(3);
    AtomicStructure s = random_structure(rng, 30, 10.0);
    const RadiusGraph g = build_radius_graph(s, 5.5);
    const auto feats = compute_edge_features(g, s.atomic_numbers, default_radii(), 5.5);
    for (const auto& f : feats) {
        const double n = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
        CHECK(std::abs(n - 1.0) < 1e-12);
        CHECK(f[3] > 0.0);
        CHECK(f[3] <= 1.0);
    }
}

TEST_CASE("rotate_structure identities") {
    std::mt19937_64 rng(5);
    AtomicStructure s = random_structure(rng, 10, 8.0);
    s.forces = std::vector<Vec3>(10, Vec3{0.5, -0.25, 1.0});

    const AtomicStructure same = rotate_structure(s, 0.0, {0, 0, 1});
    for (int i = 0; i < 10; ++i) {
        CHECK(same.positions[i] == s.positions[i]);
        CHECK((*same.forces)[i] == (*s.forces)[i]);
    }

    const AtomicStructure full = rotate_structure(s, 2.0 * M_PI, {0, 0, 1});
    for (int i = 0; i < 10; ++i) CHECK((full.positions[i] - s.positions[i]).norm() < 1e-12);

    AtomicStructure unit;
    unit.pbc = {false, false, false};
    unit.atomic_numbers = {1};
    unit.positions = {{1, 0, 0}};
    unit.fixed_mask = {0};
    const AtomicStructure quarter = rotate_structure(unit, M_PI / 2.0, {0, 0, 1});
    CHECK(quarter.positions[0].x == doctest::Approx(0.0));
    CHECK(quarter.positions[0].y == doctest::Approx(1.0));
}

TEST_CASE("slab-like densities give tens of neighbors at 6 A cutoff") {
    // fcc(100)-ish copper block
    AtomicStructure s;
    s.pbc = {true, true, false};
    const double d = 2.55;
    s.cell = Mat3::from_rows({4 * d, 0, 0}, {0, 4 * d, 0}, {0, 0, 30});
    for (int lz = 0; lz < 3; ++lz)
        for (int ix = 0; ix < 4; ++ix)
            for (int iy = 0; iy < 4; ++iy) {
                s.atomic_numbers.push_back(29);
                s.positions.push_back(
                    {ix * d + (lz % 2) * d / 2, iy * d + (lz % 2) * d / 2, 5.0 + lz * d / 1.414});
                s.fixed_mask.push_back(0);
            }
    const RadiusGraph g = build_radius_graph(s, 6.0);
    double mean = 0.0;
    for (int c : g.neighbor_counts) mean += c;
    mean /= s.size();
    CHECK(mean > 10.0);
    CHECK(mean < 100.0);
}

TEST_CASE("slater radii table") {
    CHECK(default_radii().radius(1) == 0.25);
    CHECK(default_radii().radius(29) == 1.35);
    CHECK(default_radii().has_tabulated(2) == false);
    CHECK(default_radii().radius(2) == 1.0);  // fallback, warns once
    CHECK(element_from_symbol("Cu") == 29);
    CHECK(element_symbol(29) == "Cu");
}
