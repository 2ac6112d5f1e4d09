#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fnet/model.hpp"
#include "model_reference.hpp"
#include "test_oracles.hpp"

using namespace fnet;
using testing_oracles::random_structure;

namespace {

ModelConfig small_config(BasisKind kind = BasisKind::Spherical,
                         Ablation ablation = Ablation::None) {
    ModelConfig cfg;
    cfg.hidden_dim = 16;
    cfg.num_layers = 2;
    cfg.basis.kind = kind;
    cfg.basis.J = 8;
    cfg.basis.linact_dim = 20;
    cfg.ablation = ablation;
    return cfg;
}

AtomicStructure slab_like(std::mt19937_64& rng, int n = 12) {
    AtomicStructure s = random_structure(rng, n, 8.5);
    for (int i = 0; i < n / 4; ++i) s.fixed_mask[i] = 1;
    return s;
}

double max_force_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
    return m;
}

}  // namespace

TEST_CASE("forward output has one 3-vector per atom") {
    std::mt19937_64 rng(1);
    AtomicStructure s = slab_like(rng);
    Model model(small_config(), 7);
    const auto f = model.predict(s, default_radii());
    CHECK(f.size() == static_cast<std::size_t>(s.size()));
}

TEST_CASE("default-size model lands at the expected parameter count") {
    ModelConfig cfg;  // spherical basis, D=512, K=5
    Model model(cfg, 1);
    const auto n = model.params().parameter_count();
    CHECK(n > 10'000'000);
    CHECK(n < 12'000'000);
}

TEST_CASE("xavier init is deterministic in the seed") {
    Model a(small_config(), 11), b(small_config(), 11), c(small_config(), 12);
    const auto pa = a.params().parameters();
    const auto pb = b.params().parameters();
    bool all_equal = true, any_diff_c = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i].second.values() != pb[i].second.values()) all_equal = false;
        if (pa[i].second.values() != c.params().parameters()[i].second.values())
            any_diff_c = true;
    }
    CHECK(all_equal);
    CHECK(any_diff_c);
}

TEST_CASE("graph forward equals the dense reference across bases and variants") {
    std::mt19937_64 rng(5);
    const BasisKind kinds[] = {BasisKind::Spherical, BasisKind::Gaussian, BasisKind::Sine,
                               BasisKind::Identity, BasisKind::LinearAct, BasisKind::None};
    for (const auto kind : kinds) {
        AtomicStructure s = slab_like(rng, 10);
        Model model(small_config(kind), 31 + static_cast<int>(kind));
        const auto got = model.predict(s, default_radii());
        const auto expect = model_reference::forward_reference(model, s, default_radii());
        INFO("basis " << to_string(kind));
        CHECK(max_force_diff(got, expect) < 1e-10);
    }

    ModelConfig gns = small_config(BasisKind::None);
    gns.variant = ModelVariant::GNS;
    gns.activation = ActivationKind::ReLU;
    AtomicStructure s = slab_like(rng, 10);
    Model model(gns, 99);
    const auto got = model.predict(s, default_radii());
    const auto expect = model_reference::forward_reference(model, s, default_radii());
    CHECK(max_force_diff(got, expect) < 1e-10);
}

TEST_CASE("every ablation equals the dense reference") {
    std::mt19937_64 rng(6);
    const Ablation ablations[] = {Ablation::OnlyDist,     Ablation::NoAtomicRadii,
                                  Ablation::NoNodeEmb,    Ablation::OnlyFc,
                                  Ablation::EdgeLinearBn, Ablation::NodeLinearBn,
                                  Ablation::NoSelfMessage};
    for (const auto ab : ablations) {
        AtomicStructure s = slab_like(rng, 9);
        Model model(small_config(BasisKind::Spherical, ab), 41 + static_cast<int>(ab));
        const auto got = model.predict(s, default_radii());
        const auto expect = model_reference::forward_reference(model, s, default_radii());
        INFO("ablation " << to_string(ab));
        CHECK(max_force_diff(got, expect) < 1e-10);
    }
}

TEST_CASE("an isolated atom is decoded from its own embedding alone") {
    AtomicStructure one;
    one.pbc = {false, false, false};
    one.atomic_numbers = {29};
    one.positions = {{0, 0, 0}};
    one.fixed_mask = {0};
    Model model(small_config(), 3);
    const auto f1 = model.predict(one, default_radii());

    // same atom plus another far outside the cutoff
    AtomicStructure two = one;
    two.atomic_numbers.push_back(8);
    two.positions.push_back({100.0, 0, 0});
    two.fixed_mask.push_back(0);
    const auto f2 = model.predict(two, default_radii());
    CHECK(f1[0].x == f2[0].x);
    CHECK(f1[0].y == f2[0].y);
    CHECK(f1[0].z == f2[0].z);

    const auto expect = model_reference::forward_reference(model, one, default_radii());
    CHECK((f1[0] - expect[0]).norm() < 1e-12);
}

TEST_CASE("predicted forces are invariant under rigid translation") {
    std::mt19937_64 rng(8);
    Model model(small_config(), 21);
    for (int trial = 0; trial < 5; ++trial) {
        AtomicStructure s = slab_like(rng);
        const auto f0 = model.predict(s, default_radii());
        AtomicStructure t = s;
        const Vec3 shift{12.3 * (trial + 1), -4.56, 1.2};
        for (auto& p : t.positions) p += shift;
        const auto f1 = model.predict(t, default_radii());
        CHECK(max_force_diff(f0, f1) < 1e-10);
    }
}

TEST_CASE("permuting the atoms permutes the forces") {
    std::mt19937_64 rng(9);
    AtomicStructure s = slab_like(rng, 14);
    Model model(small_config(), 22);
    const auto f0 = model.predict(s, default_radii());

    std::vector<int> perm(s.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    AtomicStructure p = s;
    for (int i = 0; i < s.size(); ++i) {
        p.atomic_numbers[perm[i]] = s.atomic_numbers[i];
        p.positions[perm[i]] = s.positions[i];
        p.fixed_mask[perm[i]] = s.fixed_mask[i];
        p.tags[perm[i]] = s.tags[i];
    }
    const auto f1 = model.predict(p, default_radii());
    for (int i = 0; i < s.size(); ++i) CHECK((f1[perm[i]] - f0[i]).norm() < 1e-12);
}

TEST_CASE("replicating the cell along a periodic axis keeps forces") {
    std::mt19937_64 rng(10);
    AtomicStructure s = slab_like(rng, 8);
    Model model(small_config(), 23);
    const auto f0 = model.predict(s, default_radii());

    AtomicStructure dbl = s;
    const Vec3 a = s.cell.row(0);
    dbl.cell = Mat3::from_rows(a * 2.0, s.cell.row(1), s.cell.row(2));
    for (int i = 0; i < s.size(); ++i) {
        dbl.atomic_numbers.push_back(s.atomic_numbers[i]);
        dbl.positions.push_back(s.positions[i] + a);
        dbl.fixed_mask.push_back(s.fixed_mask[i]);
        dbl.tags.push_back(s.tags[i]);
    }
    const auto f1 = model.predict(dbl, default_radii());
    for (int i = 0; i < s.size(); ++i) {
        CHECK((f1[i] - f0[i]).norm() < 1e-8);
        CHECK((f1[i + s.size()] - f0[i]).norm() < 1e-8);
    }
}

TEST_CASE("perturbing an atom beyond every message hop leaves a force unchanged") {
    // two 2-atom clusters far apart; K=2 hops cannot bridge 40 A at cutoff 6
    AtomicStructure s;
    s.pbc = {false, false, false};
    s.atomic_numbers = {29, 8, 29, 8};
    s.positions = {{0, 0, 0}, {2.2, 0, 0}, {40, 0, 0}, {42.2, 0, 0}};
    s.fixed_mask = {0, 0, 0, 0};
    Model model(small_config(), 24);
    const auto f0 = model.predict(s, default_radii());
    AtomicStructure moved = s;
    moved.positions[3] = {41.7, 0.4, -0.3};
    const auto f1 = model.predict(moved, default_radii());
    CHECK(f1[0].x == f0[0].x);
    CHECK(f1[0].y == f0[0].y);
    CHECK(f1[0].z == f0[0].z);
    CHECK(f1[1].x == f0[1].x);
}

TEST_CASE("an edge exactly at the cutoff contributes nothing") {
    AtomicStructure dimer;
    dimer.pbc = {false, false, false};
    dimer.atomic_numbers = {29, 29};
    dimer.positions = {{0, 0, 0}, {6.0, 0, 0}};  // exactly the cutoff
    dimer.fixed_mask = {0, 0};

    AtomicStructure apart = dimer;
    apart.positions[1] = {60.0, 0, 0};  // no edge at all

    Model model(small_config(), 25);
    REQUIRE(build_radius_graph(dimer, 6.0).edges.size() == 2);
    const auto f_dimer = model.predict(dimer, default_radii());
    const auto f_apart = model.predict(apart, default_radii());
    CHECK(f_dimer[0].x == f_apart[0].x);
    CHECK(f_dimer[0].y == f_apart[0].y);
    CHECK(f_dimer[1].z == f_apart[1].z);
}

TEST_CASE("distance-only ablation is z-rotation invariant, the full model is not") {
    std::mt19937_64 rng(12);
    AtomicStructure s = slab_like(rng, 10);

    Model invariant(small_config(BasisKind::Spherical, Ablation::OnlyDist), 26);
    const auto f0 = invariant.predict(s, default_radii());
    const AtomicStructure r = rotate_structure(s, 1.1, {0, 0, 1});
    const auto f1 = invariant.predict(r, default_radii());
    CHECK(max_force_diff(f0, f1) < 1e-8);  // predictions do not rotate: invariant

    Model full(small_config(), 26);
    const auto g0 = full.predict(s, default_radii());
    const auto g1 = full.predict(r, default_radii());
    CHECK(max_force_diff(g0, g1) > 1e-6);  // direction features break invariance
}

TEST_CASE("batched prediction matches per-structure prediction") {
    std::mt19937_64 rng(13);
    std::vector<AtomicStructure> structures = {slab_like(rng, 7), slab_like(rng, 11)};
    Model model(small_config(), 27);
    const GraphBatch batch = make_batch(structures, model.config(), default_radii());
    ad::Tensor out = model.forward(nullptr, batch, /*training=*/false);

    int row = 0;
    for (const auto& s : structures) {
        const auto single = model.predict(s, default_radii());
        for (int i = 0; i < s.size(); ++i, ++row) {
            CHECK(std::abs(out.data()[row * 3 + 0] - single[i].x) < 1e-12);
            CHECK(std::abs(out.data()[row * 3 + 1] - single[i].y) < 1e-12);
            CHECK(std::abs(out.data()[row * 3 + 2] - single[i].z) < 1e-12);
        }
    }
}

TEST_CASE("only_dist swaps the spherical basis for sine over four features") {
    ModelConfig cfg = small_config(BasisKind::Spherical, Ablation::OnlyDist);
    CHECK(cfg.edge_feature_dim() == 4);
    CHECK(cfg.direction_components() == 0);
    CHECK(cfg.effective_basis().kind == BasisKind::Sine);
    CHECK(basis_output_dim(cfg.effective_basis(), 4) == 4 * cfg.basis.J);
}

TEST_CASE("model config validation rejects nonsense") {
    ModelConfig cfg = small_config();
    cfg.hidden_dim = 0;
    CHECK_THROWS_AS(Model(cfg, 1), std::invalid_argument);
    cfg = small_config();
    cfg.basis.J = 1;
    CHECK_THROWS_AS(Model(cfg, 1), std::invalid_argument);
}
