#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fnet/basis.hpp"
#include "fnet/vec3.hpp"
#include "test_oracles.hpp"

using namespace fnet;

TEST_CASE("gaussian basis peaks and widths") {
    const int J = 50;
    std::vector<double> out(J);
    for (int j = 0; j < J; j += 7) {
        const double mu = j / (J - 1.0);
        gaussian_basis(mu, J, out.data());
        CHECK(out[j] == doctest::Approx(1.0).epsilon(1e-14));
        gaussian_basis(mu + 1.0 / (J - 1.0), J, out.data());
        CHECK(out[j] == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    }
}

TEST_CASE("gaussian basis matches direct scalar evaluation") {
    const int J = 50;
    std::vector<double> out(J);
    gaussian_basis(0.5, J, out.data());
    for (int j = 0; j < J; ++j) {
        const double mu = static_cast<double>(j) / (J - 1);
        const double sigma = 1.0 / (J - 1);
        const double expect = std::exp(-(0.5 - mu) * (0.5 - mu) / (2.0 * sigma * sigma));
        CHECK(std::abs(out[j] - expect) < 1e-14);
    }
}

TEST_CASE("gaussian components stay in (0,1] and the argmax tracks x") {
    const int J = 20;
    std::vector<double> out(J);
    int prev_argmax = -1;
    for (double x = 0.0; x <= 1.0; x += 0.01) {
        gaussian_basis(x, J, out.data());
        int argmax = 0;
        for (int j = 0; j < J; ++j) {
            CHECK(out[j] > 0.0);
            CHECK(out[j] <= 1.0);
            if (out[j] > out[argmax]) argmax = j;
        }
        CHECK(argmax >= prev_argmax);
        prev_argmax = argmax;
    }
    CHECK(prev_argmax == J - 1);
}

TEST_CASE("sine basis values") {
    const int J = 16;
    std::vector<double> out(J);
    sine_basis(0.0, J, out.data());
    for (int j = 0; j < J; ++j) CHECK(out[j] == 0.0);

    sine_basis(M_PI / 2.0, J, out.data());
    CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-14));

    sine_basis(0.5, J, out.data());
    CHECK(out[10] == doctest::Approx(std::sin(std::pow(1.1, 10) * 0.5)).epsilon(1e-14));
    CHECK(out[10] == doctest::Approx(0.96272).epsilon(1e-4));
}

TEST_CASE("low-degree spherical harmonics take their known values") {
    CHECK(real_spherical_harmonic(0, 0, 0.3, -1.2) ==
          doctest::Approx(0.28209479177387814).epsilon(1e-14));
    CHECK(real_spherical_harmonic(0, 0, 2.9, 0.4) ==
          doctest::Approx(0.28209479177387814).epsilon(1e-14));
    CHECK(real_spherical_harmonic(1, 0, 0.0, 0.0) ==
          doctest::Approx(std::sqrt(3.0 / (4.0 * M_PI))).epsilon(1e-14));
    CHECK(real_spherical_harmonic(1, 0, 0.0, 0.0) == doctest::Approx(0.488603).epsilon(1e-6));
    CHECK_THROWS_AS(real_spherical_harmonic(1, 2, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(real_spherical_harmonic(-1, 0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("spherical harmonics are orthonormal under quadrature") {
    const int L = 4;  // degrees 0..3, one past the default config
    const int n_theta = 64, n_phi = 160;
    std::vector<double> nodes, weights;
    testing_oracles::gauss_legendre(n_theta, nodes, weights);
    REQUIRE(n_theta * n_phi >= 10000);

    const int count = L * L;
    std::vector<double> gram(count * count, 0.0);
    std::vector<double> y(count);
    for (int it = 0; it < n_theta; ++it) {
        const double theta = std::acos(nodes[it]);
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = -M_PI + (2.0 * M_PI) * (ip + 0.5) / n_phi;
            spherical_harmonics(L, theta, phi, y.data());
            const double w = weights[it] * (2.0 * M_PI / n_phi);
            for (int a = 0; a < count; ++a)
                for (int b = 0; b <= a; ++b) gram[a * count + b] += w * y[a] * y[b];
        }
    }
    for (int a = 0; a < count; ++a)
        for (int b = 0; b <= a; ++b) {
            const double expect = a == b ? 1.0 : 0.0;
            CHECK(std::abs(gram[a * count + b] - expect) < 1e-3);
        }
}

TEST_CASE("spherical harmonics respect parity and phi periodicity") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double theta = uni(rng) * M_PI;
        const double phi = (uni(rng) * 2.0 - 1.0) * M_PI;
        for (int l = 0; l < 4; ++l)
            for (int m = -l; m <= l; ++m) {
                const double v = real_spherical_harmonic(l, m, theta, phi);
                // phi -> phi + 2pi
                CHECK(real_spherical_harmonic(l, m, theta, phi + 2.0 * M_PI) ==
                      doctest::Approx(v).epsilon(1e-9));
                // point inversion: n -> -n is (theta, phi) -> (pi - theta, phi + pi)
                const double inv = real_spherical_harmonic(l, m, M_PI - theta, phi + M_PI);
                CHECK(inv == doctest::Approx((l % 2 == 0 ? 1.0 : -1.0) * v).epsilon(1e-9));
            }
    }
}

TEST_CASE("basis_apply identity and dimensions") {
    const double e[7] = {0.6, -0.8, 0.0, 0.5, 0.4, 0.3, 0.2};
    BasisConfig cfg;

    cfg.kind = BasisKind::Identity;
    auto out = basis_apply(cfg, {e, 7}, 3, {}, ActivationKind::ReLU);
    REQUIRE(out.size() == 7);
    for (int i = 0; i < 7; ++i) CHECK(out[i] == e[i]);
    CHECK(basis_output_dim(cfg, 7) == 7);

    cfg.kind = BasisKind::Gaussian;
    cfg.J = 50;
    CHECK(basis_output_dim(cfg, 7) == 350);
    out = basis_apply(cfg, {e, 7}, 3, {}, ActivationKind::ReLU);
    CHECK(out.size() == 350);

    cfg.kind = BasisKind::Spherical;
    cfg.L = 3;
    cfg.S = 4;
    CHECK(basis_output_dim(cfg, 7) == 36);
}

TEST_CASE("linact basis with identity-padded weights clamps the inputs") {
    const double e[7] = {0.6, -0.8, 0.0, 0.5, -0.4, 0.3, 0.2};
    BasisConfig cfg;
    cfg.kind = BasisKind::LinearAct;
    cfg.linact_dim = 7;
    std::vector<double> W(7 * 7, 0.0), b(7, 0.0);
    for (int i = 0; i < 7; ++i) W[i * 7 + i] = 1.0;
    BasisParams params;
    params.W = W.data();
    params.b = b.data();
    const auto out = basis_apply(cfg, {e, 7}, 3, params, ActivationKind::ReLU);
    for (int i = 0; i < 7; ++i) CHECK(out[i] == std::max(0.0, e[i]));
}

TEST_CASE("spherical basis constant radial channel reduces to the harmonics") {
    const double e[7] = {0.0, 0.0, 1.0, 0.3, 0.2, 0.2, 0.1};  // n = +z pole
    BasisConfig cfg;
    cfg.kind = BasisKind::Spherical;
    cfg.L = 1;
    cfg.S = 1;
    cfg.J = 8;
    std::vector<double> W(1 * 4 * 8, 0.0), b(1, 1.0);
    BasisParams params;
    params.W_rad = W.data();
    params.b_rad = b.data();
    const auto out = basis_apply(cfg, {e, 7}, 3, params, ActivationKind::Swish);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == doctest::Approx(0.282095).epsilon(1e-6));
}

TEST_CASE("spherical basis matches an element-wise recomputation") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    BasisConfig cfg;
    cfg.kind = BasisKind::Spherical;
    cfg.L = 3;
    cfg.S = 4;
    cfg.J = 10;
    const int in_dim = 4 * cfg.J;
    std::vector<double> W(cfg.S * in_dim), b(cfg.S);
    for (auto& w : W) w = uni(rng);
    for (auto& x : b) x = uni(rng);
    BasisParams params;
    params.W_rad = W.data();
    params.b_rad = b.data();

    Vec3 n{uni(rng), uni(rng), uni(rng)};
    n = n.normalized();
    const double e[7] = {n.x, n.y, n.z, 0.41, 0.17, 0.23, -0.05};
    const auto out = basis_apply(cfg, {e, 7}, 3, params, ActivationKind::Swish);
    REQUIRE(out.size() == 36);

    const double theta = std::acos(n.z);
    const double phi = std::atan2(n.y, n.x);
    std::vector<double> sines(in_dim);
    for (int d = 0; d < 4; ++d)
        for (int j = 0; j < cfg.J; ++j)
            sines[d * cfg.J + j] = std::sin(std::pow(1.1, j) * e[3 + d]);
    for (int h = 0; h < 9; ++h) {
        const int l = static_cast<int>(std::sqrt(static_cast<double>(h)));
        const int m = h - l * l - l;
        const double yv = real_spherical_harmonic(l, m, theta, phi);
        for (int s = 0; s < 4; ++s) {
            double r = b[s];
            for (int j = 0; j < in_dim; ++j) r += W[s * in_dim + j] * sines[j];
            CHECK(out[h * 4 + s] == doctest::Approx(yv * r).epsilon(1e-12));
        }
    }
}

TEST_CASE("activation closed-form values") {
    CHECK(activation(ActivationKind::Swish, 0.0) == 0.0);
    CHECK(activation(ActivationKind::Swish, 1.0) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
    CHECK(activation(ActivationKind::Swish, 1.0) == doctest::Approx(0.731059).epsilon(1e-6));
    CHECK(activation(ActivationKind::ShiftedSoftPlus, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(activation(ActivationKind::ReLU, -2.0) == 0.0);
    CHECK(activation(ActivationKind::ReLU, 2.0) == 2.0);
    CHECK(activation(ActivationKind::LeakyReLU, -1.0) == doctest::Approx(-0.01));
    CHECK(activation(ActivationKind::Tanh, 0.5) == doctest::Approx(std::tanh(0.5)));
    CHECK(activation(ActivationKind::SoftPlus, 0.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("activation gradients match finite differences away from kinks") {
    const ActivationKind kinds[] = {ActivationKind::ReLU,     ActivationKind::Swish,
                                    ActivationKind::Tanh,     ActivationKind::LeakyReLU,
                                    ActivationKind::SoftPlus, ActivationKind::ShiftedSoftPlus};
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-4.0, 4.0);
    for (const auto kind : kinds)
        for (int trial = 0; trial < 200; ++trial) {
            double x = uni(rng);
            if (std::abs(x) < 1e-3) x += 0.5;  // keep clear of the ReLU kink
            const double h = 1e-6;
            const double fd = (activation(kind, x + h) - activation(kind, x - h)) / (2.0 * h);
            const double an = activation_grad(kind, x);
            CHECK(std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8}) < 1e-6);
        }
}

TEST_CASE("all basis outputs are finite for finite inputs") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    std::vector<double> W(4 * 350, 0.1), b(350, 0.05);
    for (int trial = 0; trial < 50; ++trial) {
        Vec3 n{uni(rng), uni(rng), uni(rng)};
        if (n.norm() < 1e-6) n = {1, 0, 0};
        n = n.normalized();
        const double e[7] = {n.x, n.y, n.z, uni(rng), uni(rng), uni(rng), uni(rng)};
        for (const auto kind : {BasisKind::Identity, BasisKind::Gaussian, BasisKind::Sine}) {
            BasisConfig cfg;
            cfg.kind = kind;
            cfg.J = 12;
            for (double v : basis_apply(cfg, {e, 7}, 3, {}, ActivationKind::Swish))
                CHECK(std::isfinite(v));
        }
        BasisConfig sph;
        sph.kind = BasisKind::Spherical;
        sph.J = 8;
        std::vector<double> Wr(4 * 4 * 8, 0.2), br(4, -0.1);
        BasisParams p;
        p.W_rad = Wr.data();
        p.b_rad = br.data();
        for (double v : basis_apply(sph, {e, 7}, 3, p, ActivationKind::Swish))
            CHECK(std::isfinite(v));
    }
}

TEST_CASE("edge component normalization bounds and clamping") {
    CHECK(normalize_edge_component(-1.0, true) == 0.0);
    CHECK(normalize_edge_component(1.0, true) == 1.0);
    CHECK(normalize_edge_component(0.0, true) == 0.5);
    CHECK(normalize_edge_component(-0.5, false) == 0.0);
    CHECK(normalize_edge_component(1.0, false) == 1.0);
    CHECK(normalize_edge_component(-0.7, false) == 0.0);  // clamped
    CHECK(normalize_edge_component(1.4, false) == 1.0);   // clamped
}
