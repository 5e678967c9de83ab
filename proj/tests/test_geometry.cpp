#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slabmhd/perturbed.hpp"
#include "test_util.hpp"

using namespace slabmhd;
using slabmhd::testing::random_surface;
using slabmhd::testing::random_vector;

TEST_CASE("poisson_weights: trivial, 2x2 and the sum rule") {
    VectorXd l1(1);
    l1 << 3.7;
    PoissonWeights w0 = poisson_weights(0, l1);
    CHECK(w0.alpha[0] == doctest::Approx(1.0).epsilon(1e-14));

    VectorXd l2(2);
    l2 << two_pi, 2 * two_pi;
    PoissonWeights w1 = poisson_weights(1, l2);
    CHECK(w1.alpha[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(w1.alpha[1] == doctest::Approx(-2.0).epsilon(1e-12));

    PoissonWeights w4 = default_poisson_weights();
    CHECK(w4.alpha.sum() == doctest::Approx(1.0).epsilon(1e-10));
    // known closed form for lambda_j = 2 pi (j+1)
    VectorXd want(5);
    want << 15, -40, 45, -24, 5;
    CHECK((w4.alpha - want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("poisson_weights: bad decay rates are rejected") {
    VectorXd bad(2);
    bad << 2.0, 2.0;
    CHECK_THROWS_AS(poisson_weights(1, bad), ConfigError);
    bad << -1.0, 2.0;
    CHECK_THROWS_AS(poisson_weights(1, bad), ConfigError);
}

TEST_CASE("harmonic_extend: zero and constant interfaces") {
    SlabGrid g(8, 8, 13, 13);
    PoissonWeights w = default_poisson_weights();
    CutoffProfile chi;

    SurfaceField zero(g.torus, Domain::Spectral);
    CHECK(max_abs(harmonic_extend(zero, w, chi, g)) == 0.0);

    SurfaceField c = SurfaceField::constant(g.torus, 2.0);
    VolumeField ext = to_physical(harmonic_extend(c, w, chi, g));
    for (Half h : ext.halves()) {
        const VectorXd& z = ext.basis(h)->points;
        for (int i = 0; i < z.size(); ++i)
            CHECK(ext.block(h)(i, 0).real() == doctest::Approx(2.0 * chi(z[i])).epsilon(1e-12));
    }
}

TEST_CASE("harmonic_extend: cos(2 pi x1) has the e^{2 pi x3} lower kernel") {
    SlabGrid g(16, 8, 17, 17);
    PoissonWeights w = default_poisson_weights();
    SurfaceField eta(g.torus, Domain::Spectral);
    eta.set_coeff(1, 0, 0.5);
    eta.set_coeff(-1, 0, 0.5);  // cos(2 pi x1)
    VolumeField p = poisson_extend(eta, w, g);
    const VectorXd& z = lower_basis(g.nz_lower)->points;
    for (int i = 0; i < z.size(); ++i) {
        CHECK(p.lower()(i, g.torus.index_of(1, 0)).real() ==
              doctest::Approx(0.5 * std::exp(two_pi * z[i])).epsilon(1e-12));
        CHECK(std::abs(p.lower()(i, g.torus.index_of(1, 0)).imag()) < 1e-14);
    }
}

TEST_CASE("extension is C^m across x3 = 0 and breaks at order m+1") {
    SlabGrid g(16, 16, 17, 17);
    PoissonWeights w = default_poisson_weights();
    SurfaceField eta = random_surface(g.torus, 2, 1e-3, 31);
    for (int k = 0; k <= 4; ++k)
        CHECK(extension_derivative_jump(eta, w, k) < 1e-10);
    CHECK(extension_derivative_jump(eta, w, 5) > 1e-6);
}

TEST_CASE("collocation derivatives of the extension agree with the kernels at low order") {
    SlabGrid g(8, 8, 49, 49);
    PoissonWeights w = default_poisson_weights();
    SurfaceField eta = random_surface(g.torus, 1, 1e-2, 77);
    VolumeField p = poisson_extend(eta, w, g);
    for (int k = 1; k <= 2; ++k) {
        VolumeField d = differentiate(p, Axis::X3, k);
        SurfaceField below = trace(d, Boundary::Sigma, Half::Lower);
        SurfaceField above = trace(d, Boundary::Sigma, Half::Upper);
        CHECK(max_abs(below - above) < 1e-8);
    }
}

TEST_CASE("extension bound: || P f ||_s / | f |_{s-1/2} stays bounded") {
    SlabGrid g(16, 16, 25, 25);
    PoissonWeights w = default_poisson_weights();
    Real worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        SurfaceField f = random_surface(g.torus, 4, 1.0, 1000 + trial);
        VolumeField p = poisson_extend(f, w, g);
        for (int s : {1, 2, 3}) {
            Real ratio = sobolev_norm_volume(p, s) / sobolev_norm_surface(f, s - 0.5);
            worst = std::max(worst, ratio);
        }
    }
    MESSAGE("empirical extension constant over 20 fields: ", worst);
    CHECK(worst < 50.0);
    CHECK(std::isfinite(worst));
}

TEST_CASE("eta_bar vanishes identically at x3 = +-1") {
    SlabGrid g(8, 8, 11, 11);
    Metric m = build_metric(random_surface(g.torus, 2, 1e-3, 5), default_poisson_weights(),
                            CutoffProfile(), g);
    CHECK(max_abs(trace(m.eta_bar, Boundary::SigmaMinus)) < 1e-14);
    CHECK(max_abs(trace(m.eta_bar, Boundary::SigmaPlus)) < 1e-14);
}

TEST_CASE("build_metric: flat, small and too-large interfaces") {
    SlabGrid g(16, 8, 13, 13);
    PoissonWeights w = default_poisson_weights();
    CutoffProfile chi;

    SurfaceField zero(g.torus, Domain::Spectral);
    Metric mflat = build_metric(zero, w, chi, g);
    CHECK(mflat.flat);
    CHECK(max_abs(mflat.d3phi - VolumeField::constant(g, Region::Both, 1.0)) < 1e-14);
    CHECK(max_abs(mflat.grad_eta_bar.x1) == 0.0);

    SurfaceField small(g.torus, Domain::Spectral);
    small.set_coeff(1, 0, 0.005);
    small.set_coeff(-1, 0, 0.005);  // 0.01 cos(2 pi x1)
    Metric msmall = build_metric(small, w, chi, g);
    CHECK(max_abs(msmall.d3phi - VolumeField::constant(g, Region::Both, 1.0)) < 0.5);

    SurfaceField large(g.torus, Domain::Spectral);
    large.set_coeff(1, 0, 0.5);
    large.set_coeff(-1, 0, 0.5);  // cos(2 pi x1), amplitude 1
    CHECK_THROWS_AS(build_metric(large, w, chi, g), PreconditionError);
}

TEST_CASE("perturbed operators reduce to flat ones at eta = 0") {
    SlabGrid g(12, 12, 11, 11);
    Metric m = flat_metric(g);
    VectorField v = random_vector(g, Region::Lower, 3, 4, 1.0, 8);
    VectorField cv = perturbed_curl(m, v);
    VectorField cf = curl(v);
    for (int i = 0; i < 3; ++i)
        CHECK(l2_norm(cv[i] - cf[i]) < 1e-12);
    CHECK(l2_norm(perturbed_div(m, v) - divergence(v)) < 1e-12);
}

TEST_CASE("div^phi of curl^phi vanishes on random smooth fields") {
    SlabGrid g(32, 32, 25, 25);
    SurfaceField eta = random_surface(g.torus, 2, 2e-4, 12);
    Metric m = build_metric(eta, default_poisson_weights(), CutoffProfile(), g);
    VectorField v = random_vector(g, Region::Lower, 3, 4, 1.0, 21);
    VolumeField r = perturbed_div(m, perturbed_curl(m, v));
    CHECK(l2_norm(r) / l2_norm(v) < 1e-9);
}

TEST_CASE("pointwise identity: div^phi u * d3 phi = N . d3 u + d3 phi div_h u_h") {
    SlabGrid g(16, 16, 11, 11);
    SurfaceField eta = random_surface(g.torus, 2, 1e-3, 19);
    Metric m = build_metric(eta, default_poisson_weights(), CutoffProfile(), g);
    VectorField u = random_vector(g, Region::Lower, 3, 4, 1.0, 44);

    VolumeField lhs = multiply(perturbed_div(m, u), detail::restrict_region(m.d3phi, Region::Lower));
    VolumeField d3u1 = differentiate(u.x1, Axis::X3);
    VolumeField d3u2 = differentiate(u.x2, Axis::X3);
    VolumeField d3u3 = differentiate(u.x3, Axis::X3);
    VolumeField n_dot_d3u =
        d3u3 - multiply(detail::restrict_region(m.grad_eta_bar.x1, Region::Lower), d3u1) -
        multiply(detail::restrict_region(m.grad_eta_bar.x2, Region::Lower), d3u2);
    VolumeField divh = differentiate(u.x1, Axis::X1) + differentiate(u.x2, Axis::X2);
    VolumeField rhs = n_dot_d3u + multiply(detail::restrict_region(m.d3phi, Region::Lower), divh);
    CHECK(l2_norm(lhs - rhs) / l2_norm(u) < 1e-10);
}

TEST_CASE("mean_curvature: zero, linearized symbol, and the cubic correction") {
    TorusGrid g(32, 32);
    SurfaceField zero(g, Domain::Spectral);
    CHECK(max_abs(mean_curvature(zero, CurvatureMode::Full)) == 0.0);

    Real eps = 1e-3;
    SurfaceField eta(g, Domain::Spectral);
    eta.set_coeff(1, 0, eps / 2);
    eta.set_coeff(-1, 0, eps / 2);  // eps cos(2 pi x1)

    SurfaceField lin = mean_curvature(eta, CurvatureMode::Linearized);
    SurfaceField want = -4 * pi * pi * eps * SurfaceField(g, Domain::Spectral);
    (void)want;
    CHECK(std::abs(lin.coeff(1, 0) - Complex(-4 * pi * pi * eps / 2, 0)) < 1e-15);

    // series oracle: full H = lin + 24 pi^4 eps^3 sin^2(2 pi x1) cos(2 pi x1) + O(eps^5)
    SurfaceField full = mean_curvature(eta, CurvatureMode::Full);
    SurfaceField cubic(g, Domain::Physical);
    for (int j2 = 0; j2 < g.n2; ++j2)
        for (int j1 = 0; j1 < g.n1; ++j1) {
            Real x = Real(j1) / g.n1;
            Real s = std::sin(two_pi * x), c = std::cos(two_pi * x);
            cubic.data()[j1 + g.n1 * j2] = 24 * std::pow(pi, 4) * eps * eps * eps * s * s * c;
        }
    SurfaceField resid = full - lin - to_spectral(cubic);
    dealias(resid);
    CHECK(max_abs(resid) < 1e-8);
}

TEST_CASE("normal_vector: flat, single mode, and unit length") {
    TorusGrid g(16, 16);
    SurfaceField zero(g, Domain::Spectral);
    SurfaceNormal nf = normal_vector(zero);
    CHECK(max_abs(nf[0]) == 0.0);
    CHECK(max_abs(nf[1]) == 0.0);
    CHECK(std::abs(nf[2].coeff(0, 0) - Complex(1, 0)) < 1e-14);

    Real eps = 0.01;
    SurfaceField eta(g, Domain::Spectral);
    eta.set_coeff(0, 1, Complex(0, -eps / 2));
    eta.set_coeff(0, -1, Complex(0, eps / 2));  // eps sin(2 pi x2)
    SurfaceNormal n = normal_vector(eta);
    // N2 = -2 pi eps cos(2 pi x2)
    CHECK(std::abs(n[1].coeff(0, 1) - Complex(-two_pi * eps / 2, 0)) < 1e-13);
    CHECK(max_abs(n[0]) < 1e-14);

    SurfaceField bumpy = random_surface(g, 2, 0.02, 3);
    SurfaceNormal un = normal_vector(bumpy, true);
    SurfaceField n0 = to_physical(un[0]);
    SurfaceField n1 = to_physical(un[1]);
    SurfaceField n2 = to_physical(un[2]);
    Real worst = 0;
    for (int j = 0; j < g.modes(); ++j) {
        Real len = std::sqrt(std::norm(n0.data()[j]) + std::norm(n1.data()[j]) + std::norm(n2.data()[j]));
        worst = std::max(worst, std::abs(len - 1.0));
    }
    CHECK(worst < 1e-12);
}
