#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slabmhd/hodge.hpp"
#include "test_util.hpp"

using namespace slabmhd;
using namespace slabmhd::testing;

namespace {

detail::SurfaceVec3 e3_triple(TorusGrid g) {
    return {SurfaceField(g, Domain::Spectral), SurfaceField(g, Domain::Spectral),
            SurfaceField::constant(g, 1.0)};
}

/// Forward-applies the one-phase operators to a known field.
HodgeData forward_one_phase(const VectorField& vstar, Region region, VerticalEnd tend) {
    const SlabGrid& g = vstar.grid();
    HodgeData d = HodgeData::zero(g, region, tend);
    d.curl_datum = curl(vstar);
    d.div_datum = divergence(vstar);
    Boundary tb = detail::end_boundary(region, tend);
    Boundary nb = detail::end_boundary(region, tend == VerticalEnd::Bottom ? VerticalEnd::Top : VerticalEnd::Bottom);
    d.tangential_datum = detail::cross(detail::trace_vector(vstar, tb), e3_triple(g.torus));
    d.normal_datum = trace(vstar.x3, nb);
    return d;
}

}  // namespace

TEST_CASE("one-phase: zero data yields the zero field") {
    SlabGrid g(8, 8, 9, 9);
    Metric m = flat_metric(g);
    HodgeData d = HodgeData::zero(g, Region::Upper, VerticalEnd::Bottom);
    VectorField v = solve_one_phase(d, m);
    CHECK(max_abs(v) < 1e-13);
}

TEST_CASE("one-phase: manufactured solution at eta = 0 on 16^2 x 17") {
    SlabGrid g(16, 16, 17, 17);
    Metric m = flat_metric(g);
    VectorField vstar = random_vector(g, Region::Upper, 1, 4, 1.0, 5);
    HodgeData d = forward_one_phase(vstar, Region::Upper, VerticalEnd::Bottom);
    VectorField v = solve_one_phase(d, m);
    CHECK(rel_error(v, vstar) < 1e-9);
}

TEST_CASE("one-phase: lower region with tangential data at the bottom") {
    SlabGrid g(16, 16, 17, 17);
    Metric m = flat_metric(g);
    VectorField vstar = random_vector(g, Region::Lower, 1, 4, 1.0, 6);
    HodgeData d = forward_one_phase(vstar, Region::Lower, VerticalEnd::Bottom);
    VectorField v = solve_one_phase(d, m);
    CHECK(rel_error(v, vstar) < 1e-9);
}

TEST_CASE("one-phase: incompatible data are rejected by name") {
    SlabGrid g(8, 8, 9, 9);
    Metric m = flat_metric(g);
    HodgeData d = HodgeData::zero(g, Region::Upper, VerticalEnd::Bottom);
    // f1 = e3 is divergence-free but f1 . N = 1 != div_h f3_h = 0
    d.curl_datum.x3 = VolumeField::constant(g, Region::Upper, 1.0);
    try {
        solve_one_phase(d, m);
        FAIL("expected a compatibility rejection");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("div_h f3_h") != std::string::npos);
    }
}

TEST_CASE("one-phase: manufactured solution under a small interface") {
    SlabGrid g(16, 16, 25, 25);
    SurfaceField eta = random_surface(g.torus, 2, 1e-3, 7);
    Metric m = build_metric(eta, default_poisson_weights(), CutoffProfile(), g);
    VectorField vstar = random_vector(g, Region::Upper, 1, 4, 1.0, 8);

    HodgeData d = HodgeData::zero(g, Region::Upper, VerticalEnd::Bottom);
    d.curl_datum = perturbed_curl(m, vstar);
    d.div_datum = perturbed_div(m, vstar);
    detail::SurfaceVec3 nsig = detail::boundary_normal(m, Boundary::Sigma);
    d.tangential_datum = detail::cross(detail::trace_vector(vstar, Boundary::Sigma), nsig);
    d.normal_datum = detail::dot(detail::trace_vector(vstar, Boundary::SigmaPlus),
                                 detail::boundary_normal(m, Boundary::SigmaPlus));

    SolveInfo info;
    VectorField v = solve_one_phase(d, m, &info);
    CHECK(info.converged);
    CHECK(rel_error(v, vstar) < 1e-9);
    // defect sweeps contract at the rate of the interface amplitude
    for (size_t i = 1; i + 1 < info.residuals.size(); ++i)
        CHECK(info.residuals[i + 1] < 0.5 * info.residuals[i]);
}

TEST_CASE("one-phase: linearity and determinism") {
    SlabGrid g(8, 8, 11, 11);
    Metric m = flat_metric(g);
    VectorField a = random_vector(g, Region::Upper, 1, 3, 1.0, 11);
    VectorField b = random_vector(g, Region::Upper, 1, 3, 1.0, 12);
    HodgeData da = forward_one_phase(a, Region::Upper, VerticalEnd::Bottom);
    HodgeData db = forward_one_phase(b, Region::Upper, VerticalEnd::Bottom);
    HodgeData dsum = forward_one_phase(a + (-2.0) * b, Region::Upper, VerticalEnd::Bottom);
    VectorField va = solve_one_phase(da, m);
    VectorField vb = solve_one_phase(db, m);
    VectorField vsum = solve_one_phase(dsum, m);
    CHECK(rel_error(vsum, va + (-2.0) * vb) < 1e-10);
    VectorField va2 = solve_one_phase(da, m);
    CHECK(l2_norm(va - va2) < 1e-12);
}

TEST_CASE("two-phase: zero data and manufactured pair") {
    SlabGrid g(16, 16, 17, 17);
    Metric m = flat_metric(g);
    VolumeField zl(g, Region::Lower, Domain::Spectral), zu(g, Region::Upper, Domain::Spectral);
    VectorField z1(g, Region::Lower, Domain::Spectral), z1h(g, Region::Upper, Domain::Spectral);
    auto [v0, vh0] = solve_two_phase(z1, zl, z1h, zu, m);
    CHECK(max_abs(v0) < 1e-13);
    CHECK(max_abs(vh0) < 1e-13);

    VectorField w = random_two_phase_vector(g, 1, 4, 1.0, 21);
    VectorField cw = curl(w);
    VolumeField dw = divergence(w);
    VectorField f1(g, Region::Lower, Domain::Spectral), f1h(g, Region::Upper, Domain::Spectral);
    VolumeField f2(g, Region::Lower, Domain::Spectral), f2h(g, Region::Upper, Domain::Spectral);
    for (int c = 0; c < 3; ++c) {
        f1[c].lower() = cw[c].lower();
        f1h[c].upper() = cw[c].upper();
    }
    f2.lower() = dw.lower();
    f2h.upper() = dw.upper();

    auto [v, vh] = solve_two_phase(f1, f2, f1h, f2h, m);
    VectorField wl(g, Region::Lower, Domain::Spectral), wu(g, Region::Upper, Domain::Spectral);
    for (int c = 0; c < 3; ++c) {
        wl[c].lower() = w[c].lower();
        wu[c].upper() = w[c].upper();
    }
    CHECK(rel_error(v, wl) < 1e-9);
    CHECK(rel_error(vh, wu) < 1e-9);
}

TEST_CASE("two-phase: agrees with a dense physical-space least-squares oracle on 4^2 x 5") {
    SlabGrid g(4, 4, 5, 5);
    Metric m = flat_metric(g);
    VectorField w = random_two_phase_vector(g, 1, 3, 1.0, 31);
    VectorField cw = curl(w);
    VolumeField dw = divergence(w);
    VectorField f1(g, Region::Lower, Domain::Spectral), f1h(g, Region::Upper, Domain::Spectral);
    VolumeField f2(g, Region::Lower, Domain::Spectral), f2h(g, Region::Upper, Domain::Spectral);
    for (int c = 0; c < 3; ++c) {
        f1[c].lower() = cw[c].lower();
        f1h[c].upper() = cw[c].upper();
    }
    f2.lower() = dw.lower();
    f2h.upper() = dw.upper();
    auto [v, vh] = solve_two_phase(f1, f2, f1h, f2h, m);

    // Brute-force route: point values on the full 3D grid as real unknowns,
    // dense DFT differentiation matrices, one global least-squares solve.
    const int n = 4, nz = 5;
    auto lower = lower_basis(nz);
    auto upper = upper_basis(nz);
    MatrixXd dx = MatrixXd::Zero(n, n);  // d/dx1 on the periodic grid
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int mo = 0; mo < n; ++mo) {
                int xi = TorusGrid::signed_mode(mo, n);
                if (std::abs(xi) == n / 2)
                    continue;  // Nyquist convention matches the spectral path
                Real k = two_pi * xi;
                dx(a, b) += (Complex(0, k) * std::exp(Complex(0, two_pi * xi * Real(a - b) / n))).real() / n;
            }

    // unknown layout: u[c][dom][i][j1][j2], flattened
    const int pts = 2 * nz * n * n;
    auto uidx = [&](int c, int dom, int i, int j1, int j2) {
        return c * pts + dom * nz * n * n + i * n * n + j1 * n + j2;
    };
    struct Entry {
        int row, col;
        Real val;
    };
    std::vector<Entry> trip;
    std::vector<Real> rhs_rows;
    auto row_count = [&]() { return int(rhs_rows.size()); };
    auto add = [&](int r, int col, Real val) { trip.push_back({r, col, val}); };

    VectorField cw_p = to_physical(cw);
    VolumeField dw_p = to_physical(dw);
    for (int dom = 0; dom < 2; ++dom) {
        const MatrixXd& dz = (dom == 0 ? lower : upper)->diff;
        Half h = dom == 0 ? Half::Lower : Half::Upper;
        for (int i = 0; i < nz; ++i)
            for (int j1 = 0; j1 < n; ++j1)
                for (int j2 = 0; j2 < n; ++j2) {
                    int col = j1 + n * j2;
                    // (curl u)_1 = d2 u3 - d3 u2
                    int r = row_count();
                    rhs_rows.push_back(cw_p.x1.block(h)(i, col).real());
                    for (int b = 0; b < n; ++b)
                        add(r, uidx(2, dom, i, j1, b), dx(j2, b));
                    for (int b = 0; b < nz; ++b)
                        add(r, uidx(1, dom, b, j1, j2), -dz(i, b));
                    // (curl u)_2 = d3 u1 - d1 u3
                    r = row_count();
                    rhs_rows.push_back(cw_p.x2.block(h)(i, col).real());
                    for (int b = 0; b < nz; ++b)
                        add(r, uidx(0, dom, b, j1, j2), dz(i, b));
                    for (int b = 0; b < n; ++b)
                        add(r, uidx(2, dom, i, b, j2), -dx(j1, b));
                    // (curl u)_3 = d1 u2 - d2 u1
                    r = row_count();
                    rhs_rows.push_back(cw_p.x3.block(h)(i, col).real());
                    for (int b = 0; b < n; ++b)
                        add(r, uidx(1, dom, i, b, j2), dx(j1, b));
                    for (int b = 0; b < n; ++b)
                        add(r, uidx(0, dom, i, j1, b), -dx(j2, b));
                    // div u
                    r = row_count();
                    rhs_rows.push_back(dw_p.block(h)(i, col).real());
                    for (int b = 0; b < n; ++b)
                        add(r, uidx(0, dom, i, b, j2), dx(j1, b));
                    for (int b = 0; b < n; ++b)
                        add(r, uidx(1, dom, i, j1, b), dx(j2, b));
                    for (int b = 0; b < nz; ++b)
                        add(r, uidx(2, dom, b, j1, j2), dz(i, b));
                }
    }
    Real bc_weight = 10.0;  // emphasize the exactly-satisfiable constraints
    for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2) {
            for (int c = 0; c < 3; ++c) {  // [[u]] = 0 at Sigma
                int r = row_count();
                rhs_rows.push_back(0.0);
                add(r, uidx(c, 0, nz - 1, j1, j2), bc_weight);
                add(r, uidx(c, 1, 0, j1, j2), -bc_weight);
            }
            int r = row_count();  // u3 = 0 at Sigma-
            rhs_rows.push_back(0.0);
            add(r, uidx(2, 0, 0, j1, j2), bc_weight);
            r = row_count();  // u_h = 0 at Sigma+
            rhs_rows.push_back(0.0);
            add(r, uidx(0, 1, nz - 1, j1, j2), bc_weight);
            r = row_count();
            rhs_rows.push_back(0.0);
            add(r, uidx(1, 1, nz - 1, j1, j2), bc_weight);
        }

    MatrixXd A = MatrixXd::Zero(row_count(), 3 * pts);
    for (auto& t : trip)
        A(t.row, t.col) += t.val;
    VectorXd rhs = Eigen::Map<VectorXd>(rhs_rows.data(), rhs_rows.size());
    VectorXd sol = A.colPivHouseholderQr().solve(rhs);

    VectorField vp = to_physical(v), vhp = to_physical(vh);
    Real emax = 0;
    for (int dom = 0; dom < 2; ++dom)
        for (int i = 0; i < nz; ++i)
            for (int j1 = 0; j1 < n; ++j1)
                for (int j2 = 0; j2 < n; ++j2)
                    for (int c = 0; c < 3; ++c) {
                        Real mine = dom == 0 ? vp[c].lower()(i, j1 + n * j2).real()
                                             : vhp[c].upper()(i, j1 + n * j2).real();
                        emax = std::max(emax, std::abs(mine - sol[uidx(c, dom, i, j1, j2)]));
                    }
    CHECK(emax < 1e-8);
}

TEST_CASE("mixed-phase: zero data, manufactured pair and stage consistency") {
    SlabGrid g(16, 16, 17, 17);
    Metric m = flat_metric(g);

    VectorField z1(g, Region::Lower, Domain::Spectral), z1h(g, Region::Upper, Domain::Spectral);
    VolumeField zl(g, Region::Lower, Domain::Spectral), zu(g, Region::Upper, Domain::Spectral);
    auto zero3 = e3_triple(g.torus);
    zero3[2] = SurfaceField(g.torus, Domain::Spectral);
    auto [v0, vh0] = solve_mixed_phase(z1, zl, z1h, zu, zero3, m);
    CHECK(max_abs(v0) < 1e-13);
    CHECK(max_abs(vh0) < 1e-13);

    VectorField w = random_two_phase_vector(g, 1, 4, 1.0, 41);
    VectorField cw = curl(w);
    VectorField ccw = curl(cw);
    VolumeField dw = divergence(w);
    VectorField f1(g, Region::Lower, Domain::Spectral), f1h(g, Region::Upper, Domain::Spectral);
    VolumeField f2(g, Region::Lower, Domain::Spectral), f2h(g, Region::Upper, Domain::Spectral);
    for (int c = 0; c < 3; ++c) {
        f1[c].lower() = ccw[c].lower();
        f1h[c].upper() = cw[c].upper();
    }
    f2.lower() = dw.lower();
    f2h.upper() = dw.upper();
    // f3 = curl^phi w x e3 on Sigma-
    detail::SurfaceVec3 f3 = detail::cross(detail::trace_vector(cw, Boundary::SigmaMinus), e3_triple(g.torus));

    SolveInfo info;
    VectorField stage1_w;
    auto [v, vh] = solve_mixed_phase(f1, f2, f1h, f2h, f3, m, &info, &stage1_w);
    VectorField wl(g, Region::Lower, Domain::Spectral), wu(g, Region::Upper, Domain::Spectral);
    for (int c = 0; c < 3; ++c) {
        wl[c].lower() = w[c].lower();
        wu[c].upper() = w[c].upper();
    }
    CHECK(rel_error(v, wl) < 1e-9);
    CHECK(rel_error(vh, wu) < 1e-9);
    // stage 1 field is curl^phi of the returned v
    VectorField cv = perturbed_curl(m, v);
    CHECK(rel_error(cv, stage1_w) < 1e-9);
}

TEST_CASE("vacuum field: closed-form single mode and the constant branch") {
    SlabGrid g(16, 16, 17, 17);
    Metric m = flat_metric(g);

    SurfaceField zero(g.torus, Domain::Spectral);
    CHECK(max_abs(recover_vacuum_field(zero, m)) < 1e-14);

    SurfaceField bn(g.torus, Domain::Spectral);
    bn.set_coeff(1, 0, 0.5);
    bn.set_coeff(-1, 0, 0.5);  // cos(2 pi x1)
    VectorField bhat = recover_vacuum_field(bn, m);
    // phi = cos(2 pi x1) sinh(2 pi (x3-1)) / (2 pi cosh 2 pi)
    VolumeField want1(g, Region::Upper, Domain::Physical), want3(g, Region::Upper, Domain::Physical);
    const VectorXd& z = upper_basis(g.nz_upper)->points;
    for (int i = 0; i < z.size(); ++i)
        for (int j2 = 0; j2 < g.torus.n2; ++j2)
            for (int j1 = 0; j1 < g.torus.n1; ++j1) {
                Real x1 = Real(j1) / g.torus.n1;
                want1.block(Half::Upper)(i, j1 + g.torus.n1 * j2) =
                    -std::sin(two_pi * x1) * std::sinh(two_pi * (z[i] - 1)) / std::cosh(two_pi);
                want3.block(Half::Upper)(i, j1 + g.torus.n1 * j2) =
                    std::cos(two_pi * x1) * std::cosh(two_pi * (z[i] - 1)) / std::cosh(two_pi);
            }
    CHECK(rel_error(bhat.x1, to_spectral(want1)) < 1e-10);
    CHECK(rel_error(bhat.x3, to_spectral(want3)) < 1e-10);
    CHECK(max_abs(bhat.x2) < 1e-12);
    CHECK(l2_norm(curl(bhat)) < 1e-9);
    CHECK(l2_norm(divergence(bhat)) < 1e-9);
    CHECK(max_abs(trace(bhat.x1, Boundary::SigmaPlus)) < 1e-9);
    CHECK(max_abs(trace(bhat.x2, Boundary::SigmaPlus)) < 1e-9);

    SurfaceField c = SurfaceField::constant(g.torus, 0.7);
    VectorField bc = recover_vacuum_field(c, m);
    CHECK(max_abs(bc.x3 - VolumeField::constant(g, Region::Upper, 0.7)) < 1e-12);
    CHECK(l2_norm(divergence(bc)) < 1e-10);
}

TEST_CASE("vacuum electric field: zero data, manufactured recovery, contraction") {
    SlabGrid g(16, 16, 25, 25);
    Metric mflat = flat_metric(g);

    VectorField zero(g, Region::Upper, Domain::Spectral);
    auto z3 = e3_triple(g.torus);
    z3[2] = SurfaceField(g.torus, Domain::Spectral);
    CHECK(max_abs(recover_vacuum_electric(zero, z3, mflat)) < 1e-13);

    // manufactured E*: curl of a potential with E3(Sigma+) = 0
    VectorField estar(g, Region::Upper, Domain::Spectral);
    {
        VectorField a = random_vector(g, Region::Upper, 1, 4, 1.0, 55);
        for (int c = 0; c < 2; ++c)
            for (Half h : a[c].halves()) {
                const VectorXd& z = a[c].basis(h)->points;
                for (int i = 0; i < z.size(); ++i)
                    a[c].block(h).row(i) *= (1.0 - z[i]);  // A_h(Sigma+) = 0
            }
        estar = curl(a);
    }
    VectorField dtb = curl(estar);
    detail::SurfaceVec3 etan = detail::cross(detail::trace_vector(estar, Boundary::Sigma), e3_triple(g.torus));
    VectorField e = recover_vacuum_electric(dtb, etan, mflat);
    CHECK(rel_error(e, estar) < 1e-10);

    // perturbative iteration at eta = 0.01 cos(2 pi x1) contracts
    SurfaceField eta(g.torus, Domain::Spectral);
    eta.set_coeff(1, 0, 0.005);
    eta.set_coeff(-1, 0, 0.005);
    Metric m = build_metric(eta, default_poisson_weights(), CutoffProfile(), g);
    VectorField dtb_p = perturbed_curl(m, estar);
    detail::SurfaceVec3 nsig = detail::boundary_normal(m, Boundary::Sigma);
    detail::SurfaceVec3 etan_p = detail::cross(detail::trace_vector(estar, Boundary::Sigma), nsig);
    SolveInfo info;
    VectorField ep = recover_vacuum_electric(dtb_p, etan_p, m, &info);
    CHECK(info.converged);
    CHECK(rel_error(ep, estar) < 1e-9);
    for (size_t i = 0; i + 2 < info.residuals.size(); ++i)
        CHECK(info.residuals[i + 1] < 0.5 * info.residuals[i]);
}

TEST_CASE("norm-bound shape of the Hodge estimate (empirical constant)") {
    SlabGrid g(8, 8, 11, 11);
    Metric m = flat_metric(g);
    Real worst = 0;
    for (int t = 0; t < 10; ++t) {
        VectorField vstar = random_vector(g, Region::Upper, 1, 3, 1.0, 600 + t);
        HodgeData d = forward_one_phase(vstar, Region::Upper, VerticalEnd::Bottom);
        VectorField v = solve_one_phase(d, m);
        Real data_norm = sobolev_norm_volume(d.curl_datum, 0) + sobolev_norm_volume(d.div_datum, 0);
        for (auto& f3c : d.tangential_datum)
            data_norm += sobolev_norm_surface(f3c, 0.5);
        data_norm += sobolev_norm_surface(d.normal_datum, 0.5);
        worst = std::max(worst, sobolev_norm_volume(v, 1) / data_norm);
    }
    MESSAGE("empirical ||v||_1 / data constant: ", worst);
    CHECK(worst < 100.0);
}

TEST_CASE("Hodge estimate without boundary conditions (Lemma-type bound)") {
    SlabGrid g(8, 8, 11, 11);
    Real worst = 0;
    for (int t = 0; t < 10; ++t) {
        VectorField v = random_vector(g, Region::Lower, 2, 4, 1.0, 700 + t);
        VectorField cv = curl(v);
        Real lhs = sobolev_norm_volume(v, 1);
        Real rhs = anisotropic_norm(v.x1, 0, 1) + anisotropic_norm(v.x2, 0, 1) + anisotropic_norm(v.x3, 0, 1) +
                   l2_norm(cv.x1) + l2_norm(cv.x2) + l2_norm(divergence(v));
        worst = std::max(worst, lhs / rhs);
    }
    MESSAGE("empirical constant of ||v||_1 <= C(||v||_{0,1} + ||(curl v)_h||_0 + ||div v||_0): ", worst);
    CHECK(worst < 50.0);
    CHECK(std::isfinite(worst));
}
