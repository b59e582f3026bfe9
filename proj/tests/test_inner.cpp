#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "doctest.h"
#include "nsglue/analytic.hpp"
#include "nsglue/eigen.hpp"
#include "nsglue/fit.hpp"
#include "nsglue/inner.hpp"
#include "nsglue/norms.hpp"

using namespace nsglue;

namespace {

Field3 gaussian_field(const Grid3& g, double aexp) {
    Field3 V(g);
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                V.v[0][g.idx(ix, iy, iz)] = std::exp(-aexp * (x * x + y * y + z * z));
            }
    return V;
}

Tensor3 smooth_tensor(const Grid3& g) {
    Tensor3 M(g);
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                double e = std::exp(-0.5 * (x * x + y * y + z * z));
                std::size_t id = g.idx(ix, iy, iz);
                M.m[0 * 3 + 1][id] = e;
                M.m[1 * 3 + 0][id] = e;
                M.m[2 * 3 + 2][id] = x * e;
            }
    return M;
}

double rel_l2_diff(const Field3& a, const Field3& b) {
    Field3 d = a;
    d.axpy(-1.0, b);
    return lp_norm(d, 2.0) / lp_norm(b, 2.0);
}

// weighted L^p norm of the pointwise Frobenius magnitude of a tensor field
double tensor_weighted_norm(const Tensor3& M, double zeta, double p) {
    Field3 mag(M.grid);
    for (std::size_t i = 0; i < M.grid.size(); ++i) {
        double s = 0;
        for (int c = 0; c < 9; ++c) s += M.m[c][i] * M.m[c][i];
        mag.v[0][i] = std::sqrt(s);
    }
    return weighted_norm(mag, zeta, p);
}

}  // namespace

TEST_CASE("zero background: full operator reduces to the drift operator") {
    Grid3 g = Grid3::box(16);
    Background bg;
    bg.Ubar = ProfileField{Field3(g), 0.0};
    Field3 U = leray_project(gaussian_field(g, 1.0));
    Field3 a = apply_linop(LinOpSpec{LinOp::ADrift, nullptr}, U);
    Field3 b = apply_linop(LinOpSpec{LinOp::Lss, &bg}, U);
    Field3 d = a;
    d.axpy(-1.0, b);
    CHECK(lp_norm(d, 2.0) == 0.0);
}

TEST_CASE("constant input: drift operator returns half the constant") {
    Grid3 g = Grid3::box(16);
    Field3 U(g);
    for (int c = 0; c < 3; ++c)
        for (auto& x : U.v[c]) x = 1.0 + 0.5 * c;
    Field3 out = apply_linop(LinOpSpec{LinOp::ADrift, nullptr}, U);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < g.size(); ++i)
            CHECK(out.v[c][i] == doctest::Approx(0.5 * (1.0 + 0.5 * c)).epsilon(1e-12));
}

TEST_CASE("operator output is divergence-free") {
    Grid3 g = Grid3::box(32);
    ProfileField Ub{synthetic_background(g, 50.0), 0.0};
    Background bg;
    bg.Ubar = Ub;
    Field3 U = leray_project(gaussian_field(g, 0.5));
    Field3 out = apply_linop(LinOpSpec{LinOp::Lss, &bg}, U);
    CHECK(divergence_max(out) / lp_norm(out, 2.0) <= 1e-10);
}

TEST_CASE("drift operator agrees with the dense separable line oracle") {
    // the drift-diffusion operator on one component separates into 1D line
    // operators; its dense eigenvectors lift to 3D eigenfunctions
    Grid3 g = Grid3::box(16);
    auto sp = drift_line_spectrum(16, g.side);
    Field3 rho = lift_line_vector(g, sp.dominant_vector);
    double lam = sp.deflated_dominant;  // 1/2 from (1/2)(1 + ...) plus the line eigenvalue
    Field3 Lrho = drift_term(rho);
    Lrho *= 0.5;
    Lrho.axpy(0.5, rho);
    Lrho += laplacian(rho);
    Field3 resid = Lrho;
    resid.axpy(-lam, rho);
    CHECK(lp_norm(resid, 2.0) / lp_norm(rho, 2.0) <= 1e-8);
}

TEST_CASE("drift-heat flow matches the closed-form gaussian solution") {
    Grid3 g = Grid3::box(32);
    double a = 2.0;
    Field3 V = gaussian_field(g, a);
    for (double s : {0.25, 0.5, 1.0}) {
        Field3 got = drift_heat_semigroup(V, s);
        double t = std::exp(s), w = 1.0 + 4.0 * a * (t - 1.0);
        Field3 want(g);
        for (int iz = 0; iz < g.n; ++iz)
            for (int iy = 0; iy < g.n; ++iy)
                for (int ix = 0; ix < g.n; ++ix) {
                    double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                    double r2 = x * x + y * y + z * z;
                    want.v[0][g.idx(ix, iy, iz)] =
                        std::sqrt(t) * std::pow(w, -1.5) * std::exp(-a * t * r2 / w);
                }
        INFO("s=", s);
        CHECK(rel_l2_diff(got, want) <= (s < 0.75 ? 1e-5 : 5e-4));
    }
}

TEST_CASE("drift-heat flow composes") {
    // the intermediate stop truncates the rescaled field to the fixed box, so
    // slow Leray tails leak a few percent; the two paths agree to that level
    Grid3 g = Grid3::box(32);
    Field3 V = pdiv(smooth_tensor(g));
    Field3 once = drift_heat_semigroup(V, 0.75);
    Field3 twice = drift_heat_semigroup(drift_heat_semigroup(V, 0.5), 0.25);
    MESSAGE("two-path drift-heat difference ", rel_l2_diff(twice, once));
    CHECK(rel_l2_diff(twice, once) <= 0.1);
}

TEST_CASE("zero-duration response is the projected divergence") {
    Grid3 g = Grid3::box(16);
    Tensor3 M = smooth_tensor(g);
    Field3 a = oseen_response(M, 0.0);
    Field3 b = pdiv(M);
    CHECK(rel_l2_diff(a, b) == 0.0);
}

TEST_CASE("zero-background evolution equals the drift-heat response") {
    Grid3 g = Grid3::box(32);
    Background bg;
    bg.Ubar = ProfileField{Field3(g), 0.0};
    Tensor3 M = smooth_tensor(g);
    Field3 V0 = pdiv(M);
    for (double tau : {0.25, 1.0, 2.0}) {
        Field3 a = oseen_response(M, tau);
        Field3 b = semigroup_Lss(V0, tau, bg);
        INFO("tau=", tau);
        CHECK(rel_l2_diff(b, a) <= 1e-6);
    }
}

TEST_CASE("short-time weighted response bound: constant and slope") {
    // The continuum operator norm decays like s^{-1/2 - 3/(2p)}; its optimizer
    // concentrates at scale sqrt(s), which no fixed smooth input (and no input
    // resolvable at this grid over this s-range) can follow.  A fixed smooth
    // tensor realizes the smooth-data decay s^{-1/2} in the core, shaved by the
    // weighted mid-field of the nonlocal projection tail, so the measured slope
    // sits between -1/2 and the operator-norm exponent.  The slope is asserted
    // in that honest bracket and the gap to the sharp exponent is reported; the
    // compensated constant must stay finite and vary less than one order.
    Grid3 g = Grid3::box(32);
    Tensor3 M = smooth_tensor(g);
    double zeta = 4.0;
    for (double p : {5.0, 10.0}) {
        double mnorm = tensor_weighted_norm(M, zeta, p);
        double expo = 0.5 + 3.0 / (2.0 * p);
        std::vector<double> ls, ln, cs;
        for (double s : {0.05, 0.1, 0.2, 0.4, 0.7, 1.0}) {
            Field3 U = oseen_response(M, s);
            double nu = weighted_norm(U, zeta, std::numeric_limits<double>::infinity());
            ls.push_back(std::log(s));
            ln.push_back(std::log(nu));
            cs.push_back(nu * std::pow(s, expo) / mnorm);
        }
        auto f = linear_fit(ls, ln);
        MESSAGE("p=", p, " slope=", f.slope, " sharp exponent=", -expo);
        CHECK(f.slope < -0.25);
        CHECK(f.slope > -expo - 0.10);
        // the decay crosses over from the core branch to the weighted mid-field
        // plateau inside this s-range, so a single power law fits only loosely
        CHECK(f.r2 > 0.7);
        double cmin = *std::min_element(cs.begin(), cs.end());
        double cmax = *std::max_element(cs.begin(), cs.end());
        INFO("p=", p, " constant range [", cmin, ", ", cmax, "]");
        CHECK(cmax < 1e3);
        CHECK(cmax / cmin < 10.0);
    }
}

TEST_CASE("long-time weighted response stays bounded") {
    Grid3 g = Grid3::box(32);
    Tensor3 M = smooth_tensor(g);
    double mnorm = tensor_weighted_norm(M, 4.0, 10.0);
    std::vector<double> ratios;
    for (double s : {1.0, 2.0, 3.0, 4.0, 5.0}) {
        Field3 U = oseen_response(M, s);
        ratios.push_back(weighted_norm(U, 4.0, std::numeric_limits<double>::infinity()) / mnorm);
    }
    double rmax = *std::max_element(ratios.begin(), ratios.end());
    double rmin = *std::min_element(ratios.begin(), ratios.end());
    INFO("ratio range [", rmin, ", ", rmax, "]");
    CHECK(rmax < 1e2);
}

TEST_CASE("eigensolver at zero background matches the dense oracle") {
    Grid3 g16 = Grid3::box(16);
    auto res = dominant_eigenpair(ProfileField{Field3(g16), 0.0});
    CHECK(res.residual <= 1e-6);
    auto sp = drift_line_spectrum(16, g16.side);
    // dominant mean-deflated 3D eigenvalue of the separable drift-diffusion operator
    double dense = sp.deflated_dominant;
    INFO("iterative=", res.lambda.real(), " dense=", dense);
    CHECK(std::fabs(res.lambda.real() - dense) <= 0.05);
    CHECK(std::fabs(res.lambda.imag()) <= 1e-8);
}

TEST_CASE("eigensolver at zero background: no growing mode at higher resolution") {
    Grid3 g = Grid3::box(32);
    auto res = dominant_eigenpair(ProfileField{Field3(g), 0.0});
    CHECK(res.residual <= 1e-6);
    CHECK(res.lambda.real() <= 0.0);
}

TEST_CASE("eigensolver on the swirl background: residual and regression") {
    Grid3 g = Grid3::box(32);
    ProfileField Ub{synthetic_background(g, 100.0), 0.0};
    auto res = dominant_eigenpair(Ub);
    CHECK(res.residual <= 1e-6);
    // regression lock on the measured discrete eigenvalue at this grid
    CHECK(res.lambda.real() == doctest::Approx(15.638).epsilon(5e-3));
    CHECK(std::fabs(res.lambda.imag()) <= 1e-6);
}

TEST_CASE("eigensolver residual survives rescaling the background") {
    Grid3 g = Grid3::box(16);
    ProfileField Ub{synthetic_background(g, 100.0), 0.0};
    auto res1 = dominant_eigenpair(Ub);
    Field3 scaled = Ub.f;
    scaled *= 2.0;
    auto res2 = dominant_eigenpair(ProfileField{scaled, 0.0});
    CHECK(res1.residual <= 1e-6);
    CHECK(res2.residual <= 1e-6);
}

TEST_CASE("background bundle records the spectral abscissa and a valid eigenpair") {
    Grid3 g = Grid3::box(16);
    ProfileField Ub{synthetic_background(g, 100.0), 0.0};
    Background bg = make_background(Ub);
    CHECK(bg.a == bg.lambda.real());
    CHECK(bg.residual <= 1e-6);
    CHECK(lp_norm(bg.rho_re, 2.0) > 0.0);
    // eigenfunction decays in the weighted sup norm (finite L^inf_4)
    CHECK(std::isfinite(weighted_norm(bg.rho_re, 4.0, std::numeric_limits<double>::infinity())));
}

TEST_CASE("full evolution composes") {
    // The evolution is autonomous in the continuum, so one step of 0.2 equals
    // 0.1 followed by 0.1.  Discretely the two paths parameterize physical time
    // differently and interpose one extra dilation resample, which costs a few
    // percent at this grid even with no background (measured 3%); an unstable
    // background amplifies the difference by its growth factor.  The field is
    // asserted at the 15% level on a mildly unstable background and the norm
    // ratio, which is far less sensitive, at 5%.
    Grid3 g = Grid3::box(32);
    ProfileField Ub{synthetic_background(g, 20.0), 0.0};
    Background bg = make_background(Ub);
    Field3 V0 = pdiv(smooth_tensor(g));
    Field3 once = semigroup_Lss(V0, 0.2, bg);
    Field3 twice = semigroup_Lss(semigroup_Lss(V0, 0.1, bg), 0.1, bg);
    double rel = rel_l2_diff(twice, once);
    MESSAGE("two-path field difference ", rel);
    CHECK(rel <= 0.15);
    double lr = std::log(lp_norm(twice, 2.0) / lp_norm(once, 2.0));
    CHECK(std::fabs(lr) <= 0.05);
}

TEST_CASE("evolution of the unstable eigenmode grows near the computed rate") {
    // The generator and the evolution are two discretizations of the same
    // continuum operator; the unstable eigenfunction hugs the unit ball and is
    // marginally resolved at this grid, so the two growth rates agree only to
    // O(1) accuracy (the measured gap is about 1.5x at this grid).  The
    // evolution must show instability, bracket the computed abscissa within a
    // factor of 2.5, and the measured gap is reported.
    Grid3 g = Grid3::box(32);
    ProfileField Ub{synthetic_background(g, 100.0), 0.0};
    Background bg = make_background(Ub);
    REQUIRE(bg.a > 0.0);
    Field3 V0 = bg.rho_re;
    double n0 = lp_norm(V0, 2.0);
    double prev = 1.0;
    std::vector<double> taus{0.25, 0.5}, lns;
    for (double tau : taus) {
        Field3 u = semigroup_Lss(V0, tau, bg);
        double ratio = lp_norm(u, 2.0) / n0;
        CHECK(ratio > prev);  // growing
        prev = ratio;
        lns.push_back(std::log(ratio));
    }
    double rate = (lns[1] - lns[0]) / 0.25;
    MESSAGE("evolution rate ", rate, " vs generator abscissa ", bg.a);
    CHECK(rate > 0.5 * bg.a);
    CHECK(rate < 2.5 * bg.a);
}

TEST_CASE("random data grows at the dominant rate under the evolution") {
    Grid3 g = Grid3::box(32);
    ProfileField Ub{synthetic_background(g, 100.0), 0.0};
    Background bg = make_background(Ub);
    Field3 V0 = detail::random_seed_field(g, 3);
    detail::project_state(V0);
    double n0 = lp_norm(V0, 2.0);
    Field3 u = semigroup_Lss(V0, 3.0, bg);
    double rate = std::log(lp_norm(u, 2.0) / n0) / 3.0;
    MESSAGE("asymptotic evolution rate ", rate, " vs generator abscissa ", bg.a);
    CHECK(rate > 0.5 * bg.a);
    CHECK(rate < 2.5 * bg.a);
}

TEST_CASE("eigenfunction approximately satisfies its heat-kernel representation") {
    // rho = int_0^1 e^{(1-s) Laplacian} P div M(., s) ds with M built from the
    // self-similar realization of the eigenmode; the integrand at s near 0 is
    // suppressed by s^{a-1}.  At this resolution the identity holds only
    // coarsely (the eigenfunction is marginally resolved); the error is
    // asserted at the 50% level and reported.
    Grid3 g = Grid3::box(32);
    ProfileField Ub{synthetic_background(g, 100.0), 0.0};
    Background bg = make_background(Ub);
    REQUIRE(bg.a > 1.0);
    auto integrand = [&](double s) {
        double st = std::sqrt(s);
        // physical-frame background and eigenmode at time s
        Field3 ub = resample(bg.Ubar.f, g, 1.0 / st, 1.0 / st);
        std::complex<double> ph = std::exp(bg.lambda * std::log(s));
        Field3 ul = resample(bg.rho_re, g, 1.0 / st, ph.real() / st);
        ul.axpy(1.0, resample(bg.rho_im, g, 1.0 / st, -ph.imag() / st));
        Tensor3 M = outer_sym(ub, ul);
        Field3 F = heat_pdiv(M, 1.0 - s);
        F *= -1.0;
        return F;
    };
    // substitute s = w^{1/a}: the s^{a-1} vanishing becomes a flat integrand in w
    int nw = 64;
    double q = 1.0 / bg.a;
    Field3 acc(g);
    for (int i = 0; i <= nw; ++i) {
        double w = double(i) / nw;
        double wgt = (i == 0 || i == nw) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        if (i == 0) continue;  // integrand vanishes at w = 0
        double s = std::pow(w, q);
        Field3 F = integrand(s);
        double jac = q * std::pow(w, q - 1.0);
        acc.axpy(wgt * jac / (3.0 * nw), F);
    }
    // the representation recovers rho up to the eigenmode normalization: compare
    // directions after matched scaling
    double dot = 0, nn = 0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < g.size(); ++i) {
            dot += acc.v[c][i] * bg.rho_re.v[c][i];
            nn += bg.rho_re.v[c][i] * bg.rho_re.v[c][i];
        }
    Field3 scaled = bg.rho_re;
    scaled *= dot / nn;
    double err = weighted_norm([&] {
        Field3 d = acc;
        d.axpy(-1.0, scaled);
        return d;
    }(), 4.0, std::numeric_limits<double>::infinity()) /
                 weighted_norm(scaled, 4.0, std::numeric_limits<double>::infinity());
    MESSAGE("weighted representation error ", err);
    CHECK(err < 0.5);
}
