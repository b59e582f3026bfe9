#pragma once

#include <complex>
#include <optional>
#include <stdexcept>

#include "nsglue/resample.hpp"
#include "nsglue/spectral.hpp"

namespace nsglue {

// Unstable background profile with its dominant eigenpair.
struct Background {
    ProfileField Ubar;           // divergence-free, supported in the unit ball
    std::complex<double> lambda; // dominant eigenvalue of the similarity-variable
                                 // linearized operator
    Field3 rho_re, rho_im;       // eigenfunction, complex pair stored as two real fields
    double a = 0.0;              // spectral abscissa Re lambda
    double residual = 0.0;       // eigenpair residual at construction
};

enum class LinOp { ADrift, Lss };

struct LinOpSpec {
    LinOp which = LinOp::ADrift;
    const Background* background = nullptr;  // required for Lss
};

// xi . grad U, coordinate multiplication in physical space (the coordinate is the
// sawtooth extension of the box; inputs are assumed to decay near the boundary)
inline Field3 drift_term(const Field3& U) {
    const Grid3& g = U.grid;
    Field3 out(g);
    for (int j = 0; j < 3; ++j) {
        Field3 dj = partial(U, j);
        for (int c = 0; c < 3; ++c)
            for (int iz = 0; iz < g.n; ++iz)
                for (int iy = 0; iy < g.n; ++iy)
                    for (int ix = 0; ix < g.n; ++ix) {
                        int ij = j == 0 ? ix : (j == 1 ? iy : iz);
                        std::size_t id = g.idx(ix, iy, iz);
                        out.v[c][id] += g.coord(ij) * dj.v[c][id];
                    }
    }
    return out;
}

// -P div(Ubar x U + U x Ubar): the background coupling of the linearization
inline Field3 background_coupling(const Field3& Ubar, const Field3& U) {
    Field3 out = pdiv(outer_sym(Ubar, U));
    out *= -1.0;
    return out;
}

// A U = (1/2)(1 + xi.grad) U + Laplacian U, and the linearized operator
// Lss U = A U - P div(Ubar x U + U x Ubar).  Output is Leray-projected (the
// continuum operator preserves divergence-free fields; the projection removes
// the pseudo-spectral drift's aliasing residue).  The mean mode is untouched.
inline Field3 apply_linop(const LinOpSpec& spec, const Field3& U) {
    Field3 out = drift_term(U);
    out *= 0.5;
    out.axpy(0.5, U);
    out += laplacian(U);
    if (spec.which == LinOp::Lss) {
        if (!spec.background) throw std::invalid_argument("apply_linop: Lss needs a background");
        out += background_coupling(spec.background->Ubar.f, U);
    }
    return leray_project(out);
}

inline ProfileField apply_linop(const LinOpSpec& spec, const ProfileField& U) {
    return ProfileField{apply_linop(spec, U.f), U.tau};
}

// e^{s A} V, evaluated exactly through physical variables:
//   (e^{s A} V)(xi) = sqrt(t) (e^{(t-1) Laplacian} V)(xi sqrt(t)),  t = e^s.
// Heat flow is spectral; the dilation is the exact trigonometric interpolant.
inline Field3 drift_heat_semigroup(const Field3& V, double s) {
    if (s < 0) throw std::invalid_argument("drift_heat_semigroup: need s >= 0");
    if (s == 0) return V;
    double t = std::exp(s), st = std::sqrt(t);
    Field3 W = heat_semigroup(V, t - 1.0);
    return resample(W, V.grid, st, st);
}

// e^{s A} P div M
inline Field3 oseen_response(const Tensor3& M, double s) {
    return drift_heat_semigroup(pdiv(M), s);
}

// e^{tau Lss} V0, evaluated through physical variables: the similarity-variable
// evolution is the profile of u solving
//   du/dt = Laplacian u - P div(ubar x u + u x ubar),  ubar(x,t) = t^{-1/2} Ubar(x/sqrt t),
// from t = 1 to t = e^tau with u(.,1) = V0.  Strang splitting per physical step:
// Heun half-step of the coupling (background frozen at the interval endpoint),
// exact spectral heat step, Heun half-step.  The state is rescaled back to
// similarity variables only once at the end — repeated dilation of the evolving
// state would shave its Leray tails at the box boundary every step.
inline Field3 semigroup_Lss(const Field3& V0, double tau, const Background& bg,
                            double dtau_target = std::log(2.0) / 32.0) {
    if (tau < 0) throw std::invalid_argument("semigroup_Lss: need tau >= 0");
    if (tau == 0) return V0;
    const Grid3& g = V0.grid;
    // Substeps uniform in sigma = sqrt(t): the physical step dt = t1 - t0 grows
    // like t while the advective coupling strength decays like t^{-1/2}, so
    // their product -- the explicit-step stability parameter -- is uniform in
    // sigma.  The stability cap uses max |Ubar| and the grid Nyquist wavenumber.
    double ubmax = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Field3& Ub = bg.Ubar.f;
        double m2 = Ub.v[0][i] * Ub.v[0][i] + Ub.v[1][i] * Ub.v[1][i] + Ub.v[2][i] * Ub.v[2][i];
        ubmax = std::max(ubmax, m2);
    }
    ubmax = std::sqrt(ubmax);
    double dsig_acc = 0.5 * dtau_target;  // matches dtau_target near t = 1
    // CFL at the dealias edge k = 2pi/(3h): y = dt |ubar| k = 2 dsig ubmax k
    // must stay inside the RK3 imaginary-axis stability interval |y| <= sqrt(3)
    double k_edge = 2.0 * M_PI / (3.0 * g.h());
    double dsig_stab = ubmax > 0 ? 0.6 / (ubmax * k_edge) : dsig_acc;
    double sigN = std::exp(0.5 * tau);
    int nsub = std::max(1, int(std::ceil((sigN - 1.0) / std::min(dsig_acc, dsig_stab) - 1e-12)));
    double dsig = (sigN - 1.0) / nsub;
    auto ubar_at = [&](double t) {
        double st = std::sqrt(t);
        return resample(bg.Ubar.f, g, 1.0 / st, 1.0 / st);
    };
    // integrating-factor Kutta RK3: the heat factor is exact (and only ever
    // applied forward), the coupling is the only explicitly stepped term.
    // Third order in dt, imaginary-axis stable to |y| = sqrt(3).
    Field3 u = V0;
    for (int k = 0; k < nsub; ++k) {
        double s0 = 1.0 + k * dsig, s1 = k + 1 == nsub ? sigN : 1.0 + (k + 1) * dsig;
        double t0 = s0 * s0, t1 = s1 * s1, dt = t1 - t0;
        Field3 k1 = background_coupling(ubar_at(t0), u);
        Field3 a2 = u;
        a2.axpy(0.5 * dt, k1);
        a2 = heat_semigroup(a2, 0.5 * dt);
        Field3 k2 = background_coupling(ubar_at(t0 + 0.5 * dt), a2);
        Field3 eu = heat_semigroup(u, dt);
        Field3 ek1 = heat_semigroup(k1, dt);
        Field3 ek2 = heat_semigroup(k2, 0.5 * dt);
        Field3 a3 = eu;
        a3.axpy(-dt, ek1);
        a3.axpy(2.0 * dt, ek2);
        Field3 k3 = background_coupling(ubar_at(t1), a3);
        u = eu;
        u.axpy(dt / 6.0, ek1);
        u.axpy(4.0 * dt / 6.0, ek2);
        u.axpy(dt / 6.0, k3);
    }
    return resample(u, g, sigN, sigN);
}

inline ProfileField semigroup_Lss(const ProfileField& V0, double tau, const Background& bg,
                                  double dtau_target = std::log(2.0) / 32.0) {
    return ProfileField{semigroup_Lss(V0.f, tau, bg, dtau_target), V0.tau + tau};
}

}  // namespace nsglue
