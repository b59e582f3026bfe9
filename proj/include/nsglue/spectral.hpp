#pragma once

#include <cmath>
#include <stdexcept>

#include "nsglue/fft3.hpp"
#include "nsglue/field.hpp"

namespace nsglue {

// Half-complex (r2c) spectral representation of a vector field.
struct Spec3 {
    Grid3 grid;
    std::array<std::vector<cplx>, 3> c;
};

namespace detail {

// iterate over half-spectrum entries; fn(index, kx, ky, kz)
template <typename Fn>
inline void for_modes(const Grid3& g, Fn&& fn) {
    const int n = g.n;
    const int nh = n / 2 + 1;
    const double k0 = 2.0 * M_PI / g.side;
    std::size_t id = 0;
    for (int iz = 0; iz < n; ++iz) {
        double kz = k0 * (iz <= n / 2 - 1 ? iz : iz - n);
        for (int iy = 0; iy < n; ++iy) {
            double ky = k0 * (iy <= n / 2 - 1 ? iy : iy - n);
            for (int ix = 0; ix < nh; ++ix, ++id) {
                double kx = k0 * ix;  // r2c keeps kx >= 0
                fn(id, kx, ky, kz);
            }
        }
    }
}

}  // namespace detail

inline Spec3 forward(const Field3& u) {
    Spec3 s;
    s.grid = u.grid;
    Fft3& fft = Fft3::get(u.grid.n);
    for (int c = 0; c < 3; ++c) fft.fwd(u.v[c], s.c[c]);
    return s;
}

inline Field3 inverse(const Spec3& s) {
    Field3 u(s.grid);
    Fft3& fft = Fft3::get(s.grid.n);
    for (int c = 0; c < 3; ++c) fft.bwd(s.c[c], u.v[c]);
    return u;
}

// Mode-wise Leray projection (I - k k^T/|k|^2); zero mode untouched.  The
// Nyquist planes are zeroed: their stored entries contain conjugate pairs
// whose projection tensors differ (the off-diagonal k_i k_j terms flip sign),
// so projecting them breaks the Hermitian symmetry the real transform assumes
// and leaves a spurious divergence after the round trip.
inline void leray_inplace(Spec3& s) {
    const double knyq = M_PI * s.grid.n / s.grid.side;
    detail::for_modes(s.grid, [&](std::size_t id, double kx, double ky, double kz) {
        if (kx == knyq || ky == -knyq || kz == -knyq) {
            for (int c = 0; c < 3; ++c) s.c[c][id] = 0.0;
            return;
        }
        double kk = kx * kx + ky * ky + kz * kz;
        if (kk == 0.0) return;
        cplx dot = (kx * s.c[0][id] + ky * s.c[1][id] + kz * s.c[2][id]) / kk;
        s.c[0][id] -= kx * dot;
        s.c[1][id] -= ky * dot;
        s.c[2][id] -= kz * dot;
    });
}

inline Field3 leray_project(const Field3& u) {
    Spec3 s = forward(u);
    leray_inplace(s);
    return inverse(s);
}

inline void heat_inplace(Spec3& s, double t) {
    if (t < 0) throw std::invalid_argument("heat semigroup: negative duration");
    detail::for_modes(s.grid, [&](std::size_t id, double kx, double ky, double kz) {
        double f = std::exp(-(kx * kx + ky * ky + kz * kz) * t);
        for (int c = 0; c < 3; ++c) s.c[c][id] *= f;
    });
}

inline Field3 heat_semigroup(const Field3& u, double t) {
    Spec3 s = forward(u);
    heat_inplace(s, t);
    return inverse(s);
}

// spherical 2/3-rule mask (or any fraction)
inline void dealias_inplace(Spec3& s, double fraction = 2.0 / 3.0) {
    const double kcut = fraction * (M_PI * s.grid.n / s.grid.side);  // fraction of Nyquist
    const double kcut2 = kcut * kcut;
    detail::for_modes(s.grid, [&](std::size_t id, double kx, double ky, double kz) {
        if (kx * kx + ky * ky + kz * kz > kcut2)
            for (int c = 0; c < 3; ++c) s.c[c][id] = 0.0;
    });
}

inline void zero_mean_inplace(Spec3& s) {
    for (int c = 0; c < 3; ++c) s.c[c][0] = 0.0;
}

inline void zero_mean_inplace(Field3& u) {
    for (int c = 0; c < 3; ++c) {
        double m = 0;
        for (double x : u.v[c]) m += x;
        m /= double(u.grid.size());
        for (double& x : u.v[c]) x -= m;
    }
}

// spectral divergence of a tensor field: (div M)_i = d_j M_ij
inline Spec3 divergence_tensor_spec(const Tensor3& M) {
    Fft3& fft = Fft3::get(M.grid.n);
    Spec3 out;
    out.grid = M.grid;
    for (int c = 0; c < 3; ++c) out.c[c].assign(fft.cplx_size(), cplx(0.0));
    std::vector<cplx> w;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            fft.fwd(M.m[3 * i + j], w);
            detail::for_modes(M.grid, [&](std::size_t id, double kx, double ky, double kz) {
                double kj = j == 0 ? kx : (j == 1 ? ky : kz);
                out.c[i][id] += cplx(0.0, kj) * w[id];
            });
        }
    return out;  // unnormalized convention, same as forward()
}

// P div M, dealiased (quadratic products feed this)
inline Field3 pdiv(const Tensor3& M, bool dealias = true) {
    Spec3 s = divergence_tensor_spec(M);
    if (dealias) dealias_inplace(s);
    leray_inplace(s);
    zero_mean_inplace(s);
    return inverse(s);
}

// e^{tΔ} P div M in one spectral pass
inline Field3 heat_pdiv(const Tensor3& M, double t, bool dealias = true) {
    Spec3 s = divergence_tensor_spec(M);
    if (dealias) dealias_inplace(s);
    leray_inplace(s);
    zero_mean_inplace(s);
    heat_inplace(s, t);
    return inverse(s);
}

// e^{tΔ} P u
inline Field3 heat_leray(const Field3& u, double t) {
    Spec3 s = forward(u);
    leray_inplace(s);
    heat_inplace(s, t);
    return inverse(s);
}

// dealiased pseudo-spectral P div(u ⊗ v)
inline Field3 nonlinear_div(const Field3& u, const Field3& v) {
    if (u.grid != v.grid) throw std::invalid_argument("nonlinear_div: grid mismatch");
    return pdiv(outer(u, v));
}

// Solve div(out) = h with out a pure gradient: out = ∇ Δ^{-1} h.
// Requires mean(h) = 0 (checked against mean_tol * max|h|).
inline Field3 stokes_div_solve(const Grid3& g, const std::vector<double>& h,
                               double mean_tol = 1e-10) {
    double mean = 0, amax = 0;
    for (double x : h) {
        mean += x;
        amax = std::max(amax, std::fabs(x));
    }
    mean /= double(g.size());
    if (amax > 0 && std::fabs(mean) > mean_tol * amax)
        throw std::invalid_argument("stokes_div_solve: nonzero mean " + std::to_string(mean));
    Fft3& fft = Fft3::get(g.n);
    std::vector<cplx> hs;
    fft.fwd(h, hs);
    Spec3 s;
    s.grid = g;
    for (int c = 0; c < 3; ++c) s.c[c].assign(fft.cplx_size(), cplx(0.0));
    detail::for_modes(g, [&](std::size_t id, double kx, double ky, double kz) {
        double kk = kx * kx + ky * ky + kz * kz;
        if (kk == 0.0) return;
        cplx base = hs[id] / kk;  // Δ^{-1} h has coefficient -h/kk; ∇ gives ik * (-h/kk)
        s.c[0][id] = cplx(0.0, -kx) * base;
        s.c[1][id] = cplx(0.0, -ky) * base;
        s.c[2][id] = cplx(0.0, -kz) * base;
    });
    return inverse(s);
}

// spectral divergence of a vector field, returned in physical space
inline std::vector<double> divergence_scalar(const Field3& u) {
    Spec3 s = forward(u);
    Fft3& fft = Fft3::get(u.grid.n);
    std::vector<cplx> d(fft.cplx_size(), cplx(0.0));
    detail::for_modes(u.grid, [&](std::size_t id, double kx, double ky, double kz) {
        d[id] = cplx(0.0, kx) * s.c[0][id] + cplx(0.0, ky) * s.c[1][id] + cplx(0.0, kz) * s.c[2][id];
    });
    std::vector<double> dp;
    fft.bwd(d, dp);
    return dp;
}

// div M without Leray projection (dealiased)
inline Field3 tensor_divergence(const Tensor3& M, bool dealias = true) {
    Spec3 s = divergence_tensor_spec(M);
    if (dealias) dealias_inplace(s);
    return inverse(s);
}

// max |spectral divergence| in physical space
inline double divergence_max(const Field3& u) {
    Spec3 s = forward(u);
    Fft3& fft = Fft3::get(u.grid.n);
    std::vector<cplx> d(fft.cplx_size(), cplx(0.0));
    detail::for_modes(u.grid, [&](std::size_t id, double kx, double ky, double kz) {
        d[id] = cplx(0.0, kx) * s.c[0][id] + cplx(0.0, ky) * s.c[1][id] + cplx(0.0, kz) * s.c[2][id];
    });
    std::vector<double> dp;
    fft.bwd(d, dp);
    double m = 0;
    for (double x : dp) m = std::max(m, std::fabs(x));
    return m;
}

// componentwise spectral Laplacian
inline Field3 laplacian(const Field3& u) {
    Spec3 s = forward(u);
    detail::for_modes(u.grid, [&](std::size_t id, double kx, double ky, double kz) {
        double kk = kx * kx + ky * ky + kz * kz;
        for (int c = 0; c < 3; ++c) s.c[c][id] *= -kk;
    });
    return inverse(s);
}

// partial derivative d/dx_j of every component
inline Field3 partial(const Field3& u, int j) {
    Spec3 s = forward(u);
    detail::for_modes(u.grid, [&](std::size_t id, double kx, double ky, double kz) {
        double kj = j == 0 ? kx : (j == 1 ? ky : kz);
        for (int c = 0; c < 3; ++c) s.c[c][id] *= cplx(0.0, kj);
    });
    return inverse(s);
}

// advective derivative (a·∇)b, pseudo-spectral
inline Field3 advect(const Field3& a, const Field3& b) {
    Field3 out(a.grid);
    for (int j = 0; j < 3; ++j) {
        Field3 dj = partial(b, j);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < out.v[c].size(); ++i) out.v[c][i] += a.v[j][i] * dj.v[c][i];
    }
    return out;
}

inline double inner_product_l2(const Field3& a, const Field3& b) {
    double s = 0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.v[c].size(); ++i) s += a.v[c][i] * b.v[c][i];
    double h = a.grid.h();
    return s * h * h * h;
}

inline double norm_l2(const Field3& a) { return std::sqrt(inner_product_l2(a, a)); }

// time-stepping plan for the outer Stokes equation
enum class StokesScheme { IntegratingFactor, ImexDiffusion };

struct StokesStepPlan {
    double dt = 1e-3;
    StokesScheme scheme = StokesScheme::IntegratingFactor;
    double cfl = 0.9;  // advective stability fraction; violations reject the step
};

// One step of dψ/dt = Δψ − P F, forcing treated explicitly (trapezoid in the
// integrating-factor variant, forward Euler under implicit diffusion).
// f0 = F(t), f1 = F(t+dt). Throws when the advective CFL bound dt ≤ cfl/(max|ψ| k_max)
// is violated, reporting the largest admissible dt.
inline Field3 step_outer(const Field3& psi, const Field3& f0, const Field3& f1,
                         const StokesStepPlan& plan) {
    if (psi.grid != f0.grid || psi.grid != f1.grid)
        throw std::invalid_argument("step_outer: grid mismatch");
    if (plan.dt <= 0) throw std::invalid_argument("step_outer: dt must be positive");
    double umax = 0;
    for (std::size_t i = 0; i < psi.grid.size(); ++i) {
        double m2 = psi.v[0][i] * psi.v[0][i] + psi.v[1][i] * psi.v[1][i] + psi.v[2][i] * psi.v[2][i];
        umax = std::max(umax, m2);
    }
    umax = std::sqrt(umax);
    double kmax = M_PI / psi.grid.h();
    if (umax > 0) {
        double dt_adm = plan.cfl / (umax * kmax);
        if (plan.dt > dt_adm)
            throw std::runtime_error("step_outer: CFL violation, suggested dt " +
                                     std::to_string(dt_adm));
    }
    auto project = [](const Field3& f) {
        Spec3 s = forward(f);
        leray_inplace(s);
        zero_mean_inplace(s);
        return inverse(s);
    };
    Field3 pf0 = project(f0);
    if (plan.scheme == StokesScheme::IntegratingFactor) {
        Field3 out = psi;
        out.axpy(-0.5 * plan.dt, pf0);
        out = heat_semigroup(out, plan.dt);
        out.axpy(-0.5 * plan.dt, project(f1));
        return out;
    }
    // implicit diffusion, explicit forcing: (I − dtΔ)ψ' = ψ − dt P F(t)
    Field3 rhs = psi;
    rhs.axpy(-plan.dt, pf0);
    Spec3 s = forward(rhs);
    detail::for_modes(psi.grid, [&](std::size_t id, double kx, double ky, double kz) {
        double kk = kx * kx + ky * ky + kz * kz;
        for (int c = 0; c < 3; ++c) s.c[c][id] /= 1.0 + plan.dt * kk;
    });
    return inverse(s);
}

}  // namespace nsglue
