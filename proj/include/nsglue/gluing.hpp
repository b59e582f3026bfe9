#pragma once
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsglue/analytic.hpp"
#include "nsglue/cutoff.hpp"
#include "nsglue/inner.hpp"
#include "nsglue/ledger.hpp"
#include "nsglue/norms.hpp"
#include "nsglue/resample.hpp"
#include "nsglue/spectral.hpp"

namespace nsglue {

// Configuration of one glued run: exponent parameters, the background profile,
// the cutoff, the final time, and the discretization of the two time half-lines.
// The linear profile is driven at the prescribed growth rate lin_rate (the
// parameter "a" of the exponent ledger); with model_lin the eigenfunction is
// replaced by the analytic model profile with exact |xi|^{-4} far field.
struct GluingConfig {
    ExponentParams params;
    Background background;
    CutoffSpec cutoff;
    double tbar = 1.0 / 64.0;
    double tau_span = 2.0;   // tau_min = log(tbar) - tau_span
    int steps_per_unit = 64; // tau steps per unit
    int torus_n = 32;
    double fp_tol = 1e-6;
    int max_iters = 30;
    double lin_rate = 10.0;
    double lin_amp = 1.0;
    bool model_lin = false;

    double tau_bar() const { return std::log(tbar); }
    double tau_min() const { return tau_bar() - tau_span; }
    double dtau() const { return 1.0 / steps_per_unit; }
    int num_nodes() const { return int(std::lround(tau_span * steps_per_unit)) + 1; }
    double node_tau(int j) const { return tau_min() + j * dtau(); }
    // size of the neglected source tail relative to the source at tau_bar
    double truncation_floor() const { return std::exp(-2.0 * lin_rate * tau_span); }
};

inline GluingConfig make_config(const ExponentParams& params, Background bg, double tbar) {
    if (!(tbar > 0 && tbar <= 1)) throw std::invalid_argument("gluing: need tbar in (0, 1]");
    GluingConfig cfg;
    cfg.params = params;
    cfg.background = std::move(bg);
    cfg.cutoff = CutoffSpec(params.gamma.value());
    cfg.tbar = tbar;
    cfg.lin_rate = params.a.value();
    return cfg;
}

// The pair of unknowns on their time grids, with norm bookkeeping.
struct GluingState {
    std::vector<ProfileField> phi_per; // tau nodes ascending to tau_bar
    std::vector<PhysicalField> psi;    // t nodes exp(tau)
    int iterate = 0;
    double X = 0, Y = 0, Z = 0;
    std::vector<double> contraction;
};

// The linear inner profile Re(e^{lambda tau} rho) at the background's own rate.
inline ProfileField phi_lin(const Background& bg, double tau) {
    double b = bg.lambda.imag();
    Field3 u = bg.rho_re;
    u *= std::cos(b * tau);
    u.axpy(-std::sin(b * tau), bg.rho_im);
    u *= std::exp(bg.a * tau);
    return ProfileField{std::move(u), tau};
}

namespace detail {

// engine version of the linear profile: prescribed growth rate, optional
// analytic model eigenfunction
inline Field3 lin_profile(const GluingConfig& cfg, double tau) {
    const Grid3& g = cfg.background.Ubar.f.grid;
    double amp = cfg.lin_amp * std::exp(cfg.lin_rate * tau);
    if (cfg.model_lin) {
        Field3 u = model_profile(g);
        u *= amp;
        return u;
    }
    double b = cfg.background.lambda.imag();
    Field3 u = cfg.background.rho_re;
    u *= std::cos(b * tau);
    u.axpy(-std::sin(b * tau), cfg.background.rho_im);
    u *= amp;
    return u;
}

// T_ij += sign * w * u_i v_j  (w optional)
inline void add_outer(Tensor3& T, const Field3& u, const Field3& v, const std::vector<double>* w,
                      double sign) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            std::vector<double>& t = T.m[3 * i + j];
            const std::vector<double>& a = u.v[i];
            const std::vector<double>& b = v.v[j];
            if (w)
                for (std::size_t k = 0; k < t.size(); ++k) t[k] += sign * (*w)[k] * a[k] * b[k];
            else
                for (std::size_t k = 0; k < t.size(); ++k) t[k] += sign * a[k] * b[k];
        }
}

struct CutoffSamples {
    std::vector<double> eta, eta_t, lap;
    std::array<std::vector<double>, 3> grad;
};

inline CutoffSamples sample_cutoff(const CutoffSpec& spec, const Grid3& g, double t) {
    CutoffSamples s;
    std::size_t n = g.size();
    s.eta.resize(n);
    s.eta_t.resize(n);
    s.lap.resize(n);
    for (int c = 0; c < 3; ++c) s.grad[c].resize(n);
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                std::size_t id = g.idx(ix, iy, iz);
                CutoffValue v = cutoff_eval(spec, g.coord(ix), g.coord(iy), g.coord(iz), t);
                s.eta[id] = v.eta;
                s.eta_t[id] = v.eta_t;
                s.lap[id] = v.lap;
                for (int c = 0; c < 3; ++c) s.grad[c][id] = v.grad[c];
            }
    return s;
}

// (a . w) b  for a vector field a, gradient samples w, vector field b
inline Field3 dot_grad_times(const Field3& a, const CutoffSamples& cs, const Field3& b) {
    Field3 out(a.grid);
    for (std::size_t k = 0; k < a.grid.size(); ++k) {
        double d = a.v[0][k] * cs.grad[0][k] + a.v[1][k] * cs.grad[1][k] + a.v[2][k] * cs.grad[2][k];
        for (int c = 0; c < 3; ++c) out.v[c][k] = d * b.v[c][k];
    }
    return out;
}

} // namespace detail

// Which of the three source groups (constant, linear, bilinear) to assemble.
struct TermMask {
    bool G = true, L = true, B = true;
};

// Operand of P div on the right-hand side of the perturbed-profile equation:
// the sum of the seven tensor products, with its overall sign such that
// d_tau Phi_per - Lss Phi_per = P div (result).  psi_tilde is the outer field
// transformed to similarity variables and already multiplied by the wide
// cutoff, which realizes every product "Ntilde Psi" with a single factor.
inline Tensor3 build_inner_rhs(const GluingConfig& cfg, const Field3& lin, const Field3& per,
                               const Field3& psi_tilde, double tau, TermMask mask = {}) {
    const Grid3& g = cfg.background.Ubar.f.grid;
    if (lin.grid != g || per.grid != g || psi_tilde.grid != g)
        throw std::invalid_argument("build_inner_rhs: grid mismatch");
    std::vector<double> N = sample_N(cfg.cutoff, g, tau);
    Tensor3 T(g);
    if (mask.L) {
        detail::add_outer(T, lin, per, &N, -1.0);       // L1
        detail::add_outer(T, per, lin, &N, -1.0);
        detail::add_outer(T, lin, psi_tilde, nullptr, -1.0); // L2 (cutoff inside psi_tilde)
        detail::add_outer(T, psi_tilde, lin, nullptr, -1.0);
        detail::add_outer(T, cfg.background.Ubar.f, psi_tilde, nullptr, -1.0); // L3
        detail::add_outer(T, psi_tilde, cfg.background.Ubar.f, nullptr, -1.0);
    }
    if (mask.B) {
        detail::add_outer(T, per, per, &N, -1.0);       // B1
        detail::add_outer(T, per, psi_tilde, nullptr, -1.0); // B2
        detail::add_outer(T, psi_tilde, per, nullptr, -1.0);
    }
    if (mask.G) detail::add_outer(T, lin, lin, &N, -1.0); // G
    return T;
}

namespace detail {

inline std::vector<ProfileField> zero_profile_history(const GluingConfig& cfg) {
    const Grid3& g = cfg.background.Ubar.f.grid;
    std::vector<ProfileField> h;
    h.reserve(cfg.num_nodes());
    for (int j = 0; j < cfg.num_nodes(); ++j) h.push_back({Field3(g), cfg.node_tau(j)});
    return h;
}

inline std::vector<PhysicalField> zero_physical_history(const GluingConfig& cfg) {
    Grid3 go = Grid3::torus(cfg.torus_n);
    std::vector<PhysicalField> h;
    h.reserve(cfg.num_nodes());
    for (int j = 0; j < cfg.num_nodes(); ++j) h.push_back({Field3(go), std::exp(cfg.node_tau(j))});
    return h;
}

// Psi_tilde at node j: outer snapshot to the xi-grid, then the wide cutoff
inline Field3 psi_tilde_at(const GluingConfig& cfg, const GluingState& state, int j) {
    const Grid3& g = cfg.background.Ubar.f.grid;
    ProfileField Psi = to_similarity(state.psi[j], g);
    return multiply(Psi.f, sample_Ntilde(cfg.cutoff, g, cfg.node_tau(j)));
}

// Forced linear inner evolution from zero data at tau_min.  Left-endpoint
// Duhamel with the forcing applied BEFORE the exact discrete semigroup of the
// step: the P div forcing is singular in the weighted sup norm (its raw size
// grows like e^{a tau} against the space's e^{alpha tau} with alpha > a) and
// only its smoothed integral is bounded, so an endpoint term added after the
// semigroup (trapezoid style) would blow up the X norm at the early nodes.
inline std::vector<ProfileField> inner_solve(const GluingConfig& cfg, const GluingState& state,
                                             TermMask mask) {
    int J = cfg.num_nodes();
    double dt = cfg.dtau();
    std::vector<ProfileField> out = zero_profile_history(cfg);
    for (int j = 0; j + 1 < J; ++j) {
        double tau0 = cfg.node_tau(j);
        Field3 rhs = pdiv(build_inner_rhs(cfg, lin_profile(cfg, tau0), state.phi_per[j].f,
                                          psi_tilde_at(cfg, state, j), tau0, mask));
        Field3 stage = out[j].f;
        stage.axpy(dt, rhs);
        out[j + 1].f = semigroup_Lss(stage, dt, cfg.background);
    }
    return out;
}

// forced outer Stokes evolution: the gradient part solves the inhomogeneous
// divergence exactly (cancelling div(eta phi) spectrally), the divergence-free
// part integrates the projected forcing from zero data at t_min
inline std::vector<PhysicalField> outer_solve(const GluingConfig& cfg, const GluingState& state,
                                              TermMask mask) {
    int J = cfg.num_nodes();
    Grid3 go = Grid3::torus(cfg.torus_n);
    std::vector<PhysicalField> out = zero_physical_history(cfg);
    std::vector<Field3> psi_div(J, Field3(go));
    std::vector<Field3> forcing(J, Field3(go));
    for (int j = 0; j < J; ++j) {
        double tau = cfg.node_tau(j), t = std::exp(tau);
        CutoffSamples cs = sample_cutoff(cfg.cutoff, go, t);
        Field3 lin = from_similarity({lin_profile(cfg, tau), tau}, t, go).f;
        Field3 per = from_similarity(state.phi_per[j], t, go).f;
        const Field3& psi_old = state.psi[j].f;
        Field3 F(go);
        Field3 phi_div(go); // the phi whose divergence constraint this iterate carries
        if (mask.G) {
            Field3 t1 = lin;
            for (int c = 0; c < 3; ++c)
                for (std::size_t k = 0; k < go.size(); ++k)
                    t1.v[c][k] *= cs.eta_t[k] + cs.lap[k];
            F += t1;
            Tensor3 T(go);
            for (int i = 0; i < 3; ++i)
                for (int jj = 0; jj < 3; ++jj)
                    for (std::size_t k = 0; k < go.size(); ++k)
                        T.m[3 * i + jj][k] = lin.v[i][k] * cs.grad[jj][k];
            Field3 d = tensor_divergence(T);
            F.axpy(-2.0, d);
            phi_div += lin;
        }
        if (mask.L) {
            Field3 t1 = per;
            for (int c = 0; c < 3; ++c)
                for (std::size_t k = 0; k < go.size(); ++k)
                    t1.v[c][k] *= cs.eta_t[k] + cs.lap[k];
            F += t1;
            Tensor3 T(go);
            for (int i = 0; i < 3; ++i)
                for (int jj = 0; jj < 3; ++jj)
                    for (std::size_t k = 0; k < go.size(); ++k)
                        T.m[3 * i + jj][k] = per.v[i][k] * cs.grad[jj][k];
            Field3 d = tensor_divergence(T);
            F.axpy(-2.0, d);
            F += dot_grad_times(psi_old, cs, lin);
            phi_div += per;
        }
        if (mask.B) {
            F += tensor_divergence(outer(psi_old, psi_old));
            F += dot_grad_times(psi_old, cs, per);
        }
        forcing[j] = std::move(F);
        // psi_div = -grad Laplacian^{-1} div(eta phi): cancels the discrete
        // divergence of eta phi exactly (equals -grad Lap^{-1}(grad eta . phi)
        // in the continuum since div phi = 0)
        Field3 eta_phi = multiply(phi_div, cs.eta);
        std::vector<double> h = divergence_scalar(eta_phi);
        for (double& x : h) x = -x;
        psi_div[j] = stokes_div_solve(go, h, 1e-8);
    }
    Field3 w(go);
    out[0].f = psi_div[0];
    for (int j = 0; j + 1 < J; ++j) {
        double t0 = std::exp(cfg.node_tau(j)), t1 = std::exp(cfg.node_tau(j + 1));
        StokesStepPlan plan;
        plan.dt = t1 - t0;
        w = step_outer(w, forcing[j], forcing[j + 1], plan);
        out[j + 1].f = psi_div[j + 1];
        out[j + 1].f += w;
    }
    return out;
}

} // namespace detail

inline GluingState zero_state(const GluingConfig& cfg) {
    GluingState s;
    s.phi_per = detail::zero_profile_history(cfg);
    s.psi = detail::zero_physical_history(cfg);
    return s;
}

inline double state_X(const GluingConfig& cfg, const std::vector<ProfileField>& h) {
    return norm_X(h, cfg.params.alpha.value());
}

inline double state_Y(const GluingConfig& cfg, const std::vector<PhysicalField>& h) {
    return norm_Y(h, cfg.params.beta.value(), cfg.params.r.value(), cfg.params.p.value());
}

inline double z_distance(const GluingConfig& cfg, const GluingState& a, const GluingState& b) {
    std::vector<ProfileField> dp = a.phi_per;
    for (std::size_t j = 0; j < dp.size(); ++j) dp[j].f.axpy(-1.0, b.phi_per[j].f);
    std::vector<PhysicalField> dq = a.psi;
    for (std::size_t j = 0; j < dq.size(); ++j) dq[j].f.axpy(-1.0, b.psi[j].f);
    return state_X(cfg, dp) + state_Y(cfg, dq);
}

// one Picard sweep: state' = G + L[state] + B[state]
inline GluingState picard_step(const GluingState& state, const GluingConfig& cfg) {
    GluingState next;
    next.phi_per = detail::inner_solve(cfg, state, TermMask{});
    next.psi = detail::outer_solve(cfg, state, TermMask{});
    next.iterate = state.iterate + 1;
    next.X = state_X(cfg, next.phi_per);
    next.Y = state_Y(cfg, next.psi);
    next.Z = next.X + next.Y;
    next.contraction = state.contraction;
    return next;
}

// the six component maps evaluated at a state, for rate studies
struct PicardComponents {
    std::vector<ProfileField> Gi, Li, Bi;
    std::vector<PhysicalField> Go, Lo, Bo;
};

inline PicardComponents picard_components(const GluingConfig& cfg, const GluingState& state) {
    PicardComponents c;
    c.Gi = detail::inner_solve(cfg, state, TermMask{true, false, false});
    c.Li = detail::inner_solve(cfg, state, TermMask{false, true, false});
    c.Bi = detail::inner_solve(cfg, state, TermMask{false, false, true});
    c.Go = detail::outer_solve(cfg, state, TermMask{true, false, false});
    c.Lo = detail::outer_solve(cfg, state, TermMask{false, true, false});
    c.Bo = detail::outer_solve(cfg, state, TermMask{false, false, true});
    return c;
}

struct SolveReport {
    GluingState state;
    bool converged = false;
    bool ball_exceeded = false;
    int iterations = 0;
    double final_delta = 0;
    // per iterate: X, Y, Z, delta to previous, contraction ratio
    std::vector<std::array<double, 5>> history;
    std::string diagnostics;
};

inline SolveReport solve(const GluingConfig& cfg, const GluingState* initial = nullptr) {
    SolveReport rep;
    GluingState state = initial ? *initial : zero_state(cfg);
    double prev_delta = 0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        GluingState next = picard_step(state, cfg);
        double delta = z_distance(cfg, next, state);
        double ratio = prev_delta > 0 ? delta / prev_delta : 0.0;
        if (prev_delta > 0) next.contraction.push_back(ratio);
        rep.history.push_back({next.X, next.Y, next.Z, delta, ratio});
        rep.iterations = it + 1;
        rep.final_delta = delta;
        state = std::move(next);
        if (state.Z > 1.0) {
            rep.ball_exceeded = true;
            rep.diagnostics = "iterate left the unit ball (Z=" + std::to_string(state.Z) +
                              "); final time too large";
            break;
        }
        if (delta <= cfg.fp_tol) {
            rep.converged = true;
            break;
        }
        prev_delta = delta;
    }
    if (!rep.converged && !rep.ball_exceeded)
        rep.diagnostics = "no contraction to fp_tol within max_iters (last delta " +
                          std::to_string(rep.final_delta) + ")";
    rep.state = std::move(state);
    return rep;
}

// steady-state forcing of the background profile:
// Fbar = P[-(1/2)(1 + xi.grad) Ubar - Lap Ubar + Ubar.grad Ubar]
inline ProfileField compute_forcing(const Background& bg) {
    const Field3& U = bg.Ubar.f;
    Field3 F = drift_term(U);
    F += U;
    F *= -0.5;
    F.axpy(-1.0, laplacian(U));
    F += advect(U, U);
    return ProfileField{leray_project(F), 0.0};
}

// physical forcing at time t: f = t^{-3/2} Fbar(x / sqrt t)
inline PhysicalField physical_forcing(const ProfileField& Fbar, double t, const Grid3& torus_grid) {
    return force_from_similarity(Fbar, t, torus_grid);
}

// nonlinear similarity-variable evolution with steady forcing, used for the
// self-consistency check that Ubar stays put under compute_forcing's Fbar.
// Stepped in physical variables from t = 1 like the linear semigroup.
inline ProfileField evolve_similarity_ns(const ProfileField& U0, const ProfileField& Fbar,
                                         double tau, int nsub = 0) {
    const Grid3& g = U0.f.grid;
    double tN = std::exp(tau);
    double umax = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double m2 = 0;
        for (int c = 0; c < 3; ++c) m2 += U0.f.v[c][i] * U0.f.v[c][i];
        umax = std::max(umax, std::sqrt(m2));
    }
    double k_edge = 2.0 * M_PI / (3.0 * g.h());
    double dt_stab = umax > 0 ? 0.3 / (umax * k_edge) : 0.01;
    if (nsub <= 0) nsub = std::max(32, int(std::ceil((tN - 1.0) / dt_stab)));
    double dt = (tN - 1.0) / nsub;
    Field3 u = U0.f;
    auto rhs = [&](const Field3& v, double t) {
        Field3 r = pdiv(outer(v, v));
        r *= -1.0;
        double st = std::sqrt(t);
        r.axpy(1.0, resample(Fbar.f, g, 1.0 / st, 1.0 / (st * st * st)));
        return r;
    };
    for (int k = 0; k < nsub; ++k) {
        double t0 = 1.0 + k * dt, t1 = t0 + dt;
        // Heun step with exact heat factor
        Field3 k1 = rhs(u, t0);
        Field3 pred = u;
        pred.axpy(dt, k1);
        pred = heat_semigroup(pred, dt);
        Field3 k2 = rhs(pred, t1);
        Field3 un = u;
        un.axpy(0.5 * dt, k1);
        un = heat_semigroup(un, dt);
        un.axpy(0.5 * dt, k2);
        u = std::move(un);
    }
    double st = std::sqrt(tN);
    return ProfileField{resample(u, g, st, st), U0.tau + tau};
}

// the assembled ansatz u = ubar + eta phi + psi and its forcing
struct Assembled {
    std::vector<PhysicalField> u;
    std::vector<PhysicalField> f;
    double div_max = 0; // max spectral divergence of eta phi + psi over nodes
};

inline Assembled assemble(const GluingConfig& cfg, const GluingState& state) {
    Assembled out;
    Grid3 go = Grid3::torus(cfg.torus_n);
    ProfileField Fbar = compute_forcing(cfg.background);
    int J = cfg.num_nodes();
    for (int j = 0; j < J; ++j) {
        double tau = cfg.node_tau(j), t = std::exp(tau);
        detail::CutoffSamples cs = detail::sample_cutoff(cfg.cutoff, go, t);
        Field3 phi = from_similarity({detail::lin_profile(cfg, tau), tau}, t, go).f;
        phi += from_similarity(state.phi_per[j], t, go).f;
        Field3 corr = multiply(phi, cs.eta);
        corr += state.psi[j].f;
        out.div_max = std::max(out.div_max, divergence_max(corr));
        Field3 u = from_similarity(cfg.background.Ubar, t, go).f;
        u += corr;
        out.u.push_back({std::move(u), t});
        out.f.push_back(physical_forcing(Fbar, t, go));
    }
    return out;
}

// max over interior stored times of the L2 norm of the projected Navier-Stokes
// residual d_t u + P div(u x u) - Lap u - P f (time derivative by nonuniform
// centered differences)
inline double full_residual(const std::vector<PhysicalField>& u,
                            const std::vector<PhysicalField>& f) {
    if (u.size() < 3 || u.size() != f.size())
        throw std::invalid_argument("full_residual: need matching histories of length >= 3");
    double worst = 0;
    for (std::size_t j = 1; j + 1 < u.size(); ++j) {
        double hm = u[j].time - u[j - 1].time, hp = u[j + 1].time - u[j].time;
        // nonuniform 3-point first derivative
        Field3 r = u[j + 1].f;
        r *= hm / (hp * (hm + hp));
        r.axpy((hp - hm) / (hp * hm), u[j].f);
        r.axpy(-hp / (hm * (hm + hp)), u[j - 1].f);
        r += pdiv(outer(u[j].f, u[j].f));
        r.axpy(-1.0, laplacian(u[j].f));
        r.axpy(-1.0, leray_project(f[j].f));
        r = leray_project(r);
        worst = std::max(worst, norm_l2(r));
    }
    return worst;
}

// Independent check of the algebraic splitting of the full equation into
// eta * (inner) + (outer): both sides built from the same constituents with
// spectral derivatives and analytic cutoff derivatives; equal up to the
// spatial discretization error of the products, provided the background is
// supported where eta = 1.  Time-derivative terms of phi and psi cancel
// identically on both sides and are omitted.
inline double splitting_identity_gap(const Field3& ubar, const Field3& phi, const Field3& psi,
                                     const CutoffSpec& spec, double t) {
    const Grid3& g = ubar.grid;
    detail::CutoffSamples cs = detail::sample_cutoff(spec, g, t);
    Field3 eta_phi = multiply(phi, cs.eta);
    // full equation, spatial terms (plus phi d_t eta)
    Field3 full = multiply(phi, cs.eta_t);
    full.axpy(-1.0, laplacian(eta_phi));
    full.axpy(-1.0, laplacian(psi));
    full += advect(ubar, eta_phi);
    full += advect(eta_phi, ubar);
    full += advect(eta_phi, eta_phi);
    full += advect(ubar, psi);
    full += advect(psi, ubar);
    full += advect(eta_phi, psi);
    full += advect(psi, eta_phi);
    full += advect(psi, psi);
    // inner equation, spatial terms
    Field3 inner = laplacian(phi);
    inner *= -1.0;
    inner += advect(ubar, phi);
    inner += advect(phi, ubar);
    inner += advect(phi, eta_phi);
    inner += advect(phi, psi);
    inner += advect(psi, phi);
    inner += advect(ubar, psi);
    inner += advect(psi, ubar);
    // outer equation, spatial terms
    Field3 outer_eq = laplacian(psi);
    outer_eq *= -1.0;
    outer_eq += advect(psi, psi);
    Field3 t1 = phi;
    for (int c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < g.size(); ++k)
            t1.v[c][k] *= cs.eta_t[k] - cs.lap[k];
    outer_eq += t1;
    for (int jdir = 0; jdir < 3; ++jdir) {
        Field3 dphi = partial(phi, jdir);
        for (int c = 0; c < 3; ++c)
            for (std::size_t k = 0; k < g.size(); ++k)
                outer_eq.v[c][k] -= 2.0 * dphi.v[c][k] * cs.grad[jdir][k];
    }
    outer_eq += detail::dot_grad_times(psi, cs, phi);
    Field3 gap = full;
    gap.axpy(-1.0, multiply(inner, cs.eta));
    gap.axpy(-1.0, outer_eq);
    gap = leray_project(gap);
    Field3 ref = leray_project(full);
    double denom = norm_l2(ref);
    return denom > 0 ? norm_l2(gap) / denom : norm_l2(gap);
}

// margins ||(Phi N + Psi_tilde)(tau_k)||_{L^p} e^{-a tau_k} along the stored
// tau nodes (ascending); bounded below by a positive constant iff the linear
// profile survives the corrections
inline std::vector<std::pair<double, double>> nontriviality_margin(const GluingConfig& cfg,
                                                                   const GluingState& state) {
    const Grid3& g = cfg.background.Ubar.f.grid;
    double p = cfg.params.p.value();
    std::vector<std::pair<double, double>> out;
    for (int j = 0; j < cfg.num_nodes(); ++j) {
        double tau = cfg.node_tau(j);
        Field3 Phi = detail::lin_profile(cfg, tau);
        Phi += state.phi_per[j].f;
        Field3 m = multiply(Phi, sample_N(cfg.cutoff, g, tau));
        m += to_similarity(state.psi[j], g).f;
        out.push_back({tau, lp_norm(m, p) * std::exp(-cfg.lin_rate * tau)});
    }
    return out;
}

// energy balance gap |d/dt (1/2)||u||^2 + ||grad u||^2 - <f,u>| at interior
// stored times (time derivative by nonuniform centered differences)
inline double energy_balance_gap(const std::vector<PhysicalField>& u,
                                 const std::vector<PhysicalField>& f) {
    if (u.size() < 3 || u.size() != f.size())
        throw std::invalid_argument("energy_balance_gap: need matching histories of length >= 3");
    std::vector<double> e(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        double n = norm_l2(u[j].f);
        e[j] = 0.5 * n * n;
    }
    double worst = 0;
    for (std::size_t j = 1; j + 1 < u.size(); ++j) {
        double hm = u[j].time - u[j - 1].time, hp = u[j + 1].time - u[j].time;
        double dedt = (hm / (hp * (hm + hp))) * e[j + 1] + ((hp - hm) / (hp * hm)) * e[j] -
                      (hp / (hm * (hm + hp))) * e[j - 1];
        double grad2 = 0;
        for (int jdir = 0; jdir < 3; ++jdir) {
            double n = norm_l2(partial(u[j].f, jdir));
            grad2 += n * n;
        }
        double work = inner_product_l2(f[j].f, u[j].f);
        worst = std::max(worst, std::fabs(dedt + grad2 - work));
    }
    return worst;
}

} // namespace nsglue
