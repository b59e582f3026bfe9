#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nsglue/cutoff.hpp"
#include "nsglue/field.hpp"

namespace nsglue {

// L^p norm of the pointwise Euclidean magnitude, midpoint quadrature.
// Power sums are max-normalized so large p (up to ~100) cannot underflow.
inline double lp_norm(const Field3& u, double p) {
    if (p < 1) throw std::invalid_argument("lp_norm: need p >= 1");
    const Grid3& g = u.grid;
    double m = 0;
    std::vector<double> mag(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double a = std::sqrt(u.v[0][i] * u.v[0][i] + u.v[1][i] * u.v[1][i] + u.v[2][i] * u.v[2][i]);
        mag[i] = a;
        m = std::max(m, a);
    }
    if (m == 0) return 0.0;
    if (std::isinf(p)) return m;
    double s = 0;
    for (double a : mag) s += std::pow(a / m, p);
    double h = g.h();
    return m * std::pow(s * h * h * h, 1.0 / p);
}

// weighted norm ||<xi>^zeta U||_{L^p}; p may be infinity
inline double weighted_norm(const Field3& U, double zeta, double p) {
    if (zeta < 0) throw std::invalid_argument("weighted_norm: need zeta >= 0");
    if (p < 1) throw std::invalid_argument("weighted_norm: need p >= 1");
    const Grid3& g = U.grid;
    double m = 0;
    std::vector<double> mag(g.size());
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                double w = std::pow(1.0 + x * x + y * y + z * z, 0.5 * zeta);
                std::size_t i = g.idx(ix, iy, iz);
                double a = w * std::sqrt(U.v[0][i] * U.v[0][i] + U.v[1][i] * U.v[1][i] +
                                         U.v[2][i] * U.v[2][i]);
                mag[i] = a;
                m = std::max(m, a);
            }
    if (m == 0) return 0.0;
    if (std::isinf(p)) return m;
    double s = 0;
    for (double a : mag) s += std::pow(a / m, p);
    double h = g.h();
    return m * std::pow(s * h * h * h, 1.0 / p);
}

inline double linf_w(const Field3& U) {
    return weighted_norm(U, 4.0, std::numeric_limits<double>::infinity());
}

// X-norm: sup over sampled tau <= taubar of e^{-tau*alpha} ||Phi||_{L^inf_4}
inline double norm_X(const std::vector<ProfileField>& history, double alpha) {
    if (history.empty()) throw std::invalid_argument("norm_X: empty history");
    double s = 0;
    for (const auto& snap : history)
        s = std::max(s, std::exp(-snap.tau * alpha) * linf_w(snap.f));
    return s;
}

namespace detail {

// log of (integral of g(t)^r dt)^{1/r} by trapezoid on the sampled grid,
// computed in log space (r can be ~100).  Returns -inf for identically zero g.
inline double log_lr_time(const std::vector<double>& times, const std::vector<double>& logg,
                          std::size_t count, double r) {
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) lmax = std::max(lmax, logg[j]);
    if (!std::isfinite(lmax)) return lmax;
    double acc = 0;
    for (std::size_t j = 0; j + 1 < count; ++j) {
        double dt = times[j + 1] - times[j];
        double a = std::exp(r * (logg[j] - lmax));
        double b = std::exp(r * (logg[j + 1] - lmax));
        acc += 0.5 * (a + b) * dt;
    }
    if (acc <= 0) return -std::numeric_limits<double>::infinity();
    return lmax + std::log(acc) / r;
}

}  // namespace detail

// Y-norm: sup over sampled s of s^{-beta} ||psi||_{L^r_t L^p_x ((0,s))}
inline double norm_Y(const std::vector<PhysicalField>& history, double beta, double r, double p) {
    if (history.empty()) throw std::invalid_argument("norm_Y: empty history");
    std::vector<double> times, logg;
    for (const auto& snap : history) {
        times.push_back(snap.time);
        double g = lp_norm(snap.f, p);
        logg.push_back(g > 0 ? std::log(g) : -std::numeric_limits<double>::infinity());
    }
    double best = 0;
    for (std::size_t j = 2; j <= history.size(); ++j) {
        double s = times[j - 1];
        double la = detail::log_lr_time(times, logg, j, r);
        if (!std::isfinite(la)) continue;
        best = std::max(best, std::exp(la - beta * std::log(s)));
    }
    return best;
}

struct DyadicYBound {
    double ratio;             // ||t^{-beta'} psi||_{L^r L^p} / ||psi||_{Y^beta}
    double dyadic_constant;   // (sum over dyadic shells 2^{-(beta-beta') k r})^{1/r}
};

inline DyadicYBound dyadic_Y_bound(const std::vector<PhysicalField>& history, double beta,
                                   double beta_prime, double r, double p) {
    if (!(beta_prime < beta && beta_prime > 0))
        throw std::invalid_argument("dyadic_Y_bound: need 0 < beta' < beta");
    double y = norm_Y(history, beta, r, p);
    std::vector<double> times, logg;
    for (const auto& snap : history) {
        times.push_back(snap.time);
        double g = lp_norm(snap.f, p);
        double lg = g > 0 ? std::log(g) - beta_prime * std::log(snap.time)
                          : -std::numeric_limits<double>::infinity();
        logg.push_back(lg);
    }
    double la = detail::log_lr_time(times, logg, times.size(), r);
    DyadicYBound out{};
    out.ratio = (y > 0 && std::isfinite(la)) ? std::exp(la) / y : 0.0;
    double q = std::pow(2.0, -(beta - beta_prime) * r);
    out.dyadic_constant = std::pow(1.0 / (1.0 - q), 1.0 / r);
    return out;
}

// similarity-side quantity of the change-of-measure estimate:
// sup over tau of e^{tau(-beta' - 1/2 + 3/(2p) + 1/r)} ||Psi Ntilde||_{L^p}
inline double similarity_side_bound(const std::vector<ProfileField>& psi_profiles,
                                    const CutoffSpec& cutoff, double beta_prime, double r,
                                    double p) {
    double s = 0;
    for (const auto& snap : psi_profiles) {
        auto nt = sample_Ntilde(cutoff, snap.f.grid, snap.tau);
        double g = lp_norm(multiply(snap.f, nt), p);
        double expo = -beta_prime - 0.5 + 1.5 / p + 1.0 / r;
        s = std::max(s, std::exp(snap.tau * expo) * g);
    }
    return s;
}

}  // namespace nsglue
