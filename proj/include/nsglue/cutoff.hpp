#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nsglue/field.hpp"

namespace nsglue {

// Radial cutoff: eta0 = 1 on |s| <= r0, 0 on |s| >= r1, quintic smoothstep
// (C^2) in between.  In physical variables eta(x,t) = eta0(|x|/t^gamma);
// in similarity variables N(xi,tau) = eta0(|xi| e^{tau(1/2-gamma)}).
struct CutoffSpec {
    double gamma = 0.01;
    double r0 = 2.0;
    double r1 = 3.0;

    CutoffSpec() = default;
    explicit CutoffSpec(double g) : gamma(g) {
        if (!(g > 0 && g < 0.5)) throw std::invalid_argument("cutoff: gamma must be in (0, 1/2)");
    }

    double eta0(double s) const {
        if (s <= r0) return 1.0;
        if (s >= r1) return 0.0;
        double q = (s - r0) / (r1 - r0);
        return 1.0 - q * q * q * (10.0 + q * (-15.0 + 6.0 * q));
    }
    double eta0_prime(double s) const {
        if (s <= r0 || s >= r1) return 0.0;
        double q = (s - r0) / (r1 - r0);
        return -30.0 * q * q * (1.0 - q) * (1.0 - q) / (r1 - r0);
    }
    double eta0_second(double s) const {
        if (s <= r0 || s >= r1) return 0.0;
        double q = (s - r0) / (r1 - r0);
        return -60.0 * q * (1.0 - q) * (1.0 - 2.0 * q) / ((r1 - r0) * (r1 - r0));
    }
};

struct CutoffValue {
    double eta;
    double eta_t;                  // time derivative
    std::array<double, 3> grad;    // spatial gradient
    double lap;                    // Laplacian
};

inline CutoffValue cutoff_eval(const CutoffSpec& spec, double x, double y, double z, double t) {
    if (!(t > 0)) throw std::invalid_argument("cutoff_eval: need t > 0");
    double tg = std::pow(t, spec.gamma);
    double r = std::sqrt(x * x + y * y + z * z);
    double s = r / tg;
    CutoffValue out{};
    out.eta = spec.eta0(s);
    double d1 = spec.eta0_prime(s);
    if (d1 == 0.0 && spec.eta0_second(s) == 0.0) {
        out.eta_t = 0.0;
        out.grad = {0, 0, 0};
        out.lap = 0.0;
        return out;
    }
    double d2 = spec.eta0_second(s);
    out.eta_t = -spec.gamma / t * s * d1;
    double gr = d1 / (tg * (r > 0 ? r : 1.0));
    out.grad = {gr * x, gr * y, gr * z};
    out.lap = (d2 + (r > 0 ? 2.0 * d1 / s : 0.0)) / (tg * tg);
    return out;
}

// similarity-variable cutoffs
inline double cutoff_N(const CutoffSpec& spec, double xi_r, double tau) {
    return spec.eta0(xi_r * std::exp(tau * (0.5 - spec.gamma)));
}
inline double cutoff_Ntilde(const CutoffSpec& spec, double xi_r, double tau) {
    return cutoff_N(spec, xi_r / 3.0, tau);
}

// scalar grid samplers
template <typename F>
inline std::vector<double> sample_scalar(const Grid3& g, F&& f) {
    std::vector<double> out(g.size());
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix)
                out[g.idx(ix, iy, iz)] = f(g.coord(ix), g.coord(iy), g.coord(iz));
    return out;
}

inline std::vector<double> sample_eta(const CutoffSpec& spec, const Grid3& g, double t) {
    return sample_scalar(g, [&](double x, double y, double z) {
        return cutoff_eval(spec, x, y, z, t).eta;
    });
}

inline std::vector<double> sample_N(const CutoffSpec& spec, const Grid3& g, double tau) {
    return sample_scalar(g, [&](double x, double y, double z) {
        return cutoff_N(spec, std::sqrt(x * x + y * y + z * z), tau);
    });
}

inline std::vector<double> sample_Ntilde(const CutoffSpec& spec, const Grid3& g, double tau) {
    return sample_scalar(g, [&](double x, double y, double z) {
        return cutoff_Ntilde(spec, std::sqrt(x * x + y * y + z * z), tau);
    });
}

inline Field3 multiply(const Field3& u, const std::vector<double>& s) {
    Field3 out = u;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < out.v[c].size(); ++i) out.v[c][i] *= s[i];
    return out;
}

}  // namespace nsglue
