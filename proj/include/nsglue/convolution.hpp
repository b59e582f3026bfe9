#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nsglue/fft3.hpp"
#include "nsglue/field.hpp"

namespace nsglue {

// Japanese bracket <r>^{-expo}
inline double bracket_pow(double r, double expo) {
    return std::pow(1.0 + r * r, -0.5 * expo);
}

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol) {
    if (!(b > a)) return 0.0;
    double m = 0.5 * (a + b), fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// integral over [0, infinity): finite part plus an inverted tail
inline double adaptive_halfline(const std::function<double(double)>& f,
                                const std::vector<double>& breaks, double rc, double tol) {
    std::vector<double> bp{0.0};
    for (double b : breaks)
        if (b > 0.0 && b < rc) bp.push_back(b);
    bp.push_back(rc);
    std::sort(bp.begin(), bp.end());
    double s = 0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i)
        s += adaptive_simpson(f, bp[i], bp[i + 1], tol);
    s += adaptive_simpson([&](double t) { return t > 0 ? f(1.0 / t) / (t * t) : 0.0; }, 0.0,
                          1.0 / rc, tol);
    return s;
}

}  // namespace detail

// I_{d,alpha,beta}(delta)(x) = int_{R^d} <x-y>^{-alpha} <y/delta>^{-beta} dy, radially
// reduced and integrated adaptively.  The quadrature is split at the radii where the
// proof of the bound changes regime (|y| = |x|/2 and |y| = 3|x|/2) so the adaptive
// rule resolves each regime separately.
inline double convolution_integral(int d, double alpha, double beta, double delta, double xmag) {
    if (alpha <= d || beta <= d)
        throw std::invalid_argument("convolution integral: need alpha, beta > d");
    if (!(delta > 0.0))
        throw std::invalid_argument("convolution integral: need delta > 0");
    const double u = std::fabs(xmag), tol = 1e-10;
    auto g = [&](double r) { return bracket_pow(r / delta, beta); };
    auto f = [&](double s) { return bracket_pow(s, alpha); };
    double rc = std::max({2.0 * u + 8.0, 8.0 * delta, 8.0});
    std::vector<double> breaks{delta, 0.5 * u, u, 1.5 * u};
    if (d == 1) {
        auto h = [&](double r) { return g(r) * (f(u - r) + f(u + r)); };
        return detail::adaptive_halfline(h, breaks, rc, tol);
    }
    if (d == 2) {
        auto h = [&](double r) {
            double inner = detail::adaptive_simpson(
                [&](double th) {
                    double s2 = u * u + r * r - 2.0 * u * r * std::cos(th);
                    return f(std::sqrt(std::max(s2, 0.0)));
                },
                0.0, M_PI, 1e-2 * tol);
            return 2.0 * r * g(r) * inner;
        };
        return detail::adaptive_halfline(h, breaks, rc, tol);
    }
    if (d == 3) {
        // closed-form angular integral: int s <s>^{-alpha} ds = <s>^{2-alpha}/(2-alpha)
        auto Phi = [&](double s) { return std::pow(1.0 + s * s, 0.5 * (2.0 - alpha)) / (2.0 - alpha); };
        if (u < 1e-12) {
            auto h = [&](double r) { return 4.0 * M_PI * r * r * f(r) * g(r); };
            return detail::adaptive_halfline(h, breaks, rc, tol);
        }
        auto h = [&](double r) {
            return (2.0 * M_PI / u) * r * g(r) * (Phi(u + r) - Phi(std::fabs(u - r)));
        };
        return detail::adaptive_halfline(h, breaks, rc, tol);
    }
    throw std::invalid_argument("convolution integral: d must be 1, 2, or 3");
}

// ratio of the integral to its claimed envelope <x>^{-min(alpha,beta)} delta^d
inline double convolution_bound_ratio(int d, double alpha, double beta, double delta,
                                      double xmag) {
    double I = convolution_integral(d, alpha, beta, delta, xmag);
    double envelope = bracket_pow(xmag, std::min(alpha, beta)) * std::pow(delta, double(d));
    return I / envelope;
}

// discrete convolution of scalar samples with the kernel <y/delta>^{-beta}, computed
// spectrally on the periodic extension of the grid; the kernel decays fast enough
// that the periodic images contribute only at the box-size power
inline std::vector<double> weighted_convolution(const Grid3& g, const std::vector<double>& f,
                                                double delta, double beta) {
    if (f.size() != g.size())
        throw std::invalid_argument("weighted convolution: sample count mismatch");
    if (beta <= 3.0)
        throw std::invalid_argument("weighted convolution: need beta > 3");
    std::vector<double> kernel(g.size());
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                double r = std::sqrt(x * x + y * y + z * z);
                kernel[g.idx(ix, iy, iz)] = bracket_pow(r / delta, beta);
            }
    Fft3& fft = Fft3::get(g.n);
    std::vector<cplx> F, K;
    fft.fwd(f, F);
    fft.fwd(kernel, K);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= K[i];
    std::vector<double> out;
    fft.bwd(F, out);
    double h = g.h();
    double scale = h * h * h;
    int half = g.n / 2;
    std::vector<double> shifted(out.size());
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                int sx = (ix + half) % g.n, sy = (iy + half) % g.n, sz = (iz + half) % g.n;
                shifted[g.idx(sx, sy, sz)] = out[g.idx(ix, iy, iz)] * scale;
            }
    return shifted;
}

}  // namespace nsglue
