#pragma once

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "nsglue/field.hpp"

namespace nsglue {

namespace detail {

// Dense evaluation matrix for the trigonometric interpolant of a periodic
// uniform line: T[a*ns + j] maps source samples at x_j to values at points
// y_a = scale * xdst_a.  Nyquist handled as a pure cosine (real data).
inline const std::vector<double>& resample_matrix(int ns, double Ls, int nd, double Ld,
                                                  double scale, bool zero_outside) {
    using Key = std::tuple<int, double, int, double, double, bool>;
    static std::map<Key, std::vector<double>> cache;
    Key key{ns, Ls, nd, Ld, scale, zero_outside};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::vector<double> T(std::size_t(nd) * ns);
    const double k0 = 2.0 * M_PI / Ls;
    const double hs = Ls / ns, hd = Ld / nd;
    for (int a = 0; a < nd; ++a) {
        double y = scale * (-0.5 * Ld + hd * a);
        if (zero_outside && (y < -0.5 * Ls || y >= 0.5 * Ls)) continue;  // row stays zero
        for (int j = 0; j < ns; ++j) {
            double d = y - (-0.5 * Ls + hs * j);
            double s = 1.0;  // m = 0 term
            for (int m = 1; m < ns / 2; ++m) s += 2.0 * std::cos(m * k0 * d);
            s += std::cos((ns / 2) * k0 * d);
            T[std::size_t(a) * ns + j] = s / ns;
        }
    }
    return cache.emplace(key, std::move(T)).first->second;
}

}  // namespace detail

// Evaluate the band-limited interpolant of src at the points scale * x for every
// dst grid point x, times amplitude.  Exact for band-limited data.  A torus
// source wraps around (genuinely periodic data); a box source — a truncated
// whole-space field — is extended by zero outside its domain instead.
inline Field3 resample(const Field3& src, const Grid3& dst, double scale, double amplitude) {
    const int ns = src.grid.n, nd = dst.n;
    const bool zero_outside = src.grid.kind == GridKind::box;
    const auto& T =
        detail::resample_matrix(ns, src.grid.side, nd, dst.side, scale, zero_outside);

    Field3 out(dst);
    // stage buffers: (x-stage) nd x ns x ns -> (y-stage) nd x nd x ns -> (z-stage) nd^3
    std::vector<double> s1(std::size_t(nd) * ns * ns), s2(std::size_t(nd) * nd * ns);
    for (int c = 0; c < 3; ++c) {
        const auto& in = src.v[c];
        // x-axis: in[j + ns*(y + ns*z)] -> s1[a + nd*(y + ns*z)]
        for (std::size_t line = 0; line < std::size_t(ns) * ns; ++line) {
            const double* ip = in.data() + line * ns;
            double* op = s1.data() + line * nd;
            for (int a = 0; a < nd; ++a) {
                const double* tr = T.data() + std::size_t(a) * ns;
                double acc = 0;
                for (int j = 0; j < ns; ++j) acc += tr[j] * ip[j];
                op[a] = acc;
            }
        }
        // y-axis: s1[a + nd*(j + ns*z)] -> s2[a + nd*(b + nd*z)]
        for (int z = 0; z < ns; ++z)
            for (int b = 0; b < nd; ++b) {
                const double* tr = T.data() + std::size_t(b) * ns;
                double* op = s2.data() + std::size_t(nd) * (b + std::size_t(nd) * z);
                for (int a = 0; a < nd; ++a) op[a] = 0;
                for (int j = 0; j < ns; ++j) {
                    const double* ip = s1.data() + std::size_t(nd) * (j + std::size_t(ns) * z);
                    double w = tr[j];
                    if (w == 0) continue;
                    for (int a = 0; a < nd; ++a) op[a] += w * ip[a];
                }
            }
        // z-axis: s2[a + nd*(b + nd*j)] -> out[a + nd*(b + nd*cz)]
        auto& ov = out.v[c];
        for (int cz = 0; cz < nd; ++cz) {
            const double* tr = T.data() + std::size_t(cz) * ns;
            double* op = ov.data() + std::size_t(nd) * nd * cz;
            for (std::size_t q = 0; q < std::size_t(nd) * nd; ++q) op[q] = 0;
            for (int j = 0; j < ns; ++j) {
                const double* ip = s2.data() + std::size_t(nd) * nd * j;
                double w = tr[j];
                if (w == 0) continue;
                for (std::size_t q = 0; q < std::size_t(nd) * nd; ++q) op[q] += w * ip[q];
            }
        }
        for (auto& x : ov) x *= amplitude;
    }
    return out;
}

// Similarity transforms: u(x,t) = t^{-1/2} U(x/sqrt(t), log t) for velocities,
// f(x,t) = t^{-3/2} F(x/sqrt(t), log t) for forces.
inline ProfileField to_similarity(const PhysicalField& u, const Grid3& xi_grid) {
    if (!(u.time > 0)) throw std::invalid_argument("to_similarity: need t > 0");
    double st = std::sqrt(u.time);
    return ProfileField{resample(u.f, xi_grid, st, st), std::log(u.time)};
}

inline PhysicalField from_similarity(const ProfileField& U, double t, const Grid3& torus_grid) {
    if (!(t > 0)) throw std::invalid_argument("from_similarity: need t > 0");
    double st = std::sqrt(t);
    return PhysicalField{resample(U.f, torus_grid, 1.0 / st, 1.0 / st), t};
}

inline ProfileField force_to_similarity(const PhysicalField& f, const Grid3& xi_grid) {
    if (!(f.time > 0)) throw std::invalid_argument("force_to_similarity: need t > 0");
    double st = std::sqrt(f.time);
    return ProfileField{resample(f.f, xi_grid, st, st * st * st), std::log(f.time)};
}

inline PhysicalField force_from_similarity(const ProfileField& F, double t, const Grid3& torus_grid) {
    if (!(t > 0)) throw std::invalid_argument("force_from_similarity: need t > 0");
    double st = std::sqrt(t);
    return PhysicalField{resample(F.f, torus_grid, 1.0 / st, 1.0 / (st * st * st)), t};
}

}  // namespace nsglue
