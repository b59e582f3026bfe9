#pragma once

#include <cmath>

#include "nsglue/field.hpp"

namespace nsglue {

// C-infinity bump supported in the unit ball, value 1 at the origin.
inline double unit_bump(double r) {
    if (r >= 1.0) return 0.0;
    double r2 = r * r;
    return std::exp(-r2 / (1.0 - r2));
}

// bump'(r)/r, smooth through r = 0
inline double unit_bump_dr_over_r(double r) {
    if (r >= 1.0) return 0.0;
    double om = 1.0 - r * r;
    return -2.0 / (om * om) * unit_bump(r);
}

// Divergence-free swirl supported in the unit ball:
//   U_A = A curl( chi(|xi|) (e3 x xi) ),
// written with q = chi'/r so the axis r = 0 is regular:
//   U = A ( -q z x, -q z y, q (x^2 + y^2) + 2 chi ).
inline Field3 synthetic_background(const Grid3& g, double amplitude) {
    return sample(g, [amplitude](double x, double y, double z) {
        double r = std::sqrt(x * x + y * y + z * z);
        double chi = unit_bump(r), q = unit_bump_dr_over_r(r);
        return std::array<double, 3>{-amplitude * q * z * x, -amplitude * q * z * y,
                                     amplitude * (q * (x * x + y * y) + 2.0 * chi)};
    });
}

// Divergence-free planar swirl rho = (d2 G, -d1 G, 0) with a stream function G
// that is exactly homogeneous of degree -3 outside the unit ball (so |rho| is
// exactly homogeneous of degree -4 there) and a C^2 polynomial match inside:
//   G(s) = s^{-3}            for s >= 1
//   G(s) = 4.375 - 5.25 s^2 + 1.875 s^4   for s < 1.
inline double model_stream(double r) {
    if (r >= 1.0) return std::pow(r, -3.0);
    double r2 = r * r;
    return 4.375 - 5.25 * r2 + 1.875 * r2 * r2;
}

// G'(r)/r, smooth through r = 0
inline double model_stream_dr_over_r(double r) {
    if (r >= 1.0) return -3.0 * std::pow(r, -5.0);
    return -10.5 + 7.5 * r * r;
}

inline Field3 model_profile(const Grid3& g) {
    return sample(g, [](double x, double y, double z) {
        double r = std::sqrt(x * x + y * y + z * z);
        double p = model_stream_dr_over_r(r);
        return std::array<double, 3>{p * y, -p * x, 0.0};
    });
}

}  // namespace nsglue
