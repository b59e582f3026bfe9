#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace nsglue {

enum class GridKind { torus, box };  // box = truncated whole-space (xi variables)

// Uniform periodic grid on [-side/2, side/2)^3, x-fastest storage order.
struct Grid3 {
    int n = 0;
    double side = 0.0;
    GridKind kind = GridKind::torus;

    Grid3() = default;
    Grid3(int n_, double side_, GridKind kind_) : n(n_), side(side_), kind(kind_) {
        if (n < 8 || (n & (n - 1)) != 0) throw std::invalid_argument("grid: n must be a power of two >= 8");
        if (!(side > 0)) throw std::invalid_argument("grid: side must be positive");
    }

    static Grid3 torus(int n) { return Grid3(n, 2.0 * M_PI, GridKind::torus); }
    static Grid3 box(int n, double side = 16.0) { return Grid3(n, side, GridKind::box); }

    std::size_t size() const { return std::size_t(n) * n * n; }
    double h() const { return side / n; }
    double coord(int i) const { return -0.5 * side + h() * i; }
    // smallest signed Fourier index for grid position i (Nyquist mapped to -n/2)
    int mode(int i) const { return i <= n / 2 - 1 ? i : i - n; }
    double wavenumber(int i) const { return 2.0 * M_PI / side * mode(i); }
    std::size_t idx(int ix, int iy, int iz) const {
        return std::size_t(ix) + std::size_t(n) * (std::size_t(iy) + std::size_t(n) * iz);
    }
    bool operator==(const Grid3& o) const { return n == o.n && side == o.side && kind == o.kind; }
    bool operator!=(const Grid3& o) const { return !(*this == o); }
};

}  // namespace nsglue
