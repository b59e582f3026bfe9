#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "nsglue/grid.hpp"

namespace nsglue {

// 3-component real vector field on a Grid3, physical-space values.
struct Field3 {
    Grid3 grid;
    std::array<std::vector<double>, 3> v;

    Field3() = default;
    explicit Field3(const Grid3& g) : grid(g) {
        for (auto& c : v) c.assign(g.size(), 0.0);
    }

    double& at(int c, int ix, int iy, int iz) { return v[c][grid.idx(ix, iy, iz)]; }
    double at(int c, int ix, int iy, int iz) const { return v[c][grid.idx(ix, iy, iz)]; }

    Field3& operator+=(const Field3& o) {
        check(o);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < v[c].size(); ++i) v[c][i] += o.v[c][i];
        return *this;
    }
    Field3& operator-=(const Field3& o) {
        check(o);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < v[c].size(); ++i) v[c][i] -= o.v[c][i];
        return *this;
    }
    Field3& operator*=(double s) {
        for (int c = 0; c < 3; ++c)
            for (auto& x : v[c]) x *= s;
        return *this;
    }
    friend Field3 operator+(Field3 a, const Field3& b) { return a += b; }
    friend Field3 operator-(Field3 a, const Field3& b) { return a -= b; }
    friend Field3 operator*(double s, Field3 a) { return a *= s; }

    void axpy(double s, const Field3& o) {
        check(o);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < v[c].size(); ++i) v[c][i] += s * o.v[c][i];
    }

    double max_abs() const {
        double m = 0;
        for (int c = 0; c < 3; ++c)
            for (double x : v[c]) m = std::max(m, std::fabs(x));
        return m;
    }

  private:
    void check(const Field3& o) const {
        if (grid != o.grid) throw std::invalid_argument("field: grid mismatch");
    }
};

// 3x3-tensor-valued field, entry (i,j) stored at m = 3*i + j.
struct Tensor3 {
    Grid3 grid;
    std::array<std::vector<double>, 9> m;

    Tensor3() = default;
    explicit Tensor3(const Grid3& g) : grid(g) {
        for (auto& c : m) c.assign(g.size(), 0.0);
    }

    Tensor3& operator+=(const Tensor3& o) {
        for (int c = 0; c < 9; ++c)
            for (std::size_t i = 0; i < m[c].size(); ++i) m[c][i] += o.m[c][i];
        return *this;
    }
    Tensor3& operator*=(double s) {
        for (int c = 0; c < 9; ++c)
            for (auto& x : m[c]) x *= s;
        return *this;
    }
};

// a ⊗ b, entry (i,j) = a_i b_j
inline Tensor3 outer(const Field3& a, const Field3& b) {
    Tensor3 t(a.grid);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < a.v[i].size(); ++k) t.m[3 * i + j][k] = a.v[i][k] * b.v[j][k];
    return t;
}

// symmetrized pair a ⊗ b + b ⊗ a
inline Tensor3 outer_sym(const Field3& a, const Field3& b) {
    Tensor3 t(a.grid);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < a.v[i].size(); ++k)
                t.m[3 * i + j][k] = a.v[i][k] * b.v[j][k] + b.v[i][k] * a.v[j][k];
    return t;
}

inline Field3 sample(const Grid3& g, const std::function<std::array<double, 3>(double, double, double)>& f) {
    Field3 u(g);
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                auto val = f(g.coord(ix), g.coord(iy), g.coord(iz));
                std::size_t id = g.idx(ix, iy, iz);
                for (int c = 0; c < 3; ++c) u.v[c][id] = val[c];
            }
    return u;
}

// Time-stamped wrappers.  PhysicalField lives on the torus at time t; ProfileField
// lives on the truncated whole-space grid at tau = log t.
struct PhysicalField {
    Field3 f;
    double time = 1.0;
};

struct ProfileField {
    Field3 f;
    double tau = 0.0;
};

// fraction of the largest |value| found outside 90% of the half-side (truncation warning metric)
inline double boundary_mass_fraction(const Field3& u) {
    const Grid3& g = u.grid;
    double warn_r = 0.9 * 0.5 * g.side;
    double inner = 0, outer = 0;
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                double r = std::sqrt(x * x + y * y + z * z);
                std::size_t id = g.idx(ix, iy, iz);
                double a = 0;
                for (int c = 0; c < 3; ++c) a = std::max(a, std::fabs(u.v[c][id]));
                if (r >= warn_r)
                    outer = std::max(outer, a);
                else
                    inner = std::max(inner, a);
            }
    return inner > 0 ? outer / inner : (outer > 0 ? 1.0 : 0.0);
}

}  // namespace nsglue
