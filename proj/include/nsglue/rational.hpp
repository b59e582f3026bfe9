#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace nsglue {

// Exact rational arithmetic on 64-bit numerator/denominator, normalized with
// positive denominator.  Intermediate products go through __int128; overflow of
// the normalized result throws instead of wrapping.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}
    Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

    static Rational from128(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        Rational q;
        q.num = checked_cast(n);
        q.den = checked_cast(d);
        return q;
    }

    double value() const { return double(num) / double(den); }

    Rational operator-() const { Rational q; q.num = -num; q.den = den; return q; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from128(__int128(a.num) * b.den + __int128(b.num) * a.den,
                       __int128(a.den) * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from128(__int128(a.num) * b.num, __int128(a.den) * b.den);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num == 0) throw std::domain_error("rational: division by zero");
        return from128(__int128(a.num) * b.den, __int128(a.den) * b.num);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return __int128(a.num) * b.den < __int128(b.num) * a.den;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& q) { return os << q.str(); }

  private:
    void assign(std::int64_t n, std::int64_t d) {
        Rational q = from128(n, d);
        num = q.num;
        den = q.den;
    }
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        return a < 0 ? -a : a;
    }
    static std::int64_t checked_cast(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational: overflow");
        return std::int64_t(v);
    }
};

}  // namespace nsglue
