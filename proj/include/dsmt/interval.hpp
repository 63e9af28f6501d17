/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "dsmt/rational.hpp"

namespace dsmt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Double enclosure of pi: kPiLo < pi < kPiHi.
inline constexpr double kPiLo = 3.14159265358979311600; // 0x1.921fb54442d18p+1
inline const double kPiHi = std::nextafter(kPiLo, kInf);

inline double next_up(double x) {
    if (x == kInf) return x;
    return std::nextafter(x, kInf);
}
inline double next_down(double x) {
    if (x == -kInf) return x;
    return std::nextafter(x, -kInf);
}

namespace detail {

// Directed rounding from round-to-nearest results. For + and * the exact
// error term is recoverable (TwoSum / FMA), so exact results stay exact.
inline double add_down(double a, double b) {
    double s = a + b;
    if (std::isinf(a) || std::isinf(b)) return s; // exact in extended arithmetic
    if (s == kInf) return std::numeric_limits<double>::max();
    if (s == -kInf) return s;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return err < 0 ? next_down(s) : s;
}
inline double add_up(double a, double b) {
    double s = a + b;
    if (std::isinf(a) || std::isinf(b)) return s;
    if (s == -kInf) return std::numeric_limits<double>::lowest();
    if (s == kInf) return s;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return err > 0 ? next_up(s) : s;
}
inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

// 0 * inf is treated as 0: it only arises for a factor that is exactly the
// point {0}, whose true product set is {0}.
inline double mul_down(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    double p = a * b;
    if (std::isinf(a) || std::isinf(b)) return p;
    if (p == kInf) return std::numeric_limits<double>::max();
    if (p == -kInf) return p;
    double err = std::fma(a, b, -p);
    return err < 0 ? next_down(p) : p;
}
inline double mul_up(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    double p = a * b;
    if (std::isinf(a) || std::isinf(b)) return p;
    if (p == -kInf) return std::numeric_limits<double>::lowest();
    if (p == kInf) return p;
    double err = std::fma(a, b, -p);
    return err > 0 ? next_up(p) : p;
}
inline double div_down(double a, double b) {
    if (a == 0.0) return 0.0;
    if (std::isinf(a) || std::isinf(b)) return a / b;
    double q = a / b;
    if (q == kInf) return std::numeric_limits<double>::max();
    if (q == -kInf) return q;
    double err = std::fma(q, b, -a); // q*b - a, exact
    // err and b share sign info: true quotient < q iff q*b > a (for b > 0).
    bool too_big = (b > 0) ? (err > 0) : (err < 0);
    return too_big ? next_down(q) : q;
}
inline double div_up(double a, double b) {
    if (a == 0.0) return 0.0;
    if (std::isinf(a) || std::isinf(b)) return a / b;
    double q = a / b;
    if (q == -kInf) return std::numeric_limits<double>::lowest();
    if (q == kInf) return q;
    double err = std::fma(q, b, -a);
    bool too_small = (b > 0) ? (err < 0) : (err > 0);
    return too_small ? next_up(q) : q;
}

// libm transcendentals are not correctly rounded; glibc documents <= 1 ulp
// for exp/sin/cos/log/asin/acos, so a single outward step covers the error.
inline double step_out_down(double x, int steps = 1) {
    for (int i = 0; i < steps; ++i) x = next_down(x);
    return x;
}
inline double step_out_up(double x, int steps = 1) {
    for (int i = 0; i < steps; ++i) x = next_up(x);
    return x;
}

} // namespace detail

/// Closed interval with double endpoints; the empty interval is the
/// distinguished value [+inf, -inf].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double l, double h) : lo(l), hi(h) {}
    explicit Interval(double point) : lo(point), hi(point) {}

    static Interval empty() { return Interval(kInf, -kInf); }
    static Interval entire() { return Interval(-kInf, kInf); }

    bool is_empty() const { return !(lo <= hi); }
    bool is_point() const { return lo == hi; }
    bool is_bounded() const { return !is_empty() && std::isfinite(lo) && std::isfinite(hi); }

    double width() const {
        if (is_empty()) return 0.0;
        double w = detail::sub_up(hi, lo);
        return w < 0 ? 0.0 : w;
    }
    double mid() const {
        assert(!is_empty());
        if (lo == -kInf && hi == kInf) return 0.0;
        if (lo == -kInf) return std::numeric_limits<double>::lowest();
        if (hi == kInf) return std::numeric_limits<double>::max();
        double m = 0.5 * lo + 0.5 * hi;
        if (m < lo) m = lo;
        if (m > hi) m = hi;
        return m;
    }
    double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }

    bool contains(double x) const { return !is_empty() && lo <= x && x <= hi; }
    bool contains(const Interval& o) const {
        return o.is_empty() || (!is_empty() && lo <= o.lo && o.hi <= hi);
    }
    bool contains_zero() const { return contains(0.0); }

    bool operator==(const Interval& o) const {
        if (is_empty() && o.is_empty()) return true;
        return lo == o.lo && hi == o.hi;
    }
};

inline Interval intersect(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    double lo = std::max(a.lo, b.lo);
    double hi = std::min(a.hi, b.hi);
    if (lo > hi) return Interval::empty();
    return Interval(lo, hi);
}

inline Interval hull(const Interval& a, const Interval& b) {
    if (a.is_empty()) return b;
    if (b.is_empty()) return a;
    return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

/// Smallest double interval containing a rational.
inline Interval hull_of(const Rational& r) {
    return Interval(to_double_down(r), to_double_up(r));
}

inline Interval hull_of(const RationalInterval& iv) {
    return Interval(to_double_down(iv.lo), to_double_up(iv.hi));
}

inline Interval operator-(const Interval& a) {
    if (a.is_empty()) return a;
    return Interval(-a.hi, -a.lo);
}

inline Interval operator+(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    return Interval(detail::add_down(a.lo, b.lo), detail::add_up(a.hi, b.hi));
}

inline Interval operator-(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    return Interval(detail::sub_down(a.lo, b.hi), detail::sub_up(a.hi, b.lo));
}

inline Interval operator*(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    using namespace detail;
    double lo = std::min(std::min(mul_down(a.lo, b.lo), mul_down(a.lo, b.hi)),
                         std::min(mul_down(a.hi, b.lo), mul_down(a.hi, b.hi)));
    double hi = std::max(std::max(mul_up(a.lo, b.lo), mul_up(a.lo, b.hi)),
                         std::max(mul_up(a.hi, b.lo), mul_up(a.hi, b.hi)));
    return Interval(lo, hi);
}

/// Extended interval division: when 0 lies inside the denominator the result
/// is the conservative hull of the two-piece quotient set; [x,x]/[0,0] with
/// x != 0 has empty true quotient set but we return the full line as the
/// documented FullLine signal.
inline Interval div(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    using namespace detail;
    if (b.lo > 0 || b.hi < 0) {
        double lo = std::min(std::min(div_down(a.lo, b.lo), div_down(a.lo, b.hi)),
                             std::min(div_down(a.hi, b.lo), div_down(a.hi, b.hi)));
        double hi = std::max(std::max(div_up(a.lo, b.lo), div_up(a.lo, b.hi)),
                             std::max(div_up(a.hi, b.lo), div_up(a.hi, b.hi)));
        return Interval(lo, hi);
    }
    // 0 in b
    if (a.lo == 0 && a.hi == 0) return Interval(0.0, 0.0);
    if (b.lo == 0 && b.hi == 0) return Interval::entire(); // FullLine
    if (a.lo > 0) {
        if (b.lo == 0) return Interval(div_down(a.lo, b.hi), kInf);
        if (b.hi == 0) return Interval(-kInf, div_up(a.lo, b.lo));
        return Interval::entire();
    }
    if (a.hi < 0) {
        if (b.lo == 0) return Interval(-kInf, div_up(a.hi, b.hi));
        if (b.hi == 0) return Interval(div_down(a.hi, b.lo), kInf);
        return Interval::entire();
    }
    return Interval::entire(); // 0 in both
}

inline Interval imin(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    return Interval(std::min(a.lo, b.lo), std::min(a.hi, b.hi));
}

inline Interval imax(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    return Interval(std::max(a.lo, b.lo), std::max(a.hi, b.hi));
}

inline Interval iabs(const Interval& a) {
    if (a.is_empty()) return a;
    if (a.lo >= 0) return a;
    if (a.hi <= 0) return -a;
    return Interval(0.0, std::max(-a.lo, a.hi));
}

/// x^n with integer n >= 1, computed by binary powering with directed
/// rounding on magnitudes.
inline Interval ipow(const Interval& a, int n) {
    assert(n >= 1);
    if (a.is_empty()) return a;
    if (n == 1) return a;
    auto pow_mag_down = [](double x, int k) { // x >= 0
        double r = 1.0, b = x;
        bool first = true;
        // plain left-to-right square-and-multiply, rounding down
        for (int bit = 31 - __builtin_clz(static_cast<unsigned>(k)); bit >= 0; --bit) {
            if (!first) r = detail::mul_down(r, r);
            if (k & (1 << bit)) r = first ? b : detail::mul_down(r, b);
            first = false;
        }
        return r;
    };
    auto pow_mag_up = [](double x, int k) {
        double r = 1.0, b = x;
        bool first = true;
        for (int bit = 31 - __builtin_clz(static_cast<unsigned>(k)); bit >= 0; --bit) {
            if (!first) r = detail::mul_up(r, r);
            if (k & (1 << bit)) r = first ? b : detail::mul_up(r, b);
            first = false;
        }
        return r;
    };
    if (n % 2 == 1) {
        double lo = a.lo >= 0 ? pow_mag_down(a.lo, n) : -pow_mag_up(-a.lo, n);
        double hi = a.hi >= 0 ? pow_mag_up(a.hi, n) : -pow_mag_down(-a.hi, n);
        return Interval(lo, hi);
    }
    double big = a.mag();
    double small = a.contains_zero() ? 0.0 : std::min(std::fabs(a.lo), std::fabs(a.hi));
    return Interval(pow_mag_down(small, n), pow_mag_up(big, n));
}

inline Interval iexp(const Interval& a) {
    if (a.is_empty()) return a;
    double lo = a.lo == -kInf ? 0.0 : std::max(0.0, detail::step_out_down(std::exp(a.lo)));
    double hi = a.hi == kInf ? kInf : detail::step_out_up(std::exp(a.hi));
    return Interval(lo, hi);
}

/// Natural log of the positive part; empty if the interval is <= 0.
/// Used only for backward projection through exp.
inline Interval ilog(const Interval& a) {
    if (a.is_empty() || a.hi <= 0) return Interval::empty();
    double lo = a.lo <= 0 ? -kInf : detail::step_out_down(std::log(a.lo));
    double hi = a.hi == kInf ? kInf : detail::step_out_up(std::log(a.hi));
    return Interval(lo, hi);
}

namespace detail {

// Does [lo,hi] possibly contain pi*(k + 1/2)?  Conservative: may answer yes
// when the true critical point is just outside, never no when inside.
inline bool may_contain_half_odd_pi(double lo, double hi, long long k) {
    double c = 2.0 * static_cast<double>(k) + 1.0; // critical = c * pi/2
    double clo, chi;
    if (c >= 0) {
        clo = mul_down(c, kPiLo / 2);
        chi = mul_up(c, kPiHi / 2);
    } else {
        clo = mul_down(c, kPiHi / 2);
        chi = mul_up(c, kPiLo / 2);
    }
    return chi >= lo && clo <= hi;
}
inline bool may_contain_multiple_of_pi(double lo, double hi, long long k) {
    double c = static_cast<double>(k);
    double clo, chi;
    if (c >= 0) {
        clo = mul_down(c, kPiLo);
        chi = mul_up(c, kPiHi);
    } else {
        clo = mul_down(c, kPiHi);
        chi = mul_up(c, kPiLo);
    }
    return chi >= lo && clo <= hi;
}

} // namespace detail

inline Interval isin(const Interval& a) {
    if (a.is_empty()) return a;
    if (!a.is_bounded() || a.width() >= 2 * kPiHi || a.mag() > 4.5e15) return Interval(-1.0, 1.0);
    double lo = std::min(detail::step_out_down(std::sin(a.lo)), detail::step_out_down(std::sin(a.hi)));
    double hi = std::max(detail::step_out_up(std::sin(a.lo)), detail::step_out_up(std::sin(a.hi)));
    // widen to +-1 where a critical point pi/2 + k*pi may fall inside
    long long k0 = static_cast<long long>(std::floor(a.lo / kPiLo - 0.5)) - 1;
    long long k1 = static_cast<long long>(std::ceil(a.hi / kPiLo - 0.5)) + 1;
    for (long long k = k0; k <= k1; ++k) {
        if (detail::may_contain_half_odd_pi(a.lo, a.hi, k)) {
            bool peak_is_max = ((k % 2) + 2) % 2 == 0; // sin(pi/2 + 2m*pi) = 1
            if (peak_is_max)
                hi = 1.0;
            else
                lo = -1.0;
        }
    }
    return Interval(std::max(lo, -1.0), std::min(hi, 1.0));
}

inline Interval icos(const Interval& a) {
    if (a.is_empty()) return a;
    if (!a.is_bounded() || a.width() >= 2 * kPiHi || a.mag() > 4.5e15) return Interval(-1.0, 1.0);
    double lo = std::min(detail::step_out_down(std::cos(a.lo)), detail::step_out_down(std::cos(a.hi)));
    double hi = std::max(detail::step_out_up(std::cos(a.lo)), detail::step_out_up(std::cos(a.hi)));
    long long k0 = static_cast<long long>(std::floor(a.lo / kPiLo)) - 1;
    long long k1 = static_cast<long long>(std::ceil(a.hi / kPiLo)) + 1;
    for (long long k = k0; k <= k1; ++k) {
        if (detail::may_contain_multiple_of_pi(a.lo, a.hi, k)) {
            bool peak_is_max = ((k % 2) + 2) % 2 == 0; // cos(2m*pi) = 1
            if (peak_is_max)
                hi = 1.0;
            else
                lo = -1.0;
        }
    }
    return Interval(std::max(lo, -1.0), std::min(hi, 1.0));
}

namespace detail {

// Largest double r >= 0 with r^n <= x (x >= 0); verified by powering so
// libm's pow slop cannot leak through.
inline double root_down(double x, int n) {
    assert(x >= 0);
    if (x == 0) return 0.0;
    if (x == kInf) return kInf;
    double r = std::pow(x, 1.0 / n);
    while (ipow(Interval(r, r), n).lo > x) r = next_down(r);
    return r;
}
inline double root_up(double x, int n) {
    assert(x >= 0);
    if (x == 0) return 0.0;
    if (x == kInf) return kInf;
    double r = std::pow(x, 1.0 / n);
    while (ipow(Interval(r, r), n).hi < x) r = next_up(r);
    return r;
}

} // namespace detail

/// Principal nonnegative n-th root of the nonnegative part of a.
inline Interval iroot_nonneg(const Interval& a, int n) {
    Interval clipped = intersect(a, Interval(0.0, kInf));
    if (clipped.is_empty()) return clipped;
    return Interval(detail::root_down(clipped.lo, n), detail::root_up(clipped.hi, n));
}

/// Odd-n real root over the whole line.
inline Interval iroot_odd(const Interval& a, int n) {
    if (a.is_empty()) return a;
    auto signed_root_down = [n](double x) {
        return x >= 0 ? detail::root_down(x, n) : -detail::root_up(-x, n);
    };
    auto signed_root_up = [n](double x) {
        return x >= 0 ? detail::root_up(x, n) : -detail::root_down(-x, n);
    };
    return Interval(signed_root_down(a.lo), signed_root_up(a.hi));
}

/// asin of the [-1,1]-clipped input, slightly widened.
inline Interval iasin(const Interval& a) {
    Interval c = intersect(a, Interval(-1.0, 1.0));
    if (c.is_empty()) return c;
    return Interval(detail::step_out_down(std::asin(c.lo), 2), detail::step_out_up(std::asin(c.hi), 2));
}

inline Interval iacos(const Interval& a) {
    Interval c = intersect(a, Interval(-1.0, 1.0));
    if (c.is_empty()) return c;
    return Interval(detail::step_out_down(std::acos(c.hi), 2), detail::step_out_up(std::acos(c.lo), 2));
}

inline std::string to_string(const Interval& a) {
    if (a.is_empty()) return "[empty]";
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%.17g, %.17g]", a.lo, a.hi);
    return buf;
}

} // namespace dsmt
