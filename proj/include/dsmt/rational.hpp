/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "dsmt/errors.hpp"

namespace dsmt {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational rat_pow(const Rational& base, unsigned n) {
    Rational r = 1;
    Rational b = base;
    while (n != 0) {
        if (n & 1u) r *= b;
        b *= b;
        n >>= 1u;
    }
    return r;
}

/// 2^k for possibly negative k.
inline Rational pow2(int k) {
    if (k >= 0) return Rational(BigInt(1) << k);
    return Rational(1, BigInt(1) << (-k));
}

inline Rational rat_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

inline double to_double(const Rational& r) { return static_cast<double>(r); }

/// Largest double <= r (the cast itself is not correctly rounded, so the
/// estimate is nudged in both directions until it is exact).
inline double to_double_down(const Rational& r) {
    double d = static_cast<double>(r);
    if (std::isinf(d)) return d < 0 ? d : std::numeric_limits<double>::max();
    while (Rational(d) > r) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
    while (true) {
        double u = std::nextafter(d, std::numeric_limits<double>::infinity());
        if (std::isinf(u) || Rational(u) > r) break;
        d = u;
    }
    return d;
}

/// Smallest double >= r.
inline double to_double_up(const Rational& r) {
    double d = static_cast<double>(r);
    if (std::isinf(d)) return d > 0 ? d : std::numeric_limits<double>::lowest();
    while (Rational(d) < r) d = std::nextafter(d, std::numeric_limits<double>::infinity());
    while (true) {
        double u = std::nextafter(d, -std::numeric_limits<double>::infinity());
        if (std::isinf(u) || Rational(u) < r) break;
        d = u;
    }
    return d;
}

/// Parse "3", "-7/2" or "0.125" into an exact rational.
inline std::optional<Rational> parse_rational(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t pos = 0;
    bool neg = false;
    if (s[pos] == '+' || s[pos] == '-') {
        neg = s[pos] == '-';
        ++pos;
    }
    if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) return std::nullopt;
    BigInt num = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        num = num * 10 + (s[pos] - '0');
        ++pos;
    }
    Rational value(num);
    if (pos < s.size() && s[pos] == '/') {
        ++pos;
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) return std::nullopt;
        BigInt den = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            den = den * 10 + (s[pos] - '0');
            ++pos;
        }
        if (den == 0) return std::nullopt;
        value = Rational(num, den);
    } else if (pos < s.size() && s[pos] == '.') {
        ++pos;
        BigInt frac = 0;
        BigInt scale = 1;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            frac = frac * 10 + (s[pos] - '0');
            scale *= 10;
            ++pos;
        }
        value = Rational(num * scale + frac, scale);
    }
    if (pos != s.size()) return std::nullopt;
    return neg ? Rational(-value) : value;
}

inline std::string rat_str(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

/// A rational-endpoint interval with optional open ends. Endpoints are
/// always finite: every place a bound is consumed requires boundedness.
struct RationalInterval {
    Rational lo;
    Rational hi;
    bool lo_open = false;
    bool hi_open = false;

    RationalInterval() = default;
    RationalInterval(Rational l, Rational h, bool lo_o = false, bool hi_o = false)
        : lo(std::move(l)), hi(std::move(h)), lo_open(lo_o), hi_open(hi_o) {
        if (lo > hi) throw Error("RationalInterval: lo > hi");
    }

    bool degenerate() const { return lo == hi; }
    bool empty_interior() const { return lo == hi && (lo_open || hi_open); }
    Rational width() const { return hi - lo; }

    bool contains(const Rational& x) const {
        if (x < lo || x > hi) return false;
        if (x == lo && lo_open) return false;
        if (x == hi && hi_open) return false;
        return true;
    }

    RationalInterval closure() const { return RationalInterval(lo, hi, false, false); }
    RationalInterval interior() const {
        if (lo == hi) throw EmptyInterior("interior of degenerate interval is empty");
        return RationalInterval(lo, hi, true, true);
    }

    bool operator==(const RationalInterval& o) const {
        return lo == o.lo && hi == o.hi && lo_open == o.lo_open && hi_open == o.hi_open;
    }
};

inline std::string interval_str(const RationalInterval& iv) {
    return std::string(iv.lo_open ? "(" : "[") + rat_str(iv.lo) + ", " + rat_str(iv.hi) +
           (iv.hi_open ? ")" : "]");
}

} // namespace dsmt
