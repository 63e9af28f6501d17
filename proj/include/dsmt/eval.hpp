/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include "dsmt/term.hpp"

namespace dsmt {

/// Closed rational interval used during exact point evaluation. Always
/// nonempty by construction.
struct RatInterval {
    Rational lo;
    Rational hi;

    RatInterval() : lo(0), hi(0) {}
    RatInterval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {}
    explicit RatInterval(const Rational& point) : lo(point), hi(point) {}

    Rational width() const { return hi - lo; }
    Rational mid() const { return (lo + hi) / 2; }
    bool contains(const Rational& x) const { return lo <= x && x <= hi; }
    bool contains_zero() const { return lo <= 0 && 0 <= hi; }
};

namespace detail {

struct RetryPrecision {
    bool division = false;
};

inline RatInterval radd(const RatInterval& a, const RatInterval& b) {
    return {a.lo + b.lo, a.hi + b.hi};
}
inline RatInterval rsub(const RatInterval& a, const RatInterval& b) {
    return {a.lo - b.hi, a.hi - b.lo};
}
inline RatInterval rneg(const RatInterval& a) { return {-a.hi, -a.lo}; }
inline RatInterval rmul(const RatInterval& a, const RatInterval& b) {
    Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}
inline RatInterval rdiv(const RatInterval& a, const RatInterval& b) {
    if (b.contains_zero()) {
        if (b.lo == 0 && b.hi == 0) throw NondefinedAtPoint("division by zero");
        throw RetryPrecision{true};
    }
    Rational p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}
inline RatInterval rpow(const RatInterval& a, int n) {
    if (n % 2 == 1) {
        return {rat_pow(a.lo, static_cast<unsigned>(n)), rat_pow(a.hi, static_cast<unsigned>(n))};
    }
    Rational big = std::max(rat_abs(a.lo), rat_abs(a.hi));
    Rational small = a.contains_zero() ? Rational(0) : std::min(rat_abs(a.lo), rat_abs(a.hi));
    return {rat_pow(small, static_cast<unsigned>(n)), rat_pow(big, static_cast<unsigned>(n))};
}
inline RatInterval rabs(const RatInterval& a) {
    if (a.lo >= 0) return a;
    if (a.hi <= 0) return rneg(a);
    return {Rational(0), std::max(Rational(-a.lo), a.hi)};
}
inline RatInterval rmin(const RatInterval& a, const RatInterval& b) {
    return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
}
inline RatInterval rmax(const RatInterval& a, const RatInterval& b) {
    return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline constexpr long kMaxSeriesArg = 1 << 14;

/// exp over q >= 0 by the Taylor series with an explicit geometric tail
/// bound: once the term ratio drops below 1/2 the remainder is at most the
/// last added term.
inline RatInterval exp_series_nonneg(const Rational& q, int bits) {
    if (q > kMaxSeriesArg) throw PrecisionUnreachable("exp argument too large for series evaluation");
    Rational target = pow2(-(bits + 1));
    Rational sum = 1;
    Rational term = 1;
    long j = 0;
    while (true) {
        ++j;
        term = term * q / j;
        sum += term;
        if (2 * q <= j + 1 && term <= target) break;
        if (j > 8 * kMaxSeriesArg) throw PrecisionUnreachable("exp series did not converge");
    }
    return {sum, sum + term};
}

inline RatInterval exp_point(const Rational& q, int bits) {
    if (q >= 0) return exp_series_nonneg(q, bits);
    RatInterval e = exp_series_nonneg(-q, bits);
    return {1 / e.hi, 1 / e.lo}; // e.lo >= 1
}

/// sin via the alternating Taylor series; the tail is bounded by the first
/// omitted term once the terms decrease.
inline RatInterval sin_point(const Rational& q, int bits) {
    if (q < 0) {
        RatInterval pos = sin_point(-q, bits);
        return {-pos.hi, -pos.lo};
    }
    if (q > kMaxSeriesArg) throw PrecisionUnreachable("sin argument too large for series evaluation");
    Rational target = pow2(-bits);
    Rational q2 = q * q;
    Rational sum = 0;
    Rational term = q; // q^(2j+1)/(2j+1)!, nonnegative
    long j = 0;
    int sign = 1;
    while (true) {
        sum += sign * term;
        Rational next = term * q2 / ((2 * j + 2) * (2 * j + 3));
        if (q2 < (2 * j + 2) * (2 * j + 3) && next <= target)
            return {sum - next, sum + next};
        term = next;
        sign = -sign;
        ++j;
        if (j > 8 * kMaxSeriesArg) throw PrecisionUnreachable("sin series did not converge");
    }
}

inline RatInterval cos_point(const Rational& q, int bits) {
    if (rat_abs(q) > kMaxSeriesArg) throw PrecisionUnreachable("cos argument too large for series evaluation");
    Rational target = pow2(-bits);
    Rational q2 = q * q;
    Rational sum = 0;
    Rational term = 1; // q^(2j)/(2j)!
    long j = 0;
    int sign = 1;
    while (true) {
        sum += sign * term;
        Rational next = term * q2 / ((2 * j + 1) * (2 * j + 2));
        if (q2 < (2 * j + 1) * (2 * j + 2) && next <= target)
            return {sum - next, sum + next};
        term = next;
        sign = -sign;
        ++j;
        if (j > 8 * kMaxSeriesArg) throw PrecisionUnreachable("cos series did not converge");
    }
}

/// atan(1/k) by its alternating series, bracketed by consecutive partial sums.
inline RatInterval atan_inv(long k, int bits) {
    Rational target = pow2(-bits);
    Rational inv(1, k);
    Rational inv2 = inv * inv;
    Rational sum = 0;
    Rational power = inv; // (1/k)^(2j+1)
    long j = 0;
    int sign = 1;
    while (true) {
        sum += sign * power / (2 * j + 1);
        power *= inv2;
        Rational next = power / (2 * j + 3);
        if (next <= target) return {sum - next, sum + next};
        sign = -sign;
        ++j;
    }
}

/// Cached rational enclosure of pi (Machin's formula), grown on demand.
inline RatInterval pi_enclosure(int bits) {
    static std::mutex mu;
    static RatInterval cached(Rational(3), Rational(4));
    static int cached_bits = 0;
    std::lock_guard<std::mutex> lock(mu);
    if (cached_bits < bits) {
        int b = std::max(bits + 8, 64);
        RatInterval a5 = atan_inv(5, b + 6);
        RatInterval a239 = atan_inv(239, b + 6);
        // pi = 16*atan(1/5) - 4*atan(1/239)
        cached = RatInterval(16 * a5.lo - 4 * a239.hi, 16 * a5.hi - 4 * a239.lo);
        cached_bits = bits;
    }
    return cached;
}

/// Range of sin over a (typically tiny) rational interval: endpoint series
/// values, widened to exactly +-1 wherever a critical point may lie inside.
inline RatInterval sin_range(const RatInterval& x, int bits) {
    if (x.lo == x.hi) return sin_point(x.lo, bits);
    RatInterval pi = pi_enclosure(bits);
    if (x.width() >= 2 * pi.lo) return {Rational(-1), Rational(1)};
    RatInterval at_lo = sin_point(x.lo, bits);
    RatInterval at_hi = sin_point(x.hi, bits);
    RatInterval r{std::min(at_lo.lo, at_hi.lo), std::max(at_lo.hi, at_hi.hi)};
    // critical points (2k+1) * pi/2; the scan range comes from a double
    // approximation, the containment test is exact
    long k0 = static_cast<long>(std::floor(2.0 * to_double(x.lo) / 3.14)) - 2;
    long k1 = static_cast<long>(std::ceil(2.0 * to_double(x.hi) / 3.14)) + 2;
    for (long c = k0 | 1; c <= k1; c += 2) {
        Rational c_lo = (c >= 0 ? c * pi.lo : c * pi.hi) / 2;
        Rational c_hi = (c >= 0 ? c * pi.hi : c * pi.lo) / 2;
        if (c_hi >= x.lo && c_lo <= x.hi) {
            long k = (c - 1) / 2;
            if (((k % 2) + 2) % 2 == 0)
                r.hi = 1;
            else
                r.lo = -1;
        }
    }
    r.lo = std::max(r.lo, Rational(-1));
    r.hi = std::min(r.hi, Rational(1));
    return r;
}

inline RatInterval cos_range(const RatInterval& x, int bits) {
    if (x.lo == x.hi) return cos_point(x.lo, bits);
    RatInterval pi = pi_enclosure(bits);
    if (x.width() >= 2 * pi.lo) return {Rational(-1), Rational(1)};
    RatInterval at_lo = cos_point(x.lo, bits);
    RatInterval at_hi = cos_point(x.hi, bits);
    RatInterval r{std::min(at_lo.lo, at_hi.lo), std::max(at_lo.hi, at_hi.hi)};
    long k0 = static_cast<long>(std::floor(to_double(x.lo) / 3.14)) - 2;
    long k1 = static_cast<long>(std::ceil(to_double(x.hi) / 3.14)) + 2;
    for (long k = k0; k <= k1; ++k) {
        Rational c_lo = k >= 0 ? k * pi.lo : k * pi.hi;
        Rational c_hi = k >= 0 ? k * pi.hi : k * pi.lo;
        if (c_hi >= x.lo && c_lo <= x.hi) {
            if (((k % 2) + 2) % 2 == 0)
                r.hi = 1;
            else
                r.lo = -1;
        }
    }
    r.lo = std::max(r.lo, Rational(-1));
    r.hi = std::min(r.hi, Rational(1));
    return r;
}

inline RatInterval exp_range(const RatInterval& x, int bits) {
    if (x.lo == x.hi) return exp_point(x.lo, bits);
    return {exp_point(x.lo, bits).lo, exp_point(x.hi, bits).hi};
}

} // namespace detail

/// Refinable point enclosures for ODE solution components; implemented by
/// the ode module.
class FlowPointProvider {
public:
    virtual ~FlowPointProvider() = default;
    /// Enclosure of y_component(t; y0) for t in `time`, y0 componentwise in
    /// `initial`, with width at most `target_width` if attainable; throws
    /// PrecisionUnreachable otherwise.
    virtual RatInterval point_enclosure(int ivp, int component, const RatInterval& time,
                                        const std::vector<RatInterval>& initial,
                                        double target_width) const = 0;
};

struct EvalOptions {
    int max_bits = 4096;
    const FlowPointProvider* flows = nullptr;
};

namespace detail {

inline RatInterval enclose_at(const Term& t, const std::vector<Rational>& point, int bits,
                              const EvalOptions& opts) {
    using K = TermKind;
    auto rec = [&](const Term& s) { return enclose_at(s, point, bits, opts); };
    switch (t.kind) {
    case K::Constant: return RatInterval(t.value);
    case K::Variable: return RatInterval(point.at(static_cast<std::size_t>(t.var)));
    case K::Negate: return rneg(rec(*t.args[0]));
    case K::Add: return radd(rec(*t.args[0]), rec(*t.args[1]));
    case K::Sub: return rsub(rec(*t.args[0]), rec(*t.args[1]));
    case K::Mul: return rmul(rec(*t.args[0]), rec(*t.args[1]));
    case K::Div: return rdiv(rec(*t.args[0]), rec(*t.args[1]));
    case K::Pow: return rpow(rec(*t.args[0]), t.exponent);
    case K::Exp: return exp_range(rec(*t.args[0]), bits);
    case K::Sin: return sin_range(rec(*t.args[0]), bits);
    case K::Cos: return cos_range(rec(*t.args[0]), bits);
    case K::Min: return rmin(rec(*t.args[0]), rec(*t.args[1]));
    case K::Max: return rmax(rec(*t.args[0]), rec(*t.args[1]));
    case K::Abs: return rabs(rec(*t.args[0]));
    case K::Flow: {
        if (opts.flows == nullptr) throw Error("flow term evaluated without an IVP table");
        RatInterval time = rec(*t.args[0]);
        std::vector<RatInterval> initial;
        initial.reserve(t.args.size() - 1);
        for (std::size_t i = 1; i < t.args.size(); ++i) initial.push_back(rec(*t.args[i]));
        return opts.flows->point_enclosure(t.ivp, t.component, time, initial,
                                           to_double(pow2(-bits)));
    }
    }
    throw Error("enclose_at: unknown term kind");
}

} // namespace detail

/// Enclosure of t(point) with width < 2^-precision_bits, obtained by
/// re-evaluating at doubled working precision until the output interval is
/// narrow enough.
inline RatInterval eval_point_enclosure(const Term& t, const std::vector<Rational>& point,
                                        int precision_bits, const EvalOptions& opts = {}) {
    Rational target = pow2(-precision_bits);
    bool division_obstruction = false;
    for (int bits = precision_bits + 4; bits <= opts.max_bits; bits *= 2) {
        try {
            RatInterval enc = detail::enclose_at(t, point, bits, opts);
            if (enc.width() < target) return enc;
        } catch (const detail::RetryPrecision& r) {
            division_obstruction = r.division;
        }
    }
    if (division_obstruction)
        throw NondefinedAtPoint("denominator enclosure still straddles zero at the precision cap");
    throw PrecisionUnreachable("could not reach 2^-" + std::to_string(precision_bits) +
                               " within the precision cap");
}

/// Rational approximation r with |r - t(point)| < 2^-precision_bits.
inline Rational eval_point(const Term& t, const std::vector<Rational>& point, int precision_bits,
                           const EvalOptions& opts = {}) {
    return eval_point_enclosure(t, point, precision_bits, opts).mid();
}

} // namespace dsmt
