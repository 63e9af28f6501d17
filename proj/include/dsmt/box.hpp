/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dsmt/interval.hpp"

namespace dsmt {

/// A box is one interval per variable. A box is empty as soon as any
/// component is empty.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<Interval> ivs) : ivs_(std::move(ivs)) {}
    explicit Box(std::size_t n, Interval fill = Interval(0.0, 0.0)) : ivs_(n, fill) {}

    std::size_t size() const { return ivs_.size(); }
    Interval& operator[](std::size_t i) { return ivs_[i]; }
    const Interval& operator[](std::size_t i) const { return ivs_[i]; }
    auto begin() const { return ivs_.begin(); }
    auto end() const { return ivs_.end(); }

    bool is_empty() const {
        for (const auto& iv : ivs_)
            if (iv.is_empty()) return true;
        return false;
    }

    /// max-norm width over all components
    double width() const {
        double w = 0.0;
        for (const auto& iv : ivs_) w = std::max(w, iv.width());
        return w;
    }

    int widest_dim() const {
        int best = 0;
        double w = -1.0;
        for (std::size_t i = 0; i < ivs_.size(); ++i) {
            if (ivs_[i].width() > w) {
                w = ivs_[i].width();
                best = static_cast<int>(i);
            }
        }
        return best;
    }

    std::vector<double> midpoint() const {
        std::vector<double> m(ivs_.size());
        for (std::size_t i = 0; i < ivs_.size(); ++i) m[i] = ivs_[i].mid();
        return m;
    }

    bool contains(const std::vector<double>& p) const {
        if (p.size() != ivs_.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (!ivs_[i].contains(p[i])) return false;
        return true;
    }

    bool contains(const Box& o) const {
        if (o.size() != size()) return false;
        for (std::size_t i = 0; i < size(); ++i)
            if (!ivs_[i].contains(o[i])) return false;
        return true;
    }

    bool operator==(const Box& o) const { return ivs_ == o.ivs_; }

private:
    std::vector<Interval> ivs_;
};

/// Split component i at its midpoint. Both halves keep the midpoint, so the
/// union covers the original and each part is at least (1/2 - slack) of it.
inline std::pair<Box, Box> bisect(const Box& b, int i) {
    const Interval& iv = b[static_cast<std::size_t>(i)];
    if (iv.is_empty() || iv.width() <= 0.0) throw DegenerateBisect("bisect: zero-width interval");
    double m = iv.mid();
    if (!(iv.lo < m && m < iv.hi)) {
        m = next_up(iv.lo);
        if (!(m < iv.hi)) throw DegenerateBisect("bisect: adjacent floats");
    }
    Box left = b, right = b;
    left[static_cast<std::size_t>(i)] = Interval(iv.lo, m);
    right[static_cast<std::size_t>(i)] = Interval(m, iv.hi);
    return {left, right};
}

inline Box hull(const Box& a, const Box& b) {
    if (a.is_empty()) return b;
    if (b.is_empty()) return a;
    Box r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = hull(a[i], b[i]);
    return r;
}

inline Box intersect(const Box& a, const Box& b) {
    Box r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = intersect(a[i], b[i]);
    return r;
}

/// Canonical empty box of the same dimension.
inline Box empty_like(const Box& b) {
    Box r = b;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = Interval::empty();
    return r;
}

/// Outward-rounded float box over the closures of rational bounds.
inline Box box_of(const std::vector<RationalInterval>& bounds) {
    std::vector<Interval> ivs;
    ivs.reserve(bounds.size());
    for (const auto& b : bounds) ivs.push_back(hull_of(b));
    return Box(std::move(ivs));
}

} // namespace dsmt
