/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <optional>

#include "dsmt/extension.hpp"

namespace dsmt {

/// Interval enclosure of the partial derivative d t / d x_var over the box,
/// evaluated structurally without building a derivative term. min/max/abs
/// are handled by the hull of their branch derivatives, which bounds the
/// almost-everywhere derivative and hence the Lipschitz constant. Flow terms
/// have no syntactic derivative here: nullopt means "unknown".
inline std::optional<Interval> derivative_range(const Term& t, int var, const Box& box,
                                                const FlowRangeProvider* flows = nullptr) {
    using K = TermKind;
    auto rec = [&](const Term& s) { return derivative_range(s, var, box, flows); };
    switch (t.kind) {
    case K::Constant: return Interval(0.0, 0.0);
    case K::Variable: return Interval(t.var == var ? 1.0 : 0.0, t.var == var ? 1.0 : 0.0);
    case K::Negate: {
        auto d = rec(*t.args[0]);
        if (!d) return std::nullopt;
        return -*d;
    }
    case K::Add: {
        auto a = rec(*t.args[0]), b = rec(*t.args[1]);
        if (!a || !b) return std::nullopt;
        return *a + *b;
    }
    case K::Sub: {
        auto a = rec(*t.args[0]), b = rec(*t.args[1]);
        if (!a || !b) return std::nullopt;
        return *a - *b;
    }
    case K::Mul: {
        auto a = rec(*t.args[0]), b = rec(*t.args[1]);
        if (!a || !b) return std::nullopt;
        Interval fa = natural_extension(*t.args[0], box, flows);
        Interval fb = natural_extension(*t.args[1], box, flows);
        return *a * fb + fa * *b;
    }
    case K::Div: {
        auto a = rec(*t.args[0]), b = rec(*t.args[1]);
        if (!a || !b) return std::nullopt;
        Interval fa = natural_extension(*t.args[0], box, flows);
        Interval fb = natural_extension(*t.args[1], box, flows);
        return div(*a * fb - fa * *b, ipow(fb, 2));
    }
    case K::Pow: {
        auto a = rec(*t.args[0]);
        if (!a) return std::nullopt;
        Interval fa = natural_extension(*t.args[0], box, flows);
        Interval coef(static_cast<double>(t.exponent));
        Interval inner = t.exponent == 1 ? Interval(1.0, 1.0) : ipow(fa, t.exponent - 1);
        return coef * inner * *a;
    }
    case K::Exp: {
        auto a = rec(*t.args[0]);
        if (!a) return std::nullopt;
        return iexp(natural_extension(*t.args[0], box, flows)) * *a;
    }
    case K::Sin: {
        auto a = rec(*t.args[0]);
        if (!a) return std::nullopt;
        return icos(natural_extension(*t.args[0], box, flows)) * *a;
    }
    case K::Cos: {
        auto a = rec(*t.args[0]);
        if (!a) return std::nullopt;
        return -isin(natural_extension(*t.args[0], box, flows)) * *a;
    }
    case K::Min:
    case K::Max: {
        auto a = rec(*t.args[0]), b = rec(*t.args[1]);
        if (!a || !b) return std::nullopt;
        return hull(*a, *b);
    }
    case K::Abs: {
        auto a = rec(*t.args[0]);
        if (!a) return std::nullopt;
        return hull(*a, -*a);
    }
    case K::Flow: return std::nullopt;
    }
    return std::nullopt;
}

/// Finite bound on sup_box max_j |d t / d x_j| (the gradient max-norm), or
/// nullopt when a derivative is unknown or unbounded over the box.
inline std::optional<double> gradient_sup_bound(const Term& t, std::size_t nvars, const Box& box,
                                                const FlowRangeProvider* flows = nullptr) {
    double bound = 0.0;
    for (std::size_t j = 0; j < nvars; ++j) {
        auto d = derivative_range(t, static_cast<int>(j), box, flows);
        if (!d || d->is_empty()) return std::nullopt;
        double m = d->mag();
        if (!std::isfinite(m)) return std::nullopt;
        bound = std::max(bound, m);
    }
    return bound;
}

} // namespace dsmt
