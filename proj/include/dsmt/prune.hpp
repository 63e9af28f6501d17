/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "dsmt/extension.hpp"
#include "dsmt/normalize.hpp"

namespace dsmt {

/// One standard-form equality f = 0 with its relaxation band: pruning keeps
/// every point with |f| <= band. band is the solver delta rounded up, or 0.
struct Constraint {
    TermPtr term;
    double band = 0.0;

    Interval target_band() const { return Interval(-band, band); }
};

inline std::vector<Constraint> make_constraints(const std::vector<TermPtr>& terms,
                                                const Rational& delta) {
    if (delta < 0) throw NonpositiveDelta("delta must be nonnegative");
    double band = to_double_up(delta);
    std::vector<Constraint> cs;
    cs.reserve(terms.size());
    for (const auto& t : terms) cs.push_back({t, band});
    return cs;
}

struct PruneResult {
    Box box;
    bool changed = false;
};

namespace detail {

using FwdMap = std::unordered_map<const Term*, Interval>;

inline Interval forward_eval(const Term& t, const Box& box, const FlowRangeProvider* flows,
                             FwdMap& memo) {
    auto it = memo.find(&t);
    if (it != memo.end()) return it->second;
    Interval r;
    switch (t.kind) {
    case TermKind::Constant: r = hull_of(t.value); break;
    case TermKind::Variable: r = box[static_cast<std::size_t>(t.var)]; break;
    case TermKind::Negate: r = -forward_eval(*t.args[0], box, flows, memo); break;
    case TermKind::Add:
        r = forward_eval(*t.args[0], box, flows, memo) + forward_eval(*t.args[1], box, flows, memo);
        break;
    case TermKind::Sub:
        r = forward_eval(*t.args[0], box, flows, memo) - forward_eval(*t.args[1], box, flows, memo);
        break;
    case TermKind::Mul:
        r = forward_eval(*t.args[0], box, flows, memo) * forward_eval(*t.args[1], box, flows, memo);
        break;
    case TermKind::Div:
        r = div(forward_eval(*t.args[0], box, flows, memo),
                forward_eval(*t.args[1], box, flows, memo));
        break;
    case TermKind::Pow: r = ipow(forward_eval(*t.args[0], box, flows, memo), t.exponent); break;
    case TermKind::Exp: r = iexp(forward_eval(*t.args[0], box, flows, memo)); break;
    case TermKind::Sin: r = isin(forward_eval(*t.args[0], box, flows, memo)); break;
    case TermKind::Cos: r = icos(forward_eval(*t.args[0], box, flows, memo)); break;
    case TermKind::Min:
        r = imin(forward_eval(*t.args[0], box, flows, memo), forward_eval(*t.args[1], box, flows, memo));
        break;
    case TermKind::Max:
        r = imax(forward_eval(*t.args[0], box, flows, memo), forward_eval(*t.args[1], box, flows, memo));
        break;
    case TermKind::Abs: r = iabs(forward_eval(*t.args[0], box, flows, memo)); break;
    case TermKind::Flow: {
        if (flows == nullptr) throw Error("flow term pruned without an IVP table");
        Interval time = forward_eval(*t.args[0], box, flows, memo);
        Box initial(t.args.size() - 1);
        for (std::size_t i = 1; i < t.args.size(); ++i)
            initial[i - 1] = forward_eval(*t.args[i], box, flows, memo);
        r = (time.is_empty() || initial.is_empty())
                ? Interval::empty()
                : flows->component_range(t.ivp, t.component, time, initial);
        break;
    }
    }
    memo.emplace(&t, r);
    return r;
}

inline constexpr double kSinBackwardWidthCap = 1e4;
inline constexpr long long kMaxArcBranches = 1 << 12;

/// Preimage arcs of sin(theta) in T for theta in C, hulled.
inline Interval sin_backward(const Interval& T, const Interval& C) {
    Interval A = iasin(T);
    if (A.is_empty()) return Interval::empty();
    if (!C.is_bounded() || C.width() > kSinBackwardWidthCap) return C;
    Interval pi(kPiLo, kPiHi);
    Interval two_pi(2 * kPiLo, 2 * kPiHi);
    long long k0 = static_cast<long long>(std::floor(C.lo / (2 * kPiLo))) - 1;
    long long k1 = static_cast<long long>(std::ceil(C.hi / (2 * kPiLo))) + 1;
    if (k1 - k0 > kMaxArcBranches) return C;
    Interval acc = Interval::empty();
    for (long long k = k0; k <= k1; ++k) {
        Interval shift = two_pi * Interval(static_cast<double>(k));
        acc = hull(acc, intersect(A + shift, C));
        acc = hull(acc, intersect((pi - A) + shift, C));
    }
    return acc;
}

inline Interval cos_backward(const Interval& T, const Interval& C) {
    Interval A = iacos(T);
    if (A.is_empty()) return Interval::empty();
    if (!C.is_bounded() || C.width() > kSinBackwardWidthCap) return C;
    Interval two_pi(2 * kPiLo, 2 * kPiHi);
    long long k0 = static_cast<long long>(std::floor(C.lo / (2 * kPiLo))) - 1;
    long long k1 = static_cast<long long>(std::ceil(C.hi / (2 * kPiLo))) + 1;
    if (k1 - k0 > kMaxArcBranches) return C;
    Interval acc = Interval::empty();
    for (long long k = k0; k <= k1; ++k) {
        Interval shift = two_pi * Interval(static_cast<double>(k));
        acc = hull(acc, intersect(A + shift, C));
        acc = hull(acc, intersect(-A + shift, C));
    }
    return acc;
}

/// Backward (projection) pass. Returns false as soon as some variable domain
/// becomes empty. `target` is the set the node's value must meet.
inline bool backward(const Term& t, Interval target, Box& box, const FwdMap& fwd) {
    auto here = fwd.find(&t);
    Interval cur = here == fwd.end() ? Interval::entire() : here->second;
    target = intersect(target, cur);
    if (target.is_empty()) return false;
    switch (t.kind) {
    case TermKind::Constant: return true;
    case TermKind::Variable: {
        auto i = static_cast<std::size_t>(t.var);
        box[i] = intersect(box[i], target);
        return !box[i].is_empty();
    }
    case TermKind::Negate: return backward(*t.args[0], -target, box, fwd);
    case TermKind::Add: {
        Interval fa = fwd.at(t.args[0].get()), fb = fwd.at(t.args[1].get());
        return backward(*t.args[0], target - fb, box, fwd) &&
               backward(*t.args[1], target - fa, box, fwd);
    }
    case TermKind::Sub: {
        Interval fa = fwd.at(t.args[0].get()), fb = fwd.at(t.args[1].get());
        return backward(*t.args[0], target + fb, box, fwd) &&
               backward(*t.args[1], fa - target, box, fwd);
    }
    case TermKind::Mul: {
        Interval fa = fwd.at(t.args[0].get()), fb = fwd.at(t.args[1].get());
        return backward(*t.args[0], div(target, fb), box, fwd) &&
               backward(*t.args[1], div(target, fa), box, fwd);
    }
    case TermKind::Div: {
        Interval fa = fwd.at(t.args[0].get()), fb = fwd.at(t.args[1].get());
        return backward(*t.args[0], target * fb, box, fwd) &&
               backward(*t.args[1], div(fa, target), box, fwd);
    }
    case TermKind::Pow: {
        Interval child = fwd.at(t.args[0].get());
        if (t.exponent % 2 == 1) return backward(*t.args[0], iroot_odd(target, t.exponent), box, fwd);
        Interval root = iroot_nonneg(target, t.exponent);
        Interval next = hull(intersect(root, child), intersect(-root, child));
        if (next.is_empty()) return false;
        return backward(*t.args[0], next, box, fwd);
    }
    case TermKind::Exp: return backward(*t.args[0], ilog(target), box, fwd);
    case TermKind::Sin: {
        Interval next = sin_backward(target, fwd.at(t.args[0].get()));
        if (next.is_empty()) return false;
        return backward(*t.args[0], next, box, fwd);
    }
    case TermKind::Cos: {
        Interval next = cos_backward(target, fwd.at(t.args[0].get()));
        if (next.is_empty()) return false;
        return backward(*t.args[0], next, box, fwd);
    }
    case TermKind::Min: {
        Interval fa = fwd.at(t.args[0].get()), fb = fwd.at(t.args[1].get());
        // each operand is at least the min; if the other operand cannot meet
        // the target, this one must realize it and lie below the other
        Interval ta = intersect(fb, target).is_empty()
                          ? intersect(target, Interval(-kInf, fb.hi))
                          : Interval(target.lo, kInf);
        Interval tb = intersect(fa, target).is_empty()
                          ? intersect(target, Interval(-kInf, fa.hi))
                          : Interval(target.lo, kInf);
        if (ta.is_empty() || tb.is_empty()) return false;
        return backward(*t.args[0], ta, box, fwd) && backward(*t.args[1], tb, box, fwd);
    }
    case TermKind::Max: {
        Interval fa = fwd.at(t.args[0].get()), fb = fwd.at(t.args[1].get());
        Interval ta = intersect(fb, target).is_empty()
                          ? intersect(target, Interval(fb.lo, kInf))
                          : Interval(-kInf, target.hi);
        Interval tb = intersect(fa, target).is_empty()
                          ? intersect(target, Interval(fa.lo, kInf))
                          : Interval(-kInf, target.hi);
        if (ta.is_empty() || tb.is_empty()) return false;
        return backward(*t.args[0], ta, box, fwd) && backward(*t.args[1], tb, box, fwd);
    }
    case TermKind::Abs: {
        Interval child = fwd.at(t.args[0].get());
        Interval pos = intersect(target, Interval(0.0, kInf));
        Interval next = hull(intersect(pos, child), intersect(-pos, child));
        if (next.is_empty()) return false;
        return backward(*t.args[0], next, box, fwd);
    }
    case TermKind::Flow:
        // no sound inverse through the flow map; the forward intersection at
        // this node is the whole pruning effect (simple ODE pruning)
        return true;
    }
    throw Error("backward: unknown term kind");
}

inline bool box_changed(const Box& a, const Box& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return true;
    return false;
}

} // namespace detail

/// Forward-backward (HC4-style) narrowing for one constraint. The result
/// satisfies W1 (subset), W2 (band meets the interval range of the result;
/// re-checked on the pruned box) and W3 (every point with |f| <= band is
/// kept, since each projection step over-approximates the preimage).
inline PruneResult hc4_revise(const Box& box, const Constraint& c,
                              const FlowRangeProvider* flows = nullptr) {
    if (box.is_empty()) return {box, false};
    detail::FwdMap fwd;
    Interval root = detail::forward_eval(*c.term, box, flows, fwd);
    Interval target = intersect(root, c.target_band());
    if (target.is_empty()) return {empty_like(box), true};
    Box work = box;
    if (!detail::backward(*c.term, target, work, fwd)) return {empty_like(box), true};
    bool changed = detail::box_changed(work, box);
    if (changed) {
        // re-establish consistency of the output (W2): if the band misses
        // the range over the pruned box, no solution survived at all
        detail::FwdMap fwd2;
        Interval post = detail::forward_eval(*c.term, work, flows, fwd2);
        if (intersect(post, c.target_band()).is_empty()) return {empty_like(box), true};
    }
    return {work, changed};
}

struct BoxConsistencyOptions {
    double rel_tol = 1.0 / 1024.0; // fraction of the original interval width
    double abs_tol = 1e-12;
    int max_probes = 512; // slab tests per side
};

/// Dimension-wise narrowing to (an enclosure of) the hull of values
/// consistent with 0 in the extension: endpoint slabs proven inconsistent
/// are shaved off by bisection until the outermost consistent points are
/// bracketed within tolerance.
inline PruneResult box_consistency_narrow(const Box& box, const Constraint& c, int dim,
                                          const BoxConsistencyOptions& opts = {},
                                          const FlowRangeProvider* flows = nullptr) {
    if (box.is_empty()) return {box, false};
    auto d = static_cast<std::size_t>(dim);
    auto consistent = [&](const Interval& slab) {
        Box probe = box;
        probe[d] = slab;
        detail::FwdMap fwd;
        Interval r = detail::forward_eval(*c.term, probe, flows, fwd);
        return !intersect(r, c.target_band()).is_empty();
    };
    const Interval original = box[d];
    double tol = std::max(opts.abs_tol, opts.rel_tol * original.width());

    // returns the refined bound, or empty if the whole range is inconsistent
    auto shave = [&](bool from_left) -> Interval {
        Interval remaining = original;
        int probes = 0;
        while (true) {
            if (!consistent(remaining) || probes > opts.max_probes) {
                if (probes > opts.max_probes) return remaining;
                return Interval::empty();
            }
            Interval search = remaining;
            while (search.width() > tol && probes <= opts.max_probes) {
                double m = search.mid();
                if (!(search.lo < m && m < search.hi)) break;
                Interval first = from_left ? Interval(search.lo, m) : Interval(m, search.hi);
                Interval second = from_left ? Interval(m, search.hi) : Interval(search.lo, m);
                ++probes;
                if (consistent(first)) {
                    search = first;
                } else {
                    ++probes;
                    if (consistent(second)) {
                        search = second;
                        remaining = from_left ? Interval(second.lo, remaining.hi)
                                              : Interval(remaining.lo, second.hi);
                    } else {
                        // nothing left inside `search`; anything consistent
                        // sits beyond it
                        remaining = from_left ? Interval(search.hi, remaining.hi)
                                              : Interval(remaining.lo, search.lo);
                        if (remaining.lo >= remaining.hi) return Interval::empty();
                        goto restart;
                    }
                }
            }
            return search;
        restart:;
        }
    };

    Interval left = shave(true);
    if (left.is_empty()) return {empty_like(box), true};
    Interval right = shave(false);
    if (right.is_empty()) return {empty_like(box), true};
    Interval narrowed(left.lo, right.hi);
    if (narrowed.is_empty()) return {empty_like(box), true};
    Box out = box;
    out[d] = intersect(original, narrowed);
    if (out[d].is_empty()) return {empty_like(box), true};
    // W2 re-check on the final box
    if (!consistent(out[d])) return {empty_like(box), true};
    return {out, !(out[d] == original)};
}

struct FixpointOptions {
    double rel_progress = 0.01; // stop once no interval shrinks by 1% of its width
    double abs_progress = 1e-12;
    int max_sweeps = 1000;
};

/// Iterate single-constraint pruning until no significant progress, then
/// verify band-consistency of every constraint on the final box.
inline PruneResult prune_fixpoint(const Box& box, std::span<const Constraint> cs,
                                  const FixpointOptions& opts = {},
                                  const FlowRangeProvider* flows = nullptr) {
    if (box.is_empty()) return {box, false};
    Box cur = box;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        bool significant = false;
        for (const auto& c : cs) {
            Box before = cur;
            PruneResult r = hc4_revise(cur, c, flows);
            if (r.box.is_empty()) return {empty_like(box), true};
            cur = r.box;
            for (std::size_t i = 0; i < cur.size(); ++i) {
                double shrink = before[i].width() - cur[i].width();
                if (shrink > std::max(opts.rel_progress * before[i].width(), opts.abs_progress))
                    significant = true;
            }
        }
        if (!significant) break;
    }
    // final W2 verification: a constraint whose range misses its band on the
    // final box proves the box solution-free
    for (const auto& c : cs) {
        detail::FwdMap fwd;
        Interval r = detail::forward_eval(*c.term, cur, flows, fwd);
        if (intersect(r, c.target_band()).is_empty()) return {empty_like(box), true};
    }
    return {cur, detail::box_changed(cur, box)};
}

} // namespace dsmt
