/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsmt/prune.hpp"

namespace dsmt {

enum class IcpMode {
    Certificate,  // report delta-sat only when every range fits inside [-delta, delta]
    PaperEpsilon, // literal branch-and-prune: sat when the box is smaller than epsilon
};

enum class BranchRule { LargestFirst, RoundRobin };

struct IcpConfig {
    Rational delta = Rational(1, 1000);
    std::optional<Rational> epsilon; // paper-epsilon mode: derived from delta when absent
    IcpMode mode = IcpMode::Certificate;
    std::uint64_t max_boxes = 1u << 22;
    BranchRule branch_rule = BranchRule::LargestFirst;
    double min_width = 0x1p-40; // certificate mode: below this a box is inconclusive
    std::uint64_t seed = 0;     // rotates tie-breaking between equally wide dimensions
    FixpointOptions fixpoint;

    void validate() const {
        if (delta <= 0) throw NonpositiveDelta("solver delta must be positive");
        if (epsilon && *epsilon <= 0) throw Error("epsilon must be positive");
    }
};

/// Machine-checkable delta-sat witness: a box together with the interval
/// ranges of every constraint over it.
struct Certificate {
    Box witness;
    std::vector<Interval> ranges;
};

struct IcpAnswer {
    enum class Kind { Unsat, DeltaSat, ResourceOut };
    Kind kind = Kind::Unsat;
    std::optional<Certificate> cert;
    std::uint64_t boxes_processed = 0;
    std::string note;

    bool is_unsat() const { return kind == Kind::Unsat; }
    bool is_delta_sat() const { return kind == Kind::DeltaSat; }
};

/// Independent re-check of a delta-sat certificate: every constraint's
/// natural extension over the witness must land inside [-delta, +delta].
/// Comparisons are exact (rational against float endpoints).
inline bool certificate_check(const Box& witness, const std::vector<Constraint>& cs,
                              const Rational& delta, const FlowRangeProvider* flows = nullptr) {
    if (witness.is_empty()) return false;
    for (const auto& c : cs) {
        Interval r = natural_extension(*c.term, witness, flows);
        if (r.is_empty()) return false;
        if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) return false;
        if (Rational(r.lo) < -delta || Rational(r.hi) > delta) return false;
    }
    return true;
}

/// Sound precision from delta: with L_i an interval bound on the gradient
/// max-norm of f_i over the initial box, any two points closer than
/// delta / (2 n L_i) differ by less than delta under f_i.
inline Rational epsilon_from_delta(const std::vector<Constraint>& cs, const Box& box,
                                   const Rational& delta, const FlowRangeProvider* flows = nullptr) {
    if (delta <= 0) throw NonpositiveDelta("epsilon_from_delta: delta must be positive");
    Rational eps = 0;
    bool any = false;
    auto n = static_cast<long>(box.size());
    for (const auto& c : cs) {
        auto bound = gradient_sup_bound(*c.term, box.size(), box, flows);
        if (!bound) throw UnboundedDerivative("no finite derivative bound; pass an explicit epsilon");
        if (*bound == 0.0) continue; // constant in every variable: any epsilon works
        Rational e = delta / (2 * Rational(*bound) * n);
        eps = any ? std::min(eps, e) : e;
        any = true;
    }
    if (!any) {
        // all constraints constant: one box inspection decides, any epsilon
        // wider than the box does
        double w = box.width();
        eps = std::isfinite(w) && w > 0 ? Rational(w) : Rational(1);
    }
    return eps;
}

namespace detail {

inline std::vector<Interval> constraint_ranges(const Box& box, const std::vector<Constraint>& cs,
                                               const FlowRangeProvider* flows) {
    std::vector<Interval> rs;
    rs.reserve(cs.size());
    for (const auto& c : cs) rs.push_back(natural_extension(*c.term, box, flows));
    return rs;
}

inline bool ranges_within_band(const std::vector<Interval>& rs, const Rational& delta) {
    for (const auto& r : rs) {
        if (r.is_empty() || !std::isfinite(r.lo) || !std::isfinite(r.hi)) return false;
        if (Rational(r.lo) < -delta || Rational(r.hi) > delta) return false;
    }
    return true;
}

/// Widest dimension at least `floor` wide; ties rotated by seed, lowest
/// index for seed 0.
inline int pick_branch_dim(const Box& box, double floor, BranchRule rule, std::uint64_t seed,
                           std::uint64_t depth_hint) {
    std::vector<int> eligible;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (box[i].width() >= floor) eligible.push_back(static_cast<int>(i));
    if (eligible.empty()) return -1;
    if (rule == BranchRule::RoundRobin) {
        auto pick = (depth_hint + seed) % eligible.size();
        return eligible[static_cast<std::size_t>(pick)];
    }
    double best = -1.0;
    std::vector<int> widest;
    for (int i : eligible) {
        double w = box[static_cast<std::size_t>(i)].width();
        if (w > best) {
            best = w;
            widest.assign(1, i);
        } else if (w == best) {
            widest.push_back(i);
        }
    }
    return widest[static_cast<std::size_t>(seed % widest.size())];
}

} // namespace detail

/// Branch-and-prune decision loop over a conjunction of standard-form
/// equalities. Unsat is claimed only after the whole initial box is pruned
/// away; delta-sat carries a certificate.
inline IcpAnswer solve_conjunction(const std::vector<Constraint>& cs, const Box& initial,
                                   IcpConfig cfg, const FlowRangeProvider* flows = nullptr) {
    cfg.validate();
    if (initial.is_empty() || initial.size() == 0)
        return {IcpAnswer::Kind::Unsat, std::nullopt, 0, "empty initial box"};
    if (!std::isfinite(initial.width())) throw Error("solve_conjunction: initial box must be bounded");

    double eps_floor = cfg.min_width;
    if (cfg.mode == IcpMode::PaperEpsilon) {
        Rational eps = cfg.epsilon ? *cfg.epsilon : epsilon_from_delta(cs, initial, cfg.delta, flows);
        eps_floor = to_double_down(eps);
        if (eps_floor <= 0) eps_floor = std::numeric_limits<double>::min();
    }

    struct Item {
        Box box;
        std::uint64_t depth;
    };
    std::vector<Item> stack;
    stack.push_back({initial, 0});
    std::uint64_t processed = 0;
    bool inconclusive = false;

    while (!stack.empty()) {
        if (++processed > cfg.max_boxes)
            return {IcpAnswer::Kind::ResourceOut, std::nullopt, processed, "box budget exhausted"};
        Item item = std::move(stack.back());
        stack.pop_back();

        PruneResult pruned = prune_fixpoint(item.box, cs, cfg.fixpoint, flows);
        if (pruned.box.is_empty()) continue;
        const Box& b = pruned.box;

        if (cfg.mode == IcpMode::Certificate) {
            auto ranges = detail::constraint_ranges(b, cs, flows);
            if (detail::ranges_within_band(ranges, cfg.delta))
                return {IcpAnswer::Kind::DeltaSat, Certificate{b, std::move(ranges)}, processed, ""};
            int dim = detail::pick_branch_dim(b, eps_floor, cfg.branch_rule, cfg.seed, item.depth);
            if (dim < 0) {
                // too small to split, yet the certificate does not close
                inconclusive = true;
                continue;
            }
            auto [left, right] = bisect(b, dim);
            stack.push_back({std::move(right), item.depth + 1});
            stack.push_back({std::move(left), item.depth + 1});
        } else {
            int dim = detail::pick_branch_dim(b, eps_floor, cfg.branch_rule, cfg.seed, item.depth);
            if (dim < 0) {
                // ||B|| < epsilon: Algorithm 1 reports sat here
                auto ranges = detail::constraint_ranges(b, cs, flows);
                return {IcpAnswer::Kind::DeltaSat, Certificate{b, std::move(ranges)}, processed, ""};
            }
            auto [left, right] = bisect(b, dim);
            stack.push_back({std::move(right), item.depth + 1});
            stack.push_back({std::move(left), item.depth + 1});
        }
    }
    if (inconclusive)
        return {IcpAnswer::Kind::ResourceOut, std::nullopt, processed,
                "boxes below the width floor still fail the certificate"};
    return {IcpAnswer::Kind::Unsat, std::nullopt, processed, ""};
}

} // namespace dsmt
