/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsmt/derivative.hpp"
#include "dsmt/eval.hpp"
#include "dsmt/extension.hpp"

namespace dsmt {

/// Autonomous initial value problem dy/dt = g(y) on [t0, t_end]. Time
/// dependence is expressed through an extra clock component. Field terms are
/// over the state variables 0..dim-1 and may not reference flows.
struct Ivp {
    std::string name;
    int dim = 0;
    std::vector<TermPtr> field;
    Rational t0 = 0;
    Rational t_end = 0;
    std::optional<double> lipschitz; // user-supplied bound; derived per step otherwise
    std::vector<std::string> state_names;

    void validate() const {
        if (dim <= 0 || static_cast<int>(field.size()) != dim)
            throw Error("ivp " + name + ": field dimension mismatch");
        if (t0 > t_end) throw Error("ivp " + name + ": t0 > t_end");
        for (const auto& f : field) {
            if (contains_flow(*f)) throw Error("ivp " + name + ": field must not contain flows");
            for (int v : free_vars(*f))
                if (v < 0 || v >= dim) throw Error("ivp " + name + ": field variable out of range");
        }
    }
};

/// Verified enclosure of the flow tube: at_grid[i] encloses y(grid[i]) and
/// step_tube[i] encloses { y(t) : t in [grid[i], grid[i+1]] }, both over all
/// initial values in the starting box.
struct FlowEnclosure {
    std::vector<double> grid;     // size m+1
    std::vector<Box> at_grid;     // size m+1, tight endpoint boxes
    std::vector<Box> step_tube;   // size m, a-priori boxes per step
};

struct OdeOptions {
    int default_steps = 256;
    int max_steps = 1 << 17;
    double blowup_width = 1e6;
    double inflation_rel = 1e-4;
    double inflation_abs = 1e-12;
    int apriori_iters = 40;
};

namespace detail {

inline Box field_range(const Ivp& ivp, const Box& state) {
    Box g(static_cast<std::size_t>(ivp.dim));
    for (int i = 0; i < ivp.dim; ++i)
        g[static_cast<std::size_t>(i)] = natural_extension(*ivp.field[static_cast<std::size_t>(i)], state);
    return g;
}

/// Bound on the max-norm of the field Jacobian over the box (row sums).
inline std::optional<double> jacobian_norm_bound(const Ivp& ivp, const Box& state) {
    double bound = 0.0;
    for (int i = 0; i < ivp.dim; ++i) {
        double row = 0.0;
        for (int j = 0; j < ivp.dim; ++j) {
            auto d = derivative_range(*ivp.field[static_cast<std::size_t>(i)], j, state);
            if (!d || d->is_empty() || !std::isfinite(d->mag())) return std::nullopt;
            row += d->mag();
        }
        bound = std::max(bound, row);
    }
    return bound;
}

inline Interval inflate(const Interval& iv, double rel, double absl) {
    double pad = std::max(absl, rel * std::max(std::fabs(iv.lo), std::fabs(iv.hi)));
    return Interval(detail::sub_down(iv.lo, pad), detail::add_up(iv.hi, pad));
}

} // namespace detail

/// One interval Euler integration over an explicit time grid. Each step
/// first certifies an a-priori box A with B + [0,h] * g(A) inside A (the
/// Picard condition) and h * L(A) < 1, then tightens the endpoint enclosure
/// to B + h * g(A).
inline FlowEnclosure integrate(const Ivp& ivp, const Box& y0, const std::vector<double>& grid,
                               const OdeOptions& opts = {}) {
    ivp.validate();
    if (grid.size() < 2) throw Error("integrate: grid needs at least two points");
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        if (!(grid[k] < grid[k + 1])) throw Error("integrate: grid must be strictly increasing");
    if (static_cast<int>(y0.size()) != ivp.dim) throw Error("integrate: initial box dimension mismatch");

    FlowEnclosure fe;
    fe.grid = grid;
    fe.at_grid.push_back(y0);
    Box cur = y0;

    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        double h_up = detail::add_up(grid[k + 1], -grid[k]);
        double h_lo = detail::add_down(grid[k + 1], -grid[k]);
        Interval step_span(0.0, h_up);

        Box apriori = cur;
        bool certified = false;
        for (int iter = 0; iter < opts.apriori_iters; ++iter) {
            Box g = detail::field_range(ivp, apriori);
            if (g.is_empty()) throw StepRejected("field range empty at step " + std::to_string(k));
            Box cand = cur;
            for (int i = 0; i < ivp.dim; ++i)
                cand[static_cast<std::size_t>(i)] =
                    cur[static_cast<std::size_t>(i)] + step_span * g[static_cast<std::size_t>(i)];
            if (apriori.contains(cand)) {
                certified = true;
                apriori = cand; // cand is itself a valid (tighter) tube enclosure
                break;
            }
            for (int i = 0; i < ivp.dim; ++i) {
                auto idx = static_cast<std::size_t>(i);
                apriori[idx] = detail::inflate(hull(apriori[idx], cand[idx]), opts.inflation_rel,
                                               opts.inflation_abs);
            }
        }
        if (!certified)
            throw StepRejected("picard certificate failed at step " + std::to_string(k));

        double lip;
        if (ivp.lipschitz) {
            lip = *ivp.lipschitz;
        } else {
            auto l = detail::jacobian_norm_bound(ivp, apriori);
            if (!l) throw StepRejected("no finite Lipschitz bound at step " + std::to_string(k));
            lip = *l;
        }
        if (!(h_up * lip < 1.0))
            throw StepRejected("contraction h*L < 1 failed at step " + std::to_string(k));

        Box g = detail::field_range(ivp, apriori);
        Box next = cur;
        for (int i = 0; i < ivp.dim; ++i) {
            auto idx = static_cast<std::size_t>(i);
            next[idx] = intersect(cur[idx] + Interval(h_lo, h_up) * g[idx], apriori[idx]);
            if (next[idx].is_empty()) throw StepRejected("inconsistent tightening at step " + std::to_string(k));
        }
        if (next.width() > opts.blowup_width) throw BlowUp("enclosure width exceeded cap");

        fe.step_tube.push_back(apriori);
        fe.at_grid.push_back(next);
        cur = next;
    }
    return fe;
}

/// Time grid with `steps` uniform rational subdivisions, rounded outward at
/// the ends so the double grid covers [t0, t_end].
inline std::vector<double> uniform_grid(const Rational& t0, const Rational& t_end, int steps) {
    if (steps < 1) throw Error("uniform_grid: steps must be positive");
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(steps) + 1);
    g.push_back(to_double_down(t0));
    Rational span = t_end - t0;
    for (int k = 1; k < steps; ++k) {
        double t = to_double(t0 + span * k / steps);
        if (t <= g.back()) t = next_up(g.back());
        g.push_back(t);
    }
    double last = to_double_up(t_end);
    if (last <= g.back()) last = next_up(g.back());
    g.push_back(last);
    return g;
}

namespace detail {

/// Enclosure of the comp-th solution component over a time window, refined
/// inside each overlapped step by an Euler slice from the step's left grid
/// point.
inline Interval window_range(const Ivp& ivp, const FlowEnclosure& fe, int comp,
                             const Interval& window) {
    Interval clamped = intersect(window, Interval(fe.grid.front(), fe.grid.back()));
    if (clamped.is_empty()) {
        // tolerate rounding-level spill just outside the grid
        double span = fe.grid.back() - fe.grid.front();
        double slack = std::max(1e-12, 1e-12 * std::fabs(span));
        if (window.hi < fe.grid.front() && fe.grid.front() - window.hi <= slack)
            clamped = Interval(fe.grid.front(), fe.grid.front());
        else if (window.lo > fe.grid.back() && window.lo - fe.grid.back() <= slack)
            clamped = Interval(fe.grid.back(), fe.grid.back());
        else
            throw Error("flow evaluated outside its time domain");
    }
    auto c = static_cast<std::size_t>(comp);
    Interval acc = Interval::empty();
    if (clamped.lo == fe.grid.front()) acc = hull(acc, fe.at_grid.front()[c]);
    for (std::size_t k = 0; k + 1 < fe.grid.size(); ++k) {
        Interval step(fe.grid[k], fe.grid[k + 1]);
        Interval local = intersect(clamped, step);
        if (local.is_empty()) continue;
        double dt_up = add_up(local.hi, -fe.grid[k]);
        Interval g = natural_extension(*ivp.field[c], fe.step_tube[k]);
        Interval slice = fe.at_grid[k][c] + Interval(0.0, std::max(dt_up, 0.0)) * g;
        acc = hull(acc, intersect(slice, fe.step_tube[k][c]));
    }
    if (acc.is_empty()) throw Error("flow window produced no enclosure");
    return acc;
}

} // namespace detail

/// Interval extension of the comp-th component of the IVP solution over a
/// time window and a box of initial values.
inline Interval ode_extension(const Ivp& ivp, int comp, const Interval& time_window, const Box& y0,
                              const OdeOptions& opts = {}) {
    int steps = opts.default_steps;
    while (true) {
        try {
            FlowEnclosure fe = integrate(ivp, y0, uniform_grid(ivp.t0, ivp.t_end, steps), opts);
            return detail::window_range(ivp, fe, comp, time_window);
        } catch (const StepRejected&) {
            steps *= 2;
            if (steps > opts.max_steps) throw;
        }
    }
}

/// Simple ODE pruning: intersect with the solver-computed extension.
inline Interval ode_prune(const Interval& current, const Ivp& ivp, int comp,
                          const Interval& time_window, const Box& y0, const OdeOptions& opts = {}) {
    return intersect(current, ode_extension(ivp, comp, time_window, y0, opts));
}

/// Shared IVP table with a small enclosure cache; implements both the range
/// provider used by interval evaluation/pruning and the refinable point
/// provider used by exact evaluation.
class FlowSystem : public FlowRangeProvider, public FlowPointProvider {
public:
    explicit FlowSystem(std::vector<Ivp> ivps, OdeOptions opts = {})
        : ivps_(std::move(ivps)), opts_(opts) {
        for (const auto& ivp : ivps_) ivp.validate();
    }

    const std::vector<Ivp>& ivps() const { return ivps_; }
    const Ivp& ivp(int id) const { return ivps_.at(static_cast<std::size_t>(id)); }
    const OdeOptions& options() const { return opts_; }

    Interval component_range(int ivp_id, int component, const Interval& time_window,
                             const Box& initial) const override {
        const Ivp& ivp = this->ivp(ivp_id);
        if (component < 0 || component >= ivp.dim) throw Error("flow component out of range");
        try {
            auto fe = enclosure_for(ivp_id, initial, opts_.default_steps);
            if (!fe) return Interval::entire();
            return detail::window_range(ivp, *fe, component, time_window);
        } catch (const Error&) {
            return Interval::entire(); // no information, still sound for pruning
        }
    }

    RatInterval point_enclosure(int ivp_id, int component, const RatInterval& time,
                                const std::vector<RatInterval>& initial,
                                double target_width) const override {
        const Ivp& ivp = this->ivp(ivp_id);
        if (static_cast<int>(initial.size()) != ivp.dim)
            throw Error("flow initial-value arity mismatch");
        Box y0(initial.size());
        for (std::size_t i = 0; i < initial.size(); ++i)
            y0[i] = Interval(to_double_down(initial[i].lo), to_double_up(initial[i].hi));
        Interval window(to_double_down(time.lo), to_double_up(time.hi));
        int steps = opts_.default_steps;
        while (steps <= opts_.max_steps) {
            auto fe = enclosure_for(ivp_id, y0, steps);
            if (fe) {
                Interval r = detail::window_range(ivp, *fe, component, window);
                if (r.is_bounded() && r.width() < target_width)
                    return RatInterval(Rational(r.lo), Rational(r.hi));
            }
            steps *= 2;
        }
        throw PrecisionUnreachable("ODE enclosure cannot reach the requested width");
    }

private:
    using Key = std::pair<int, std::vector<double>>;

    std::shared_ptr<const FlowEnclosure> enclosure_for(int ivp_id, const Box& y0, int steps) const {
        Key key{ivp_id, {}};
        key.second.reserve(y0.size() * 2 + 1);
        for (std::size_t i = 0; i < y0.size(); ++i) {
            key.second.push_back(y0[i].lo);
            key.second.push_back(y0[i].hi);
        }
        key.second.push_back(static_cast<double>(steps));
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const Ivp& ivp = this->ivp(ivp_id);
        std::shared_ptr<const FlowEnclosure> fe;
        int n = steps;
        while (n <= opts_.max_steps) {
            try {
                fe = std::make_shared<FlowEnclosure>(
                    integrate(ivp, y0, uniform_grid(ivp.t0, ivp.t_end, n), opts_));
                break;
            } catch (const StepRejected&) {
                n *= 2;
            } catch (const BlowUp&) {
                fe = nullptr;
                break;
            }
        }
        if (cache_.size() > 512) cache_.clear();
        cache_.emplace(std::move(key), fe);
        return fe;
    }

    std::vector<Ivp> ivps_;
    OdeOptions opts_;
    mutable std::map<Key, std::shared_ptr<const FlowEnclosure>> cache_;
};

} // namespace dsmt
