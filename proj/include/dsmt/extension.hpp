/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <vector>

#include "dsmt/box.hpp"
#include "dsmt/term.hpp"

namespace dsmt {

/// Range enclosures for ODE solution components, implemented by the ode
/// module and injected wherever Flow terms can appear.
class FlowRangeProvider {
public:
    virtual ~FlowRangeProvider() = default;
    /// Enclosure of { y_component(t; y0) : t in time_window, y0 in initial }.
    virtual Interval component_range(int ivp, int component, const Interval& time_window,
                                     const Box& initial) const = 0;
};

/// Natural interval extension: replace every operator by its interval
/// counterpart. The containment {f(x) : x in box} subseteq result holds for
/// every term defined on the box.
inline Interval natural_extension(const Term& t, const Box& box,
                                  const FlowRangeProvider* flows = nullptr) {
    switch (t.kind) {
    case TermKind::Constant: return hull_of(t.value);
    case TermKind::Variable: return box[static_cast<std::size_t>(t.var)];
    case TermKind::Negate: return -natural_extension(*t.args[0], box, flows);
    case TermKind::Add:
        return natural_extension(*t.args[0], box, flows) + natural_extension(*t.args[1], box, flows);
    case TermKind::Sub:
        return natural_extension(*t.args[0], box, flows) - natural_extension(*t.args[1], box, flows);
    case TermKind::Mul:
        return natural_extension(*t.args[0], box, flows) * natural_extension(*t.args[1], box, flows);
    case TermKind::Div:
        return div(natural_extension(*t.args[0], box, flows),
                   natural_extension(*t.args[1], box, flows));
    case TermKind::Pow: return ipow(natural_extension(*t.args[0], box, flows), t.exponent);
    case TermKind::Exp: return iexp(natural_extension(*t.args[0], box, flows));
    case TermKind::Sin: return isin(natural_extension(*t.args[0], box, flows));
    case TermKind::Cos: return icos(natural_extension(*t.args[0], box, flows));
    case TermKind::Min:
        return imin(natural_extension(*t.args[0], box, flows),
                    natural_extension(*t.args[1], box, flows));
    case TermKind::Max:
        return imax(natural_extension(*t.args[0], box, flows),
                    natural_extension(*t.args[1], box, flows));
    case TermKind::Abs: return iabs(natural_extension(*t.args[0], box, flows));
    case TermKind::Flow: {
        if (flows == nullptr) throw Error("flow term evaluated without an IVP table");
        Interval time = natural_extension(*t.args[0], box, flows);
        Box initial(t.args.size() - 1);
        for (std::size_t i = 1; i < t.args.size(); ++i)
            initial[i - 1] = natural_extension(*t.args[i], box, flows);
        if (time.is_empty() || initial.is_empty()) return Interval::empty();
        return flows->component_range(t.ivp, t.component, time, initial);
    }
    }
    throw Error("natural_extension: unknown term kind");
}

} // namespace dsmt
