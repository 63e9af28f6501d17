/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dsmt/extension.hpp"
#include "dsmt/term.hpp"

namespace dsmt {

/// Conjunction of disjunctions of equalities "f = 0" with per-variable
/// rational bounds. Inequalities of the source formula have been replaced by
/// fresh slack variables.
struct StandardForm {
    int n = 0;          // total variable count (original + slack)
    int original_n = 0; // leading n variables of the source problem
    std::vector<RationalInterval> bounds;
    std::vector<std::string> names;
    std::vector<std::vector<TermPtr>> clauses;

    struct SlackInfo {
        int var;          // slack variable index
        int clause;       // clause it was introduced in
        int disjunct;     // disjunct within the clause
        Rel original_rel; // relation it eliminated
        Rational bound_m; // upper end of its interval
        bool strict;      // (0, m] rather than [0, m]
    };
    std::vector<SlackInfo> slack_map;
};

struct DeltaWeakening {
    StandardForm base;
    Rational delta; // each disjunct f = 0 is read as |f| <= delta
};

/// A constant shift per disjunct with max-norm at most the ambient delta.
struct Perturbation {
    std::vector<std::vector<Rational>> values; // shaped like StandardForm::clauses

    Rational max_norm() const {
        Rational m = 0;
        for (const auto& clause : values)
            for (const auto& c : clause) m = std::max(m, rat_abs(c));
        return m;
    }
};

/// Negation normal form: push Not through connectives and into relations.
inline FormulaPtr nnf(const FormulaPtr& f, bool negated = false) {
    switch (f->kind) {
    case Formula::Kind::Atom:
        return negated ? Formula::atom(f->term, negate_rel(f->rel)) : f;
    case Formula::Kind::Not: return nnf(f->kids[0], !negated);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
        bool is_and = (f->kind == Formula::Kind::And) != negated;
        std::vector<FormulaPtr> kids;
        kids.reserve(f->kids.size());
        for (const auto& k : f->kids) kids.push_back(nnf(k, negated));
        return is_and ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    }
    throw Error("nnf: unknown formula kind");
}

using Literal = std::pair<TermPtr, Rel>;
using ClauseMatrix = std::vector<std::vector<Literal>>;

namespace detail {

inline constexpr std::size_t kCnfClauseLimit = 1u << 18;

inline ClauseMatrix cnf_of(const FormulaPtr& f) {
    switch (f->kind) {
    case Formula::Kind::Atom: return {{{f->term, f->rel}}};
    case Formula::Kind::Not: throw Error("cnf_of: input not in negation normal form");
    case Formula::Kind::And: {
        ClauseMatrix m;
        for (const auto& k : f->kids) {
            ClauseMatrix sub = cnf_of(k);
            m.insert(m.end(), sub.begin(), sub.end());
            if (m.size() > kCnfClauseLimit) throw Error("cnf_of: clause blowup");
        }
        if (f->kids.empty()) return {}; // empty conjunction = true
        return m;
    }
    case Formula::Kind::Or: {
        if (f->kids.empty()) return {{}}; // empty disjunction = false: one empty clause
        ClauseMatrix acc = cnf_of(f->kids[0]);
        for (std::size_t i = 1; i < f->kids.size(); ++i) {
            ClauseMatrix rhs = cnf_of(f->kids[i]);
            ClauseMatrix merged;
            merged.reserve(acc.size() * rhs.size());
            for (const auto& a : acc)
                for (const auto& b : rhs) {
                    std::vector<Literal> clause = a;
                    clause.insert(clause.end(), b.begin(), b.end());
                    merged.push_back(std::move(clause));
                    if (merged.size() > kCnfClauseLimit) throw Error("cnf_of: clause blowup");
                }
            acc = std::move(merged);
        }
        return acc;
    }
    }
    throw Error("cnf_of: unknown formula kind");
}

inline void check_divisions(const Term& t, const Box& domain, const FlowRangeProvider* flows) {
    if (t.kind == TermKind::Div) {
        Interval den = natural_extension(*t.args[1], domain, flows);
        if (den.is_empty() || den.contains_zero())
            throw UndefinedSubterm("division denominator may vanish over the domain closure");
    }
    for (const auto& a : t.args) check_divisions(*a, domain, flows);
}

} // namespace detail

/// Conjunction-of-disjunctions matrix of literals (negations already pushed
/// into the relations).
inline ClauseMatrix to_clause_matrix(const FormulaPtr& f) { return detail::cnf_of(nnf(f)); }

/// Lemma-1 style standard form: eliminate != by case split and inequalities
/// by slack variables. The slack bound m is a rigorous interval upper bound
/// of the slacked function over the closed domain, plus one.
inline StandardForm to_standard_form(const BoundedSigma1& phi,
                                     const FlowRangeProvider* flows = nullptr) {
    phi.validate();
    StandardForm sf;
    sf.n = phi.n;
    sf.original_n = phi.n;
    sf.bounds = phi.bounds;
    sf.names = phi.names;

    Box domain = box_of(phi.bounds); // closure
    // reject divisions whose denominator may vanish anywhere on the closure
    {
        std::vector<const Formula*> stack{phi.matrix.get()};
        while (!stack.empty()) {
            const Formula* f = stack.back();
            stack.pop_back();
            if (f->kind == Formula::Kind::Atom)
                detail::check_divisions(*f->term, domain, flows);
            else
                for (const auto& k : f->kids) stack.push_back(k.get());
        }
    }

    ClauseMatrix matrix = to_clause_matrix(phi.matrix);

    auto fresh_slack = [&sf](Rel rel, bool strict, const Rational& m) {
        int idx = sf.n++;
        sf.bounds.emplace_back(Rational(0), m, strict, false);
        sf.names.push_back("_v" + std::to_string(sf.slack_map.size()));
        sf.slack_map.push_back({idx, static_cast<int>(sf.clauses.size()), -1, rel, m, strict});
        return idx;
    };

    auto slack_bound = [&](const TermPtr& g) {
        Interval range = natural_extension(*g, domain, flows);
        if (range.is_empty() || !std::isfinite(range.hi))
            throw UnboundedVariable("cannot bound slacked function over the domain closure");
        Rational m = Rational(range.hi) + 1;
        if (m < 1) m = 1;
        return m;
    };

    for (const auto& clause : matrix) {
        std::vector<TermPtr> out;
        auto emit = [&](const TermPtr& g, bool is_strict, Rel orig) {
            // g >(=) 0  becomes  g - v = 0 with v in [0,m] ((0,m] if strict)
            Rational m = slack_bound(g);
            int v = fresh_slack(orig, is_strict, m);
            sf.slack_map.back().disjunct = static_cast<int>(out.size());
            out.push_back(sub(g, variable(v)));
        };
        for (const auto& [t, rel] : clause) {
            switch (rel) {
            case Rel::Eq: out.push_back(t); break;
            case Rel::Ne: // t<0 or t>0
                emit(negate(t), true, Rel::Lt);
                emit(t, true, Rel::Gt);
                break;
            case Rel::Le: emit(negate(t), false, Rel::Le); break;
            case Rel::Lt: emit(negate(t), true, Rel::Lt); break;
            case Rel::Ge: emit(t, false, Rel::Ge); break;
            case Rel::Gt: emit(t, true, Rel::Gt); break;
            }
        }
        sf.clauses.push_back(std::move(out));
    }
    return sf;
}

inline DeltaWeakening delta_weaken(StandardForm sf, const Rational& delta) {
    if (delta < 0) throw NonpositiveDelta("delta must be nonnegative");
    return DeltaWeakening{std::move(sf), delta};
}

inline StandardForm apply_perturbation(const StandardForm& sf, const Perturbation& c) {
    if (c.values.size() != sf.clauses.size())
        throw DimensionMismatch("perturbation clause count mismatch");
    StandardForm out = sf;
    for (std::size_t i = 0; i < sf.clauses.size(); ++i) {
        if (c.values[i].size() != sf.clauses[i].size())
            throw DimensionMismatch("perturbation disjunct count mismatch");
        for (std::size_t j = 0; j < sf.clauses[i].size(); ++j) {
            if (c.values[i][j] == 0) continue;
            out.clauses[i][j] = sub(sf.clauses[i][j], constant(c.values[i][j]));
        }
    }
    return out;
}

inline BoundedSigma1 closure(const BoundedSigma1& phi) {
    BoundedSigma1 out = phi;
    for (auto& b : out.bounds) b = b.closure();
    return out;
}

inline BoundedSigma1 interior(const BoundedSigma1& phi) {
    BoundedSigma1 out = phi;
    for (auto& b : out.bounds) b = b.interior();
    return out;
}

inline StandardForm closure(const StandardForm& sf) {
    StandardForm out = sf;
    for (auto& b : out.bounds) b = b.closure();
    return out;
}

inline StandardForm interior(const StandardForm& sf) {
    StandardForm out = sf;
    for (auto& b : out.bounds) b = b.interior();
    return out;
}

} // namespace dsmt
