/*
 * Copyright 2026 the deltasmt authors.
 * License: Apache License 2.0
 */
#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dsmt/rational.hpp"

namespace dsmt {

enum class TermKind {
    Constant,
    Variable,
    Negate,
    Add,
    Sub,
    Mul,
    Div,
    Pow, // integer exponent >= 1
    Exp,
    Sin,
    Cos,
    Min,
    Max,
    Abs,
    Flow, // component of an IVP solution: args = (time, y0_1 ... y0_k)
};

class Term;
using TermPtr = std::shared_ptr<const Term>;

/// Immutable expression node. Terms are shared freely; all traversals are
/// read-only.
class Term {
public:
    TermKind kind;
    Rational value;             // Constant
    int var = -1;               // Variable
    int exponent = 0;           // Pow
    int ivp = -1;               // Flow: index into the problem's IVP table
    int component = -1;         // Flow: solution component
    std::vector<TermPtr> args;

    static TermPtr constant(Rational v) {
        auto t = std::make_shared<Term>();
        t->kind = TermKind::Constant;
        t->value = std::move(v);
        return t;
    }
    static TermPtr variable(int index) {
        auto t = std::make_shared<Term>();
        t->kind = TermKind::Variable;
        t->var = index;
        return t;
    }
    static TermPtr unary(TermKind k, TermPtr a) {
        auto t = std::make_shared<Term>();
        t->kind = k;
        t->args = {std::move(a)};
        return t;
    }
    static TermPtr binary(TermKind k, TermPtr a, TermPtr b) {
        auto t = std::make_shared<Term>();
        t->kind = k;
        t->args = {std::move(a), std::move(b)};
        return t;
    }
    static TermPtr power(TermPtr a, int n) {
        if (n < 1) throw Error("pow: exponent must be a positive integer");
        auto t = std::make_shared<Term>();
        t->kind = TermKind::Pow;
        t->exponent = n;
        t->args = {std::move(a)};
        return t;
    }
    static TermPtr flow(int ivp, int component, TermPtr time, std::vector<TermPtr> y0) {
        auto t = std::make_shared<Term>();
        t->kind = TermKind::Flow;
        t->ivp = ivp;
        t->component = component;
        t->args.reserve(y0.size() + 1);
        t->args.push_back(std::move(time));
        for (auto& y : y0) t->args.push_back(std::move(y));
        return t;
    }
};

inline TermPtr constant(Rational v) { return Term::constant(std::move(v)); }
inline TermPtr constant(long v) { return Term::constant(Rational(v)); }
inline TermPtr variable(int i) { return Term::variable(i); }
inline TermPtr negate(TermPtr a) { return Term::unary(TermKind::Negate, std::move(a)); }
inline TermPtr add(TermPtr a, TermPtr b) { return Term::binary(TermKind::Add, std::move(a), std::move(b)); }
inline TermPtr sub(TermPtr a, TermPtr b) { return Term::binary(TermKind::Sub, std::move(a), std::move(b)); }
inline TermPtr mul(TermPtr a, TermPtr b) { return Term::binary(TermKind::Mul, std::move(a), std::move(b)); }
inline TermPtr divide(TermPtr a, TermPtr b) { return Term::binary(TermKind::Div, std::move(a), std::move(b)); }
inline TermPtr power(TermPtr a, int n) { return Term::power(std::move(a), n); }
inline TermPtr exp_term(TermPtr a) { return Term::unary(TermKind::Exp, std::move(a)); }
inline TermPtr sin_term(TermPtr a) { return Term::unary(TermKind::Sin, std::move(a)); }
inline TermPtr cos_term(TermPtr a) { return Term::unary(TermKind::Cos, std::move(a)); }
inline TermPtr min_term(TermPtr a, TermPtr b) { return Term::binary(TermKind::Min, std::move(a), std::move(b)); }
inline TermPtr max_term(TermPtr a, TermPtr b) { return Term::binary(TermKind::Max, std::move(a), std::move(b)); }
inline TermPtr abs_term(TermPtr a) { return Term::unary(TermKind::Abs, std::move(a)); }

inline void collect_vars(const Term& t, std::set<int>& out) {
    if (t.kind == TermKind::Variable) {
        out.insert(t.var);
        return;
    }
    for (const auto& a : t.args) collect_vars(*a, out);
}

inline std::set<int> free_vars(const Term& t) {
    std::set<int> s;
    collect_vars(t, s);
    return s;
}

inline bool structurally_equal(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case TermKind::Constant: return a.value == b.value;
    case TermKind::Variable: return a.var == b.var;
    case TermKind::Pow:
        if (a.exponent != b.exponent) return false;
        break;
    case TermKind::Flow:
        if (a.ivp != b.ivp || a.component != b.component) return false;
        break;
    default: break;
    }
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structurally_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

inline bool contains_flow(const Term& t) {
    if (t.kind == TermKind::Flow) return true;
    for (const auto& a : t.args)
        if (contains_flow(*a)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// formulas

enum class Rel { Lt, Le, Gt, Ge, Eq, Ne };

inline Rel negate_rel(Rel r) {
    switch (r) {
    case Rel::Lt: return Rel::Ge;
    case Rel::Le: return Rel::Gt;
    case Rel::Gt: return Rel::Le;
    case Rel::Ge: return Rel::Lt;
    case Rel::Eq: return Rel::Ne;
    case Rel::Ne: return Rel::Eq;
    }
    return Rel::Eq;
}

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Boolean combination of atoms "term rel 0". `Not` survives parsing and is
/// eliminated by normalization.
class Formula {
public:
    enum class Kind { Atom, And, Or, Not };
    Kind kind;
    TermPtr term; // Atom
    Rel rel = Rel::Eq;
    std::vector<FormulaPtr> kids;

    static FormulaPtr atom(TermPtr t, Rel r) {
        auto f = std::make_shared<Formula>();
        f->kind = Kind::Atom;
        f->term = std::move(t);
        f->rel = r;
        return f;
    }
    static FormulaPtr conj(std::vector<FormulaPtr> fs) {
        auto f = std::make_shared<Formula>();
        f->kind = Kind::And;
        f->kids = std::move(fs);
        return f;
    }
    static FormulaPtr disj(std::vector<FormulaPtr> fs) {
        auto f = std::make_shared<Formula>();
        f->kind = Kind::Or;
        f->kids = std::move(fs);
        return f;
    }
    static FormulaPtr negation(FormulaPtr g) {
        auto f = std::make_shared<Formula>();
        f->kind = Kind::Not;
        f->kids = {std::move(g)};
        return f;
    }
    static FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
        return disj({negation(std::move(a)), std::move(b)});
    }
};

inline void collect_vars(const Formula& f, std::set<int>& out) {
    if (f.kind == Formula::Kind::Atom) {
        collect_vars(*f.term, out);
        return;
    }
    for (const auto& k : f.kids) collect_vars(*k, out);
}

inline std::set<int> free_vars(const Formula& f) {
    std::set<int> s;
    collect_vars(f, s);
    return s;
}

inline bool structurally_equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Formula::Kind::Atom)
        return a.rel == b.rel && structurally_equal(*a.term, *b.term);
    if (a.kids.size() != b.kids.size()) return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!structurally_equal(*a.kids[i], *b.kids[i])) return false;
    return true;
}

inline bool contains_flow(const Formula& f) {
    if (f.kind == Formula::Kind::Atom) return contains_flow(*f.term);
    for (const auto& k : f.kids)
        if (contains_flow(*k)) return true;
    return false;
}

/// A bounded existential problem: every variable carries a finite rational
/// interval bound and the matrix is a quantifier-free formula over them.
struct BoundedSigma1 {
    int n = 0;
    std::vector<RationalInterval> bounds;
    FormulaPtr matrix;
    std::vector<std::string> names;

    void validate() const {
        if (static_cast<int>(bounds.size()) != n || static_cast<int>(names.size()) != n)
            throw Error("BoundedSigma1: bounds/names size mismatch");
        if (!matrix) throw Error("BoundedSigma1: missing matrix");
        for (int v : free_vars(*matrix))
            if (v < 0 || v >= n) throw UnboundedVariable("variable index " + std::to_string(v) + " has no bound");
        for (const auto& b : bounds)
            if (b.empty_interior() && (b.lo_open || b.hi_open))
                throw Error("BoundedSigma1: empty domain interval");
    }
};

} // namespace dsmt
