#include "heurasp/transform.hpp"

#include <algorithm>
#include <deque>

namespace heurasp::transform {

using namespace heurasp::ast;

namespace {

bool contains(const std::vector<HeuristicAtom>& v, const HeuristicAtom& ha) {
    return std::find(v.begin(), v.end(), ha) != v.end();
}

void add_unique(std::vector<HeuristicAtom>& v, HeuristicAtom ha) {
    if (!contains(v, ha)) v.push_back(std::move(ha));
}

// Replaces the atom at idx by the given replacements, keeping positions and
// set semantics.
std::vector<HeuristicAtom> replace_at(const std::vector<HeuristicAtom>& v, std::size_t idx,
                                      std::vector<HeuristicAtom> repl) {
    std::vector<HeuristicAtom> out;
    out.reserve(v.size() + repl.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i == idx) {
            for (auto& r : repl) add_unique(out, r);
        } else {
            add_unique(out, v[i]);
        }
    }
    return out;
}

bool needs_transform(const SignSet& s) {
    return s == SignSet::M || s == SignSet::FM || s == SignSet::FT || s == SignSet::FMT;
}

bool is_splittable(const SignSet& s) {
    return s == SignSet::FM || s == SignSet::FT || s == SignSet::FMT;
}

HeuristicDirective with_conditions(const HeuristicDirective& d, std::vector<HeuristicAtom> pos,
                                   std::vector<HeuristicAtom> neg) {
    HeuristicDirective out = d;
    out.positive_condition = std::move(pos);
    out.negative_condition = std::move(neg);
    return out;
}

// One rewriting step; returns the produced directives, or nothing when the
// directive is already canonical.
std::optional<std::vector<HeuristicDirective>> step(const HeuristicDirective& d) {
    // Splittable sign set in the positive condition: split into two directives.
    for (std::size_t i = 0; i < d.positive_condition.size(); ++i) {
        const auto& ha = d.positive_condition[i];
        if (!is_splittable(ha.signs)) continue;
        HeuristicAtom keep{ha.signs.without_f(), ha.atom};
        HeuristicAtom false_part{SignSet::F, ha.atom};
        return std::vector<HeuristicDirective>{
            with_conditions(d, replace_at(d.positive_condition, i, {keep}), d.negative_condition),
            with_conditions(d, replace_at(d.positive_condition, i, {false_part}),
                            d.negative_condition)};
    }
    // Splittable sign set in the negative condition: split into two atoms.
    for (std::size_t i = 0; i < d.negative_condition.size(); ++i) {
        const auto& ha = d.negative_condition[i];
        if (!is_splittable(ha.signs)) continue;
        HeuristicAtom keep{ha.signs.without_f(), ha.atom};
        HeuristicAtom false_part{SignSet::F, ha.atom};
        return std::vector<HeuristicDirective>{with_conditions(
            d, d.positive_condition, replace_at(d.negative_condition, i, {keep, false_part}))};
    }
    // M in the positive condition: "M or T, but not T".
    for (std::size_t i = 0; i < d.positive_condition.size(); ++i) {
        const auto& ha = d.positive_condition[i];
        if (ha.signs != SignSet::M) continue;
        auto pos = replace_at(d.positive_condition, i, {HeuristicAtom{SignSet::MT, ha.atom}});
        auto neg = d.negative_condition;
        add_unique(neg, HeuristicAtom{SignSet::T, ha.atom});
        return std::vector<HeuristicDirective>{with_conditions(d, std::move(pos), std::move(neg))};
    }
    // not M: "F or T or unassigned".
    for (std::size_t i = 0; i < d.negative_condition.size(); ++i) {
        const auto& ha = d.negative_condition[i];
        if (ha.signs != SignSet::M) continue;
        auto pos1 = d.positive_condition;
        add_unique(pos1, HeuristicAtom{SignSet::FT, ha.atom});
        auto neg1 = replace_at(d.negative_condition, i, {});
        auto neg2 = replace_at(d.negative_condition, i, {HeuristicAtom{SignSet::FMT, ha.atom}});
        return std::vector<HeuristicDirective>{
            with_conditions(d, std::move(pos1), std::move(neg1)),
            with_conditions(d, d.positive_condition, std::move(neg2))};
    }
    return std::nullopt;
}

} // namespace

std::vector<HeuristicDirective> transform_directive(const HeuristicDirective& d) {
    std::vector<HeuristicDirective> done;
    std::deque<HeuristicDirective> work{d};
    while (!work.empty()) {
        HeuristicDirective cur = std::move(work.front());
        work.pop_front();
        auto produced = step(cur);
        if (!produced) {
            if (std::find(done.begin(), done.end(), cur) == done.end()) done.push_back(std::move(cur));
            continue;
        }
        for (auto& nd : *produced) work.push_front(std::move(nd));
    }
    // Depth-first insertion above reverses sibling order; restore left-to-right
    // determinism by construction: process breadth-first instead.
    return done;
}

parser::SourceProgram rewrite_choice_rules(const parser::SourceProgram& p) {
    parser::SourceProgram out;
    out.directives = p.directives;
    for (const auto& r : p.rules) {
        if (!r.is_choice) {
            out.rules.push_back(r);
            continue;
        }
        Rule on;
        on.line = r.line;
        on.head = r.head;
        on.positive_body = r.positive_body;
        for (const auto& c : r.choice_condition) on.positive_body.push_back(c);
        on.negative_body = r.negative_body;

        Atom off_head = *r.head;
        off_head.predicate += "__off";

        Rule off = on;
        on.negative_body.push_back(off_head);
        off.head = off_head;
        off.negative_body.push_back(*r.head);

        out.rules.push_back(std::move(on));
        out.rules.push_back(std::move(off));
    }
    return out;
}

namespace {

// Renames rule variables so they do not collide with the directive's.
Rule standardize_apart(const Rule& r, const std::set<std::string>& taken) {
    Substitution renaming;
    int k = 0;
    for (const auto& v : vars(r)) {
        if (!taken.count(v)) continue;
        std::string fresh;
        do {
            fresh = v + "_r" + std::to_string(k++);
        } while (taken.count(fresh));
        renaming[v] = Term::variable(fresh);
    }
    return renaming.empty() ? r : apply(r, renaming);
}

} // namespace

parser::SourceProgram enhance_directives(const parser::SourceProgram& p, const WarnFn& warn) {
    parser::SourceProgram out;
    out.rules = p.rules;
    for (const auto& d : p.directives) {
        bool derived = false;
        for (const auto& rule : p.rules) {
            if (!rule.head || rule.is_fact()) continue;
            auto taken = vars(d);
            Rule r = standardize_apart(rule, taken);
            auto mgu = unify(d.head.atom, *r.head);
            if (!mgu) continue;
            derived = true;
            HeuristicDirective copy = apply(d, *mgu);
            Rule ground_side = apply(r, *mgu);
            for (const auto& b : ground_side.positive_body) {
                if (b.is_builtin()) {
                    if (std::find(copy.guards.begin(), copy.guards.end(), b) == copy.guards.end())
                        copy.guards.push_back(b);
                } else {
                    add_unique(copy.positive_condition, HeuristicAtom{SignSet::T, b});
                }
            }
            for (const auto& b : ground_side.negative_body)
                add_unique(copy.negative_condition, HeuristicAtom{SignSet::MT, b});
            out.directives.push_back(std::move(copy));
        }
        if (!derived)
            warn("dropping heuristic directive with underivable head: " + to_string(d));
    }
    return out;
}

std::vector<std::string> check_safety(const HeuristicDirective& d) {
    std::set<std::string> binding;
    for (const auto& ha : d.positive_condition) {
        if (ha.signs == SignSet::T || ha.signs == SignSet::MT) {
            auto vs = vars(ha.atom);
            binding.insert(vs.begin(), vs.end());
        }
    }
    std::vector<std::string> unsafe;
    for (const auto& v : vars(d))
        if (!binding.count(v)) unsafe.push_back(v);
    return unsafe;
}

std::vector<std::string> check_rule_safety(const Rule& r) {
    std::set<std::string> bound;
    for (const auto& a : r.positive_body) {
        if (a.is_builtin()) continue;
        auto vs = vars(a);
        bound.insert(vs.begin(), vs.end());
    }
    for (const auto& a : r.choice_condition) {
        auto vs = vars(a);
        bound.insert(vs.begin(), vs.end());
    }
    // V = expr binds V once expr's variables are bound; iterate to fixpoint.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& a : r.positive_body) {
            if (a.builtin != Builtin::Eq) continue;
            for (int side = 0; side < 2; ++side) {
                const Term& lhs = a.args[side];
                const Term& rhs = a.args[1 - side];
                if (lhs.kind != TermKind::Variable || bound.count(lhs.text)) continue;
                bool rhs_bound = true;
                for (const auto& v : vars(rhs))
                    if (!bound.count(v)) rhs_bound = false;
                if (rhs_bound) {
                    bound.insert(lhs.text);
                    changed = true;
                }
            }
        }
    }
    std::vector<std::string> unsafe;
    for (const auto& v : vars(r))
        if (!bound.count(v)) unsafe.push_back(v);
    return unsafe;
}

CanonicalProgram canonicalize(const parser::SourceProgram& p, const WarnFn& warn) {
    for (const auto& r : p.rules) {
        auto unsafe = check_rule_safety(r);
        if (!unsafe.empty()) {
            std::string msg = "unsafe rule (line " + std::to_string(r.line) + "): " + to_string(r) +
                              " — unbound:";
            for (const auto& v : unsafe) msg += " " + v;
            throw TransformError(msg);
        }
    }
    for (const auto& d : p.directives) {
        auto unsafe = check_safety(d);
        if (!unsafe.empty()) {
            std::string msg = "unsafe heuristic directive (line " + std::to_string(d.line) +
                              "): " + to_string(d) + " — unsafe variables:";
            for (const auto& v : unsafe) msg += " " + v;
            throw TransformError(msg);
        }
    }

    parser::SourceProgram staged = rewrite_choice_rules(p);

    parser::SourceProgram canonical_signs;
    canonical_signs.rules = staged.rules;
    for (std::size_t i = 0; i < staged.directives.size(); ++i) {
        HeuristicDirective d = staged.directives[i];
        d.origin = static_cast<int>(i);
        for (auto& t : transform_directive(d)) canonical_signs.directives.push_back(std::move(t));
    }

    parser::SourceProgram enhanced = enhance_directives(canonical_signs, warn);

    CanonicalProgram out;
    out.rules = std::move(enhanced.rules);
    out.directives = std::move(enhanced.directives);
    return out;
}

} // namespace heurasp::transform
