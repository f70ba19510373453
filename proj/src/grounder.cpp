#include "heurasp/grounder.hpp"

#include <algorithm>
#include <functional>

namespace heurasp::ground {

using namespace heurasp::ast;

namespace {

// Evaluates a comparison built-in under sigma. Returns nullopt when some
// variable is still unbound (defer), true/false once decidable. A binding
// `V = expr` extends sigma.
std::optional<bool> eval_builtin(const Atom& b, Substitution& sigma) {
    Term lhs = apply(b.args[0], sigma);
    Term rhs = apply(b.args[1], sigma);
    if (b.builtin == Builtin::Eq) {
        if (lhs.kind == TermKind::Variable && rhs.is_ground()) {
            sigma[lhs.text] = rhs;
            return true;
        }
        if (rhs.kind == TermKind::Variable && lhs.is_ground()) {
            sigma[rhs.text] = lhs;
            return true;
        }
    }
    if (!lhs.is_ground() || !rhs.is_ground()) return std::nullopt;
    switch (b.builtin) {
    case Builtin::Eq: return lhs == rhs;
    case Builtin::Neq: return !(lhs == rhs);
    default: break;
    }
    std::int64_t l = eval_int(lhs);
    std::int64_t r = eval_int(rhs);
    switch (b.builtin) {
    case Builtin::Lt: return l < r;
    case Builtin::Le: return l <= r;
    case Builtin::Gt: return l > r;
    case Builtin::Ge: return l >= r;
    default: break;
    }
    throw GroundError("unexpected builtin");
}

// Matches a pattern term against a ground term, extending sigma. Arithmetic
// patterns must be evaluable under sigma (they never bind).
bool match_term(const Term& pattern, const Term& value, Substitution& sigma) {
    switch (pattern.kind) {
    case TermKind::Variable: {
        auto it = sigma.find(pattern.text);
        if (it != sigma.end()) return it->second == value;
        sigma[pattern.text] = value;
        return true;
    }
    case TermKind::Constant: return value.kind == TermKind::Constant && value.text == pattern.text;
    case TermKind::Integer: return value.kind == TermKind::Integer && value.value == pattern.value;
    case TermKind::Function: {
        if (value.kind != TermKind::Function || value.text != pattern.text ||
            value.args.size() != pattern.args.size())
            return false;
        for (std::size_t i = 0; i < pattern.args.size(); ++i)
            if (!match_term(pattern.args[i], value.args[i], sigma)) return false;
        return true;
    }
    case TermKind::Arithmetic: {
        Term inst = apply(pattern, sigma);
        if (!inst.is_ground()) return false;
        return Term::integer(eval_int(inst)) == value;
    }
    case TermKind::Interval: return false;
    }
    return false;
}

bool match_atom(const Atom& pattern, const Atom& value, Substitution& sigma) {
    if (pattern.predicate != value.predicate || pattern.args.size() != value.args.size())
        return false;
    for (std::size_t i = 0; i < pattern.args.size(); ++i)
        if (!match_term(pattern.args[i], value.args[i], sigma)) return false;
    return true;
}

// True when every arithmetic subterm is evaluable under sigma, so the atom
// can be matched against working memory.
bool arithmetic_ready(const Term& t, const Substitution& sigma) {
    if (t.kind == TermKind::Arithmetic) {
        for (const auto& v : vars(t))
            if (!sigma.count(v)) return false;
        return true;
    }
    for (const auto& a : t.args)
        if (!arithmetic_ready(a, sigma)) return false;
    return true;
}

bool atom_ready(const Atom& a, const Substitution& sigma) {
    for (const auto& t : a.args)
        if (!arithmetic_ready(t, sigma)) return false;
    return true;
}

std::vector<std::string> sorted_vars_of(const std::set<std::string>& s) {
    return {s.begin(), s.end()};
}

} // namespace

std::vector<NogoodSpec> rule_to_nogoods(const GroundRuleRecord& g) {
    using solve::lit_f;
    using solve::lit_t;
    std::vector<NogoodSpec> out;
    auto push = [&](std::vector<Literal> lits, int head) {
        NogoodSpec s;
        s.literals = std::move(lits);
        s.head_pos = head;
        s.rule_record = g.id;
        out.push_back(std::move(s));
    };

    if (g.is_constraint_record()) {
        std::vector<Literal> lits;
        for (AtomId a : g.positive_body) lits.push_back(lit_t(a));
        for (AtomId a : g.negative_body) lits.push_back(lit_f(a));
        push(std::move(lits), -1);
        return out;
    }
    if (g.positive_body.empty() && g.negative_body.empty()) {
        push({lit_f(*g.head)}, 0); // fact
        return out;
    }

    // Body atom definition.
    {
        std::vector<Literal> lits{lit_f(g.beta)};
        for (AtomId a : g.positive_body) lits.push_back(lit_t(a));
        for (AtomId a : g.negative_body) lits.push_back(lit_f(a));
        push(std::move(lits), 0);
    }
    // Head support.
    push({lit_f(*g.head), lit_t(g.beta)}, 0);
    // Body falsification per literal.
    for (AtomId a : g.positive_body) push({lit_t(g.beta), lit_f(a)}, -1);
    for (AtomId a : g.negative_body) push({lit_t(g.beta), lit_t(a)}, -1);
    // Choice gates.
    if (!g.negative_body.empty()) {
        std::vector<Literal> on{lit_f(g.choice_on)};
        for (AtomId a : g.positive_body) on.push_back(lit_t(a));
        push(std::move(on), 0);
        for (AtomId a : g.negative_body) push({lit_f(g.choice_off), lit_t(a)}, 0);
    }
    return out;
}

std::vector<NogoodSpec> directive_to_nogoods(const HeuristicRecord& h) {
    using solve::lit_f;
    using solve::lit_t;
    std::vector<NogoodSpec> out;
    auto push = [&](std::vector<Literal> lits) {
        NogoodSpec s;
        s.literals = std::move(lits);
        s.head_pos = 0;
        s.heu_record = h.id;
        out.push_back(std::move(s));
    };
    auto group = [&](AtomId gate, const std::vector<AtomId>& atoms, bool pol_true) {
        std::vector<Literal> lits{lit_f(gate)};
        for (AtomId a : atoms) lits.push_back(pol_true ? lit_t(a) : lit_f(a));
        push(std::move(lits));
    };
    group(h.heu_on_t, h.pos_t, true);
    group(h.heu_on_mt, h.pos_mt, true);
    group(h.heu_on_f, h.pos_f, false);
    for (AtomId a : h.neg_t) push({lit_f(h.heu_off_t), lit_t(a)});
    for (AtomId a : h.neg_mt) push({lit_f(h.heu_off_mt), lit_t(a)});
    for (AtomId a : h.neg_f) push({lit_f(h.heu_off_f), lit_f(a)});
    return out;
}

Grounder::Grounder(const transform::CanonicalProgram& program, AtomStore& store)
    : program_(program), store_(store) {
    rule_shapes_.resize(program_.rules.size());
    rule_seen_.resize(program_.rules.size());
    for (std::size_t i = 0; i < program_.rules.size(); ++i) {
        RuleShape& s = rule_shapes_[i];
        for (const auto& a : program_.rules[i].positive_body) {
            if (a.is_builtin())
                s.builtins.push_back(a);
            else
                s.binding.push_back(a);
        }
        s.var_order = sorted_vars_of(vars(program_.rules[i]));
    }
    dir_shapes_.resize(program_.directives.size());
    dir_seen_.resize(program_.directives.size());
    for (std::size_t i = 0; i < program_.directives.size(); ++i) {
        DirectiveShape& s = dir_shapes_[i];
        for (const auto& ha : program_.directives[i].positive_condition)
            if (ha.signs == SignSet::T || ha.signs == SignSet::MT) s.binding.push_back(ha.atom);
        s.builtins = program_.directives[i].guards;
        s.var_order = sorted_vars_of(vars(program_.directives[i]));
    }
}

void Grounder::index_add(AtomId id) {
    const Atom& a = store_.program_atom(id);
    pred_index_[{a.predicate, a.args.size()}].push_back(id);
}

const std::vector<int>& Grounder::deriving_records(AtomId head) const {
    auto it = head_index_.find(head);
    return it == head_index_.end() ? empty_head_index_ : it->second;
}

// Joins the remaining binding literals against working memory. Builtins are
// evaluated greedily as soon as they are decidable.
void Grounder::join(const std::vector<Atom>& binding, const std::vector<Atom>& builtins,
                    std::vector<bool>& used, Substitution& sigma,
                    const std::function<void(const Substitution&)>& emit) {
    // Builtins first: they only prune or bind.
    for (std::size_t i = 0; i < builtins.size(); ++i) {
        if (used[binding.size() + i]) continue;
        Substitution extended = sigma;
        auto res = eval_builtin(builtins[i], extended);
        if (!res.has_value()) continue; // not decidable yet
        if (!*res) return;              // instance fails the builtin
        used[binding.size() + i] = true;
        join(binding, builtins, used, extended, emit);
        used[binding.size() + i] = false;
        return;
    }
    // Next unused binding literal whose arithmetic arguments are evaluable.
    int pick = -1;
    for (std::size_t i = 0; i < binding.size(); ++i) {
        if (used[i]) continue;
        if (atom_ready(binding[i], sigma)) {
            pick = static_cast<int>(i);
            break;
        }
    }
    if (pick < 0) {
        bool all_done = true;
        for (std::size_t i = 0; i < binding.size(); ++i)
            if (!used[i]) all_done = false;
        for (std::size_t i = 0; i < builtins.size(); ++i)
            if (!used[binding.size() + i]) all_done = false;
        if (all_done) {
            emit(sigma);
            return;
        }
        throw GroundError("ungroundable literal (arithmetic over unbound variables)");
    }
    used[pick] = true;
    const Atom& pat = binding[pick];
    Atom inst = apply(pat, sigma);
    if (inst.is_ground()) {
        auto id = store_.find(inst);
        if (id && in_wm(*id)) join(binding, builtins, used, sigma, emit);
    } else {
        auto it = pred_index_.find({pat.predicate, pat.args.size()});
        if (it != pred_index_.end()) {
            // Index may grow while iterating; snapshot the current size.
            std::size_t n = it->second.size();
            for (std::size_t k = 0; k < n; ++k) {
                AtomId cand = it->second[k];
                Substitution extended = sigma;
                if (match_atom(pat, store_.program_atom(cand), extended))
                    join(binding, builtins, used, extended, emit);
            }
        }
    }
    used[pick] = false;
}

void Grounder::instantiate_rule(int rule_index, const Substitution& sigma, GroundBatch& out) {
    const Rule& r = program_.rules[rule_index];
    const RuleShape& shape = rule_shapes_[rule_index];

    std::vector<Term> key;
    key.reserve(shape.var_order.size());
    for (const auto& v : shape.var_order) {
        auto it = sigma.find(v);
        if (it == sigma.end()) throw GroundError("incomplete substitution for rule");
        key.push_back(it->second);
    }
    if (!rule_seen_[rule_index].insert(key).second) return;

    GroundRuleRecord rec;
    rec.id = static_cast<int>(rule_records_.size());
    rec.rule_index = rule_index;
    if (r.head) rec.head = store_.intern(apply_ground(*r.head, sigma));
    for (const auto& a : r.positive_body) {
        if (a.is_builtin()) continue;
        rec.positive_body.push_back(store_.intern(apply_ground(a, sigma)));
    }
    for (const auto& a : r.negative_body)
        rec.negative_body.push_back(store_.intern(apply_ground(a, sigma)));

    if (rec.is_constraint_record() && rec.positive_body.empty() && rec.negative_body.empty()) {
        out.empty_constraint = true;
        return;
    }
    bool fact = rec.head && rec.positive_body.empty() && rec.negative_body.empty();
    if (rec.head && !fact) rec.beta = store_.make_internal(AtomStore::Kind::Beta, rec.id);
    if (!rec.negative_body.empty()) {
        rec.choice_on = store_.make_internal(AtomStore::Kind::ChoiceOn, rec.id);
        rec.choice_off = store_.make_internal(AtomStore::Kind::ChoiceOff, rec.id);
    }
    rule_records_.push_back(rec);
    if (rec.head) head_index_[*rec.head].push_back(rec.id);
    out.new_rule_records.push_back(rec.id);
    for (auto& ng : rule_to_nogoods(rule_records_.back())) out.nogoods.push_back(std::move(ng));
}

void Grounder::instantiate_directive(int dir_index, const Substitution& sigma, GroundBatch& out) {
    const HeuristicDirective& d = program_.directives[dir_index];
    const DirectiveShape& shape = dir_shapes_[dir_index];

    std::vector<Term> key;
    for (const auto& v : shape.var_order) {
        auto it = sigma.find(v);
        if (it == sigma.end()) throw GroundError("incomplete substitution for directive");
        key.push_back(it->second);
    }
    if (!dir_seen_[dir_index].insert(key).second) return;

    HeuristicRecord rec;
    rec.id = static_cast<int>(heu_records_.size());
    rec.directive_index = dir_index;
    rec.head_atom = store_.intern(apply_ground(d.head.atom, sigma));
    rec.head_sign_true = d.head.signs == SignSet::T;
    for (const auto& ha : d.positive_condition) {
        AtomId a = store_.intern(apply_ground(ha.atom, sigma));
        if (ha.signs == SignSet::T)
            rec.pos_t.push_back(a);
        else if (ha.signs == SignSet::MT)
            rec.pos_mt.push_back(a);
        else if (ha.signs == SignSet::F)
            rec.pos_f.push_back(a);
        else
            throw GroundError("non-canonical sign set in directive");
    }
    for (const auto& ha : d.negative_condition) {
        AtomId a = store_.intern(apply_ground(ha.atom, sigma));
        if (ha.signs == SignSet::T)
            rec.neg_t.push_back(a);
        else if (ha.signs == SignSet::MT)
            rec.neg_mt.push_back(a);
        else if (ha.signs == SignSet::F)
            rec.neg_f.push_back(a);
        else
            throw GroundError("non-canonical sign set in directive");
    }
    Term w = apply(d.weight, sigma);
    Term l = apply(d.level, sigma);
    try {
        rec.weight = eval_int(w);
        rec.level = eval_int(l);
    } catch (const EvalError& e) {
        throw GroundError("heuristic annotation does not evaluate to an integer: " +
                          std::string(e.what()));
    }
    for (const auto& v : vars(d)) {
        auto it = sigma.find(v);
        if (it != sigma.end()) rec.substitution[v] = it->second;
    }
    rec.heu_on_t = store_.make_internal(AtomStore::Kind::HeuOnT, rec.id);
    rec.heu_on_mt = store_.make_internal(AtomStore::Kind::HeuOnMT, rec.id);
    rec.heu_on_f = store_.make_internal(AtomStore::Kind::HeuOnF, rec.id);
    rec.heu_off_t = store_.make_internal(AtomStore::Kind::HeuOffT, rec.id);
    rec.heu_off_mt = store_.make_internal(AtomStore::Kind::HeuOffMT, rec.id);
    rec.heu_off_f = store_.make_internal(AtomStore::Kind::HeuOffF, rec.id);
    heu_records_.push_back(rec);
    out.new_heu_records.push_back(rec.id);
    for (auto& ng : directive_to_nogoods(heu_records_.back())) out.nogoods.push_back(std::move(ng));
}

void Grounder::match_rule_against(int rule_index, AtomId delta, GroundBatch& out) {
    const RuleShape& shape = rule_shapes_[rule_index];
    const Atom& datom = store_.program_atom(delta);
    for (std::size_t pos = 0; pos < shape.binding.size(); ++pos) {
        const Atom& pat = shape.binding[pos];
        if (pat.predicate != datom.predicate || pat.args.size() != datom.args.size()) continue;
        Substitution sigma;
        if (!match_atom(pat, datom, sigma)) continue;
        std::vector<bool> used(shape.binding.size() + shape.builtins.size(), false);
        used[pos] = true;
        join(shape.binding, shape.builtins, used, sigma,
             [&](const Substitution& full) { instantiate_rule(rule_index, full, out); });
    }
}

void Grounder::match_directive_against(int dir_index, AtomId delta, GroundBatch& out) {
    const DirectiveShape& shape = dir_shapes_[dir_index];
    const Atom& datom = store_.program_atom(delta);
    for (std::size_t pos = 0; pos < shape.binding.size(); ++pos) {
        const Atom& pat = shape.binding[pos];
        if (pat.predicate != datom.predicate || pat.args.size() != datom.args.size()) continue;
        Substitution sigma;
        if (!match_atom(pat, datom, sigma)) continue;
        std::vector<bool> used(shape.binding.size() + shape.builtins.size(), false);
        used[pos] = true;
        join(shape.binding, shape.builtins, used, sigma,
             [&](const Substitution& full) { instantiate_directive(dir_index, full, out); });
    }
}

GroundBatch Grounder::ground_initial() {
    GroundBatch out;
    for (std::size_t i = 0; i < program_.rules.size(); ++i) {
        if (!rule_shapes_[i].binding.empty()) continue;
        std::vector<bool> used(rule_shapes_[i].builtins.size(), false);
        Substitution sigma;
        join({}, rule_shapes_[i].builtins, used, sigma,
             [&](const Substitution& full) { instantiate_rule(static_cast<int>(i), full, out); });
    }
    for (std::size_t i = 0; i < program_.directives.size(); ++i) {
        if (!dir_shapes_[i].binding.empty()) continue;
        std::vector<bool> used(dir_shapes_[i].builtins.size(), false);
        Substitution sigma;
        join({}, dir_shapes_[i].builtins, used, sigma, [&](const Substitution& full) {
            instantiate_directive(static_cast<int>(i), full, out);
        });
    }
    return out;
}

GroundBatch Grounder::ground_step(const std::vector<AtomId>& newly_true) {
    GroundBatch out;
    std::vector<AtomId> fresh;
    for (AtomId a : newly_true) {
        if (store_.is_internal(a) || in_wm(a)) continue;
        wm_.insert(a);
        index_add(a);
        fresh.push_back(a);
    }
    for (AtomId delta : fresh) {
        for (std::size_t i = 0; i < program_.rules.size(); ++i)
            match_rule_against(static_cast<int>(i), delta, out);
        for (std::size_t i = 0; i < program_.directives.size(); ++i)
            match_directive_against(static_cast<int>(i), delta, out);
    }
    return out;
}

} // namespace heurasp::ground
