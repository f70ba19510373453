#include "heurasp/heuristics.hpp"

#include <algorithm>

namespace heurasp::heur {

using solve::in_M;
using solve::Polarity;

bool is_solving_satisfied(const HeuristicRecord& h, const Assignment& A) {
    return A.value(h.heu_on_t) == Truth::T && in_M(A.value(h.heu_on_mt)) &&
           A.value(h.heu_on_f) == Truth::T && A.value(h.heu_off_t) != Truth::T &&
           !in_M(A.value(h.heu_off_mt)) && A.value(h.heu_off_f) != Truth::T;
}

bool is_solving_applicable(const HeuristicRecord& h, const Assignment& A) {
    if (!is_solving_satisfied(h, A)) return false;
    Truth head = A.value(h.head_atom);
    return head == Truth::U || head == Truth::M;
}

bool rule_applicable(const GroundRuleRecord& r, const Assignment& A) {
    if (r.is_choice_point())
        return A.value(r.choice_on) == Truth::T && !in_M(A.value(r.choice_off));
    for (AtomId a : r.positive_body)
        if (A.value(a) != Truth::T) return false;
    return true;
}

namespace {

bool truth_in_signs(Truth v, const ast::SignSet& s) {
    switch (v) {
    case Truth::T: return s.has_t();
    case Truth::M: return s.has_m();
    case Truth::F: return s.has_f();
    case Truth::U: return false;
    }
    return false;
}

Truth atom_truth(const ast::Atom& a, const Assignment& A, const solve::AtomStore& store) {
    auto id = store.find(a);
    return id ? A.value(*id) : Truth::U;
}

} // namespace

bool reference_satisfied(const ast::HeuristicDirective& d, const Assignment& A,
                         const solve::AtomStore& store) {
    for (const auto& ha : d.positive_condition)
        if (!truth_in_signs(atom_truth(ha.atom, A, store), ha.signs)) return false;
    for (const auto& ha : d.negative_condition)
        if (truth_in_signs(atom_truth(ha.atom, A, store), ha.signs)) return false;
    return true;
}

bool reference_applicability(const ast::HeuristicDirective& d, const Assignment& A,
                             const solve::AtomStore& store,
                             const std::vector<GroundRuleRecord>& rules) {
    if (!reference_satisfied(d, A, store)) return false;
    Truth head = atom_truth(d.head.atom, A, store);
    if (head != Truth::U && head != Truth::M) return false;
    auto head_id = store.find(d.head.atom);
    if (!head_id) return false;
    for (const auto& r : rules) {
        if (!r.head || *r.head != *head_id) continue;
        bool applicable = true;
        for (AtomId a : r.positive_body)
            if (A.value(a) != Truth::T) applicable = false;
        for (AtomId a : r.negative_body)
            if (in_M(A.value(a))) applicable = false;
        if (applicable) return true;
    }
    return false;
}

void DirectiveHeap::add_record(int heu_id) {
    if (static_cast<std::size_t>(heu_id) >= in_heap_.size()) in_heap_.resize(heu_id + 1, 0);
    const HeuristicRecord& h = grounder_.heu_records()[heu_id];
    head_watch_[h.head_atom].push_back(heu_id);
    refresh(heu_id);
}

void DirectiveHeap::refresh(int heu_id) {
    const HeuristicRecord& h = grounder_.heu_records()[heu_id];
    bool want = is_solving_applicable(h, A_);
    bool have = in_heap_[heu_id];
    if (want == have) return;
    Key k{h.level, h.weight, heu_id};
    if (want)
        heap_.insert(k);
    else
        heap_.erase(k);
    in_heap_[heu_id] = want ? 1 : 0;
}

void DirectiveHeap::on_atom_changed(AtomId a, const solve::AtomStore& store) {
    switch (store.kind(a)) {
    case solve::AtomStore::Kind::HeuOnT:
    case solve::AtomStore::Kind::HeuOnMT:
    case solve::AtomStore::Kind::HeuOnF:
    case solve::AtomStore::Kind::HeuOffT:
    case solve::AtomStore::Kind::HeuOffMT:
    case solve::AtomStore::Kind::HeuOffF:
        refresh(store.owner(a));
        return;
    case solve::AtomStore::Kind::Program: {
        auto it = head_watch_.find(a);
        if (it != head_watch_.end())
            for (int id : it->second) refresh(id);
        return;
    }
    default: return; // Beta/ChoiceOn/ChoiceOff do not affect heap membership
    }
}

int DirectiveHeap::select_directive() const {
    if (heap_.empty()) return -1;
    return heap_.begin()->id;
}

DirectiveHeap::Fired DirectiveHeap::choose_literal(int heu_id) const {
    const HeuristicRecord& h = grounder_.heu_records()[heu_id];
    std::vector<int> applicable;
    for (int rid : grounder_.deriving_records(h.head_atom)) {
        const GroundRuleRecord& r = grounder_.rule_records()[rid];
        if (r.is_fact_record()) continue;
        if (rule_applicable(r, A_)) applicable.push_back(rid);
    }
    if (applicable.size() > 1) return {Fired::Kind::Fatal, {}, applicable};
    if (applicable.empty()) return {Fired::Kind::Skip, {}, {}};

    if (h.head_sign_true) {
        const GroundRuleRecord& r = grounder_.rule_records()[applicable[0]];
        if (r.beta == -1 || A_.value(r.beta) != Truth::U) return {Fired::Kind::Skip, {}, {}};
        return {Fired::Kind::Literal, solve::lit_t(r.beta), {}};
    }
    // F-signed head: the head atom itself is made false, which sets the
    // deriving rule to not fire through the head-support nogood. A head that
    // is already must-be-true cannot be made false.
    if (A_.value(h.head_atom) != Truth::U) return {Fired::Kind::Skip, {}, {}};
    return {Fired::Kind::Literal, solve::lit_f(h.head_atom), {}};
}

bool DirectiveHeap::consistent() const {
    const auto& records = grounder_.heu_records();
    for (std::size_t i = 0; i < records.size(); ++i) {
        bool want = is_solving_applicable(records[i], A_);
        bool have = i < in_heap_.size() && in_heap_[i];
        if (want != have) return false;
    }
    return true;
}

} // namespace heurasp::heur
