#include "heurasp/solver.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace heurasp::solve {

using ground::GroundBatch;
using ground::GroundRuleRecord;
using ground::HeuristicRecord;

Solver::Solver(const transform::CanonicalProgram& program, SolveConfig cfg,
               std::vector<ast::HeuristicDirective> original_directives)
    : program_(program), original_directives_(std::move(original_directives)), cfg_(cfg),
      engine_(store_), grounder_(program_, store_), heap_(grounder_, engine_.assignment()),
      rng_(cfg.seed.value_or(0)) {
    if (cfg_.time_limit_s) {
        deadline_ = std::chrono::steady_clock::now() +
                    std::chrono::microseconds(static_cast<long>(*cfg_.time_limit_s * 1e6));
        has_deadline_ = true;
    }
}

void Solver::trace_entry(const TrailEntry& e) {
    if (!cfg_.trace) return;
    std::ostream& os = *cfg_.trace;
    os << "trace: " << e.level << ' ';
    os << (e.sign == Truth::F ? 'F' : e.sign == Truth::M ? 'M' : 'T');
    os << ' ' << store_.name(e.atom) << ' ';
    switch (e.reason.kind) {
    case ReasonKind::Decision: os << "decision"; break;
    case ReasonKind::Forced: os << "forced"; break;
    case ReasonKind::Closure: os << "closure"; break;
    case ReasonKind::FromNogood: os << "ng" << e.reason.nogood; break;
    }
    os << '\n';
}

void Solver::update_choosable(int rid) {
    const GroundRuleRecord& r = grounder_.rule_records()[rid];
    if (!r.is_choice_point()) return;
    const Assignment& A = engine_.assignment();
    bool want = A.value(r.beta) == Truth::U && heur::rule_applicable(r, A);
    if (want)
        choosable_.insert(rid);
    else
        choosable_.erase(rid);
}

void Solver::refresh_from_trail() {
    const auto& trail = engine_.assignment().trail();
    while (refreshed_ptr_ < trail.size()) {
        const TrailEntry& e = trail[refreshed_ptr_++];
        trace_entry(e);
        switch (store_.kind(e.atom)) {
        case AtomStore::Kind::Beta:
        case AtomStore::Kind::ChoiceOn:
        case AtomStore::Kind::ChoiceOff:
            update_choosable(store_.owner(e.atom));
            break;
        default: heap_.on_atom_changed(e.atom, store_); break;
        }
    }
}

void Solver::ingest(GroundBatch&& batch) {
    if (batch.empty_constraint) program_unsat_ = true;
    result_.stats.ground_rules += static_cast<long>(batch.new_rule_records.size());
    result_.stats.ground_directives += static_cast<long>(batch.new_heu_records.size());
    for (auto& spec : batch.nogoods) {
        int id = -1;
        auto conflict = engine_.add_nogood(spec.literals, spec.head_pos, &id);
        if (id >= 0) {
            if (spec.rule_record >= 0)
                grounder_.rule_record(spec.rule_record).nogood_ids.push_back(id);
            if (spec.heu_record >= 0)
                grounder_.heu_record(spec.heu_record).nogood_ids.push_back(id);
        }
        if (conflict && !pending_conflict_) pending_conflict_ = conflict;
    }
    for (int rid : batch.new_rule_records) update_choosable(rid);
    for (int hid : batch.new_heu_records) {
        heap_.add_record(hid);
        if (cfg_.check_theorem && !original_directives_.empty()) {
            const HeuristicRecord& rec = grounder_.heu_records()[hid];
            int origin = program_.directives[rec.directive_index].origin;
            if (origin >= 0 && origin < static_cast<int>(original_directives_.size())) {
                const auto& od = original_directives_[origin];
                ast::Substitution restricted;
                for (const auto& v : ast::vars(od)) {
                    auto it = rec.substitution.find(v);
                    if (it != rec.substitution.end()) restricted[v] = it->second;
                }
                ast::HeuristicDirective gd = ast::apply(od, restricted);
                std::string key = ast::to_string(gd);
                auto& group = theorem_groups_[{origin, key}];
                group.origin = origin;
                group.ground_directive = gd;
                group.record_ids.push_back(hid);
            }
        }
    }
}

bool Solver::handle_conflict(Conflict c) {
    auto hook = [this](AtomId a) {
        switch (store_.kind(a)) {
        case AtomStore::Kind::Beta:
        case AtomStore::Kind::ChoiceOn:
        case AtomStore::Kind::ChoiceOff: update_choosable(store_.owner(a)); break;
        default: heap_.on_atom_changed(a, store_); break;
        }
    };
    for (;;) {
        std::optional<Conflict> next;
        if (!engine_.analyze_and_backjump(c, hook, next)) return false;
        refreshed_ptr_ = std::min(refreshed_ptr_, engine_.assignment().trail_size());
        fed_ptr_ = std::min(fed_ptr_, engine_.assignment().trail_size());
        if (cfg_.trace) *cfg_.trace << "trace: backjump to " << engine_.assignment().decision_level() << '\n';
        refresh_from_trail();
        if (!next) return true;
        c = *next;
    }
}

// Propagation and grounding to a combined fixpoint.
bool Solver::propagate_and_ground() {
    for (;;) {
        std::optional<Conflict> conflict = pending_conflict_;
        pending_conflict_.reset();
        if (!conflict) conflict = engine_.propagate();
        refresh_from_trail();
        if (conflict) {
            if (!handle_conflict(*conflict)) return false;
            continue;
        }
        // Feed newly must-true program atoms to the grounder.
        const auto& trail = engine_.assignment().trail();
        std::vector<AtomId> newly;
        while (fed_ptr_ < trail.size()) {
            const TrailEntry& e = trail[fed_ptr_++];
            if (e.sign == Truth::M && !store_.is_internal(e.atom)) newly.push_back(e.atom);
        }
        if (newly.empty()) return true;
        GroundBatch batch = grounder_.ground_step(newly);
        bool any = !batch.nogoods.empty() || batch.empty_constraint;
        ingest(std::move(batch));
        if (program_unsat_) return false;
        refresh_from_trail();
        if (!any && !pending_conflict_) return true;
    }
}

std::optional<Literal> Solver::forced_choice() {
    const Assignment& A = engine_.assignment();
    for (int rid : choosable_) {
        const GroundRuleRecord& r = grounder_.rule_records()[rid];
        bool forced = true;
        for (AtomId b : r.negative_body) {
            Truth v = A.value(b);
            if (v == Truth::F) continue;
            if (v != Truth::U) {
                forced = false;
                break;
            }
            for (int drid : grounder_.deriving_records(b)) {
                const GroundRuleRecord& der = grounder_.rule_records()[drid];
                if (der.beta != -1 && A.value(der.beta) != Truth::F) {
                    forced = false;
                    break;
                }
            }
            if (!forced) break;
        }
        if (forced) return lit_t(r.beta);
    }
    return std::nullopt;
}

std::optional<Literal> Solver::heuristic_choice() {
    if (!cfg_.heuristics_enabled) return std::nullopt;
    for (const auto& entry : heap_.entries()) {
        auto fired = heap_.choose_literal(entry.id);
        if (fired.kind == heur::DirectiveHeap::Fired::Kind::Fatal) {
            std::ostringstream os;
            os << "atom " << store_.name(grounder_.heu_records()[entry.id].head_atom)
               << " chosen by domain-specific heuristic is the head of more than one applicable rule:";
            for (int rid : fired.rule_ids) os << " rule_record#" << rid;
            throw FatalSolverError(os.str());
        }
        if (fired.kind == heur::DirectiveHeap::Fired::Kind::Literal) return fired.literal;
        // Skip: retry the next priority.
    }
    return std::nullopt;
}

std::optional<Literal> Solver::fallback_choice() {
    if (choosable_.empty()) return std::nullopt;
    if (!cfg_.seed) {
        int rid = *choosable_.begin();
        return lit_t(grounder_.rule_records()[rid].beta);
    }
    // Seeded permutation order over record ids.
    int best = -1;
    std::uint64_t best_rank = 0;
    for (int rid : choosable_) {
        while (fallback_rank_.size() <= static_cast<std::size_t>(rid))
            fallback_rank_.push_back(rng_());
        std::uint64_t rank = (static_cast<std::uint64_t>(fallback_rank_[rid]) << 20) |
                             static_cast<std::uint64_t>(rid);
        if (best < 0 || rank < best_rank) {
            best = rid;
            best_rank = rank;
        }
    }
    return lit_t(grounder_.rule_records()[best].beta);
}

std::set<ast::Atom> Solver::extract_answer_set() const {
    std::set<ast::Atom> out;
    const Assignment& A = engine_.assignment();
    for (AtomId id = 0; id < static_cast<AtomId>(store_.size()); ++id) {
        if (store_.is_internal(id) || A.value(id) != Truth::T) continue;
        const ast::Atom& a = store_.program_atom(id);
        if (a.predicate.size() > 5 && a.predicate.substr(a.predicate.size() - 5) == "__off")
            continue;
        out.insert(a);
    }
    return out;
}

void Solver::theorem_audit() {
    if (!cfg_.check_theorem) return;
    const Assignment& A = engine_.assignment();
    for (const auto& [key, group] : theorem_groups_) {
        bool solving = false;
        for (int hid : group.record_ids)
            if (heur::is_solving_applicable(grounder_.heu_records()[hid], A)) solving = true;
        bool reference =
            heur::reference_applicability(group.ground_directive, A, store_, grounder_.rule_records());
        ++result_.stats.theorem_checks;
        if (solving != reference) {
            ++result_.stats.theorem_mismatches;
            if (result_.theorem_mismatch_example.empty()) {
                result_.theorem_mismatch_example =
                    ast::to_string(group.ground_directive) +
                    " reference=" + (reference ? "true" : "false") +
                    " solving=" + (solving ? "true" : "false");
            }
        }
    }
}

bool Solver::closure_and_extract() {
    Assignment& A = engine_.assignment();
    A.push_level();
    if (cfg_.trace) *cfg_.trace << "trace: closure at level " << A.decision_level() << '\n';
    for (AtomId id = 0; id < static_cast<AtomId>(store_.size()); ++id)
        if (A.value(id) == Truth::U) A.assign_F(id, Reason::closure());
    auto conflict = engine_.propagate();
    refresh_from_trail();
    if (conflict) return handle_conflict(*conflict);
    // Every must-be-true atom needs a justification by now.
    for (AtomId id = 0; id < static_cast<AtomId>(store_.size()); ++id) {
        if (A.value(id) == Truth::M) {
            if (cfg_.trace)
                *cfg_.trace << "trace: closure failed, unjustified " << store_.name(id) << '\n';
            auto hook = [this](AtomId a) {
                switch (store_.kind(a)) {
                case AtomStore::Kind::Beta:
                case AtomStore::Kind::ChoiceOn:
                case AtomStore::Kind::ChoiceOff: update_choosable(store_.owner(a)); break;
                default: heap_.on_atom_changed(a, store_); break;
                }
            };
            std::optional<Conflict> next;
            if (!engine_.force_chronological(hook, next)) return false;
            refreshed_ptr_ = std::min(refreshed_ptr_, A.trail_size());
            fed_ptr_ = std::min(fed_ptr_, A.trail_size());
            refresh_from_trail();
            if (next) return handle_conflict(*next);
            return true;
        }
    }
    return true; // complete and justified: caller extracts the answer set
}

SolveResult Solver::run(const std::function<bool(const std::set<ast::Atom>&)>& on_answer) {
    result_ = SolveResult{};
    ingest(grounder_.ground_initial());
    if (program_unsat_) {
        result_.status = Status::UNSAT;
        return result_;
    }

    long found = 0;
    for (;;) {
        if (has_deadline_ && std::chrono::steady_clock::now() > deadline_) {
            result_.status = found > 0 ? Status::SAT : Status::INTERRUPTED;
            result_.stats.conflicts = engine_.conflicts;
            return result_;
        }
        if (!propagate_and_ground()) {
            result_.status = found > 0 ? Status::SAT : Status::UNSAT;
            result_.stats.conflicts = engine_.conflicts;
            return result_;
        }
        if (cfg_.paranoid) {
            std::string why;
            if (!engine_.at_fixpoint_clean(&why)) throw FatalSolverError("fixpoint check: " + why);
            if (!heap_.consistent()) throw FatalSolverError("directive heap out of sync");
        }
        theorem_audit();

        // Choice: forced firings first, then domain-specific heuristics, then
        // the deterministic fallback.
        if (auto lit = forced_choice()) {
            engine_.decide(*lit, ReasonKind::Forced);
            ++result_.stats.forced_firings;
            refresh_from_trail();
            continue;
        }
        if (auto lit = heuristic_choice()) {
            engine_.decide(*lit, ReasonKind::Decision);
            ++result_.stats.guesses;
            ++result_.stats.heuristic_decisions;
            refresh_from_trail();
            continue;
        }
        if (auto lit = fallback_choice()) {
            engine_.decide(*lit, ReasonKind::Decision);
            ++result_.stats.guesses;
            ++result_.stats.fallback_decisions;
            refresh_from_trail();
            continue;
        }

        // No choice point left: close the assignment.
        if (!closure_and_extract()) {
            result_.status = found > 0 ? Status::SAT : Status::UNSAT;
            result_.stats.conflicts = engine_.conflicts;
            return result_;
        }
        // closure_and_extract returns with either a completed assignment (its
        // closure level still open) or a post-conflict state. Distinguish by
        // checking for unassigned or must-only atoms.
        bool is_answer = true;
        for (AtomId id = 0; id < static_cast<AtomId>(store_.size()) && is_answer; ++id) {
            Truth v = engine_.assignment().value(id);
            if (v == Truth::U || v == Truth::M) is_answer = false;
        }
        if (!is_answer) continue;

        auto answer = extract_answer_set();
        ++found;
        result_.answer_sets.push_back(answer);
        bool keep_going = true;
        if (on_answer) keep_going = on_answer(answer);
        if (!keep_going || (cfg_.max_answer_sets > 0 && found >= cfg_.max_answer_sets)) {
            result_.status = Status::SAT;
            result_.stats.conflicts = engine_.conflicts;
            return result_;
        }
        // Block this answer's branch prefix and continue enumerating.
        std::vector<Literal> blocking;
        for (const auto& b : engine_.branches()) blocking.push_back(b.literal);
        if (blocking.empty()) {
            result_.status = Status::SAT;
            result_.stats.conflicts = engine_.conflicts;
            return result_;
        }
        int id = -1;
        auto conflict = engine_.add_nogood(blocking, -1, &id, /*dedup=*/true);
        if (!conflict) {
            // The blocking nogood must be violated here; if not, fail loudly.
            throw FatalSolverError("enumeration blocking nogood did not conflict");
        }
        if (!handle_conflict(*conflict)) {
            result_.status = Status::SAT;
            result_.stats.conflicts = engine_.conflicts;
            return result_;
        }
    }
}

} // namespace heurasp::solve
