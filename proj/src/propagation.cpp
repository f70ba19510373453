#include "heurasp/propagation.hpp"

#include <algorithm>

namespace heurasp::solve {

namespace {

bool lit_sat(const Literal& l, const Assignment& A) {
    return l.pol == Polarity::T ? A.is_must(l.atom) : A.is_false(l.atom);
}

bool lit_strict_sat(const Literal& l, const Assignment& A) {
    return l.pol == Polarity::T ? A.is_true(l.atom) : A.is_false(l.atom);
}

std::size_t hash_literals(std::vector<Literal> lits) {
    std::sort(lits.begin(), lits.end());
    std::size_t h = 1469598103934665603ull;
    for (const auto& l : lits) {
        h ^= static_cast<std::size_t>(l.atom) * 2 + (l.pol == Polarity::T ? 1 : 0);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

Classification classify(const Nogood& g, const Assignment& A) {
    int unsat_count = 0;
    int unsat_idx = -1;
    for (std::size_t i = 0; i < g.literals.size(); ++i) {
        if (!lit_sat(g.literals[i], A)) {
            ++unsat_count;
            unsat_idx = static_cast<int>(i);
            if (unsat_count > 1) return {};
        }
    }
    if (unsat_count == 0) return {Classification::Kind::Violated, -1};

    const Literal& l = g.literals[unsat_idx];
    Truth v = A.value(l.atom);
    if (l.pol == Polarity::T) {
        if (v == Truth::U) return {Classification::Kind::FUnit, unsat_idx};
        return {}; // blocked by F
    }
    // l.pol == F
    if (v == Truth::T) return {};
    bool head_here = g.head == unsat_idx;
    if (head_here && (v == Truth::U || v == Truth::M)) {
        bool strict = true;
        for (std::size_t j = 0; j < g.literals.size(); ++j) {
            if (static_cast<int>(j) == unsat_idx) continue;
            if (!lit_strict_sat(g.literals[j], A)) {
                strict = false;
                break;
            }
        }
        if (strict) return {Classification::Kind::TUnit, unsat_idx};
    }
    if (v == Truth::U) return {Classification::Kind::MUnit, unsat_idx};
    return {}; // M without T-unit strictness: blocked for violation
}

std::vector<std::pair<Truth, AtomId>> prop(const Nogood& g, const Assignment& A) {
    Classification c = classify(g, A);
    switch (c.kind) {
    case Classification::Kind::FUnit: return {{Truth::F, g.literals[c.literal].atom}};
    case Classification::Kind::MUnit: return {{Truth::M, g.literals[c.literal].atom}};
    case Classification::Kind::TUnit: {
        AtomId b = g.literals[c.literal].atom;
        if (A.value(b) == Truth::M) return {{Truth::T, b}};
        return {{Truth::M, b}, {Truth::T, b}};
    }
    default: return {};
    }
}

void Engine::watch(int ng_id, int pos) {
    const Literal& l = nogoods_[ng_id].literals[pos];
    watchers(l).push_back(ng_id);
}

void Engine::unwatch(int ng_id, int pos) {
    const Literal& l = nogoods_[ng_id].literals[pos];
    auto& list = watchers(l);
    auto it = std::find(list.begin(), list.end(), ng_id);
    if (it != list.end()) {
        *it = list.back();
        list.pop_back();
    }
}

std::optional<Conflict> Engine::fire_initial(int ng_id) {
    const Nogood& g = nogoods_[ng_id];
    Classification c = classify(g, A_);
    switch (c.kind) {
    case Classification::Kind::Violated: return Conflict{ng_id};
    case Classification::Kind::FUnit:
        A_.assign_F(g.literals[c.literal].atom, Reason::nogood_id(ng_id));
        break;
    case Classification::Kind::MUnit:
        A_.assign_M(g.literals[c.literal].atom, Reason::nogood_id(ng_id));
        break;
    case Classification::Kind::TUnit: {
        AtomId b = g.literals[c.literal].atom;
        if (A_.value(b) == Truth::M)
            A_.upgrade_T(b, Reason::nogood_id(ng_id));
        else
            A_.assign_MT(b, Reason::nogood_id(ng_id));
        break;
    }
    case Classification::Kind::None: return std::nullopt;
    }
    // Fired outside the event stream; remember for re-examination after
    // backjumps, since no watch event will reproduce this propagation.
    if (static_cast<std::size_t>(ng_id) >= in_replay_.size()) in_replay_.resize(ng_id + 1, 0);
    if (!in_replay_[ng_id]) {
        in_replay_[ng_id] = 1;
        replay_.push_back(ng_id);
    }
    return std::nullopt;
}

std::optional<Conflict> Engine::add_nogood(std::vector<Literal> lits, int head_pos, int* id_out,
                                           bool dedup) {
    if (id_out) *id_out = -1;
    Nogood ng;
    if (!build_nogood(std::move(lits), head_pos, ng)) return std::nullopt; // tautology
    if (ng.literals.empty()) return std::nullopt;

    if (dedup) {
        std::size_t h = hash_literals(ng.literals);
        auto sorted_eq = [&](int existing_id) {
            auto a = nogoods_[existing_id].literals;
            auto b = ng.literals;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            return a == b;
        };
        auto& bucket = dedup_index_[h];
        for (int existing : bucket) {
            if (nogoods_[existing].head == ng.head && sorted_eq(existing)) {
                if (id_out) *id_out = existing;
                return fire_initial(existing);
            }
        }
        bucket.push_back(static_cast<int>(nogoods_.size()));
    }

    int id = static_cast<int>(nogoods_.size());
    for (const auto& l : ng.literals) ensure_atom(l.atom);
    nogoods_.push_back(std::move(ng));
    const Nogood& g = nogoods_[id];
    if (id_out) *id_out = id;

    // Watch two non-satisfied literals when possible; otherwise the latest
    // satisfied ones (the nogood is unit or violated right now).
    int w1 = -1, w2 = -1;
    for (std::size_t i = 0; i < g.literals.size() && w2 < 0; ++i) {
        if (!lit_sat(g.literals[i], A_)) {
            if (w1 < 0)
                w1 = static_cast<int>(i);
            else
                w2 = static_cast<int>(i);
        }
    }
    auto latest_sat = [&](int skip) {
        int best = -1, best_pos = -1;
        for (std::size_t i = 0; i < g.literals.size(); ++i) {
            if (static_cast<int>(i) == skip) continue;
            const Literal& l = g.literals[i];
            if (!lit_sat(l, A_)) continue;
            int pos = A_.primary_pos(l.atom);
            if (pos >= best_pos) {
                best_pos = pos;
                best = static_cast<int>(i);
            }
        }
        return best;
    };
    if (w1 < 0) w1 = latest_sat(-1);
    if (w2 < 0) w2 = latest_sat(w1);
    if (w2 < 0) w2 = w1; // single-literal nogood
    watchpos_.push_back({w1, w2});
    watch(id, w1);
    if (w2 != w1) watch(id, w2);

    if (g.has_head()) {
        for (std::size_t i = 0; i < g.literals.size(); ++i) {
            if (static_cast<int>(i) == g.head) continue;
            strict_of_[g.literals[i].atom].push_back(id);
        }
    }
    return fire_initial(id);
}

std::optional<Conflict> Engine::on_watch_event(int ng_id, Literal satisfied_lit) {
    const Nogood& g = nogoods_[ng_id];
    auto& wp = watchpos_[ng_id];
    int w = -1;
    if (g.literals[wp[0]] == satisfied_lit)
        w = 0;
    else if (g.literals[wp[1]] == satisfied_lit)
        w = 1;
    if (w < 0) return std::nullopt; // stale list entry; nothing to do
    int other = wp[1 - w];

    // Try to move this watch to a non-satisfied literal.
    for (std::size_t i = 0; i < g.literals.size(); ++i) {
        int pos = static_cast<int>(i);
        if (pos == wp[0] || pos == wp[1]) continue;
        if (!lit_sat(g.literals[i], A_)) {
            unwatch(ng_id, wp[w]);
            wp[w] = pos;
            watch(ng_id, pos);
            return std::nullopt;
        }
    }

    const Literal& lo = g.literals[other];
    if (lit_sat(lo, A_)) return Conflict{ng_id}; // every literal satisfied
    Truth v = A_.value(lo.atom);
    if (v == Truth::U) {
        if (lo.pol == Polarity::T) {
            A_.assign_F(lo.atom, Reason::nogood_id(ng_id));
        } else {
            bool t_unit = g.head == other;
            if (t_unit) {
                for (std::size_t j = 0; j < g.literals.size() && t_unit; ++j)
                    if (static_cast<int>(j) != other && !lit_strict_sat(g.literals[j], A_))
                        t_unit = false;
            }
            if (t_unit)
                A_.assign_MT(lo.atom, Reason::nogood_id(ng_id));
            else
                A_.assign_M(lo.atom, Reason::nogood_id(ng_id));
        }
    }
    // Otherwise blocked (F against a T literal, or M/T against the head):
    // violation is impossible on this branch; T-upgrades are handled by the
    // strict index.
    return std::nullopt;
}

std::optional<Conflict> Engine::try_strict(int ng_id) {
    const Nogood& g = nogoods_[ng_id];
    if (!g.has_head()) return std::nullopt;
    AtomId b = g.head_literal().atom;
    Truth v = A_.value(b);
    if (v == Truth::T || v == Truth::F) return std::nullopt;
    for (std::size_t j = 0; j < g.literals.size(); ++j)
        if (static_cast<int>(j) != g.head && !lit_strict_sat(g.literals[j], A_))
            return std::nullopt;
    if (v == Truth::M)
        A_.upgrade_T(b, Reason::nogood_id(ng_id));
    else
        A_.assign_MT(b, Reason::nogood_id(ng_id));
    return std::nullopt;
}

std::optional<Conflict> Engine::propagate() {
    const auto& trail = A_.trail();
    while (trail_ptr_ < trail.size()) {
        TrailEntry e = trail[trail_ptr_++];
        if (e.sign == Truth::F || e.sign == Truth::M) {
            Literal sat = e.sign == Truth::F ? lit_f(e.atom) : lit_t(e.atom);
            auto& list = e.sign == Truth::F ? watch_F_[e.atom] : watch_T_[e.atom];
            for (std::size_t i = 0; i < list.size();) {
                int ng_id = list[i];
                std::size_t before = list.size();
                auto conflict = on_watch_event(ng_id, sat);
                if (conflict) return conflict;
                // on_watch_event may have swap-removed list[i]
                if (list.size() == before) ++i;
            }
        }
        if (e.sign == Truth::F || e.sign == Truth::T) {
            for (int ng_id : strict_of_[e.atom]) {
                auto conflict = try_strict(ng_id);
                if (conflict) return conflict;
            }
        }
    }
    return std::nullopt;
}

void Engine::decide(Literal l, ReasonKind kind) {
    assert(kind == ReasonKind::Decision || kind == ReasonKind::Forced);
    assert(A_.value(l.atom) == Truth::U);
    ensure_atom(l.atom);
    A_.push_level();
    branches_.push_back({l, A_.decision_level(), kind});
    Reason r{kind, -1};
    if (l.pol == Polarity::T)
        A_.assign_MT(l.atom, r);
    else
        A_.assign_F(l.atom, r);
}

std::optional<Conflict> Engine::backjump(int level, const std::function<void(AtomId)>& hook) {
    A_.backjump(level, hook);
    while (!branches_.empty() && branches_.back().level > level) branches_.pop_back();
    trail_ptr_ = std::min(trail_ptr_, A_.trail_size());
    // Re-fire nogoods that propagated outside the event stream.
    bool fired = true;
    while (fired) {
        fired = false;
        for (int id : replay_) {
            std::size_t before = A_.trail_size();
            auto conflict = fire_initial(id);
            if (conflict) return conflict;
            if (A_.trail_size() != before) fired = true;
        }
    }
    return std::nullopt;
}

bool Engine::analyze_and_backjump(const Conflict& c, const std::function<void(AtomId)>& hook,
                                  std::optional<Conflict>& next_conflict) {
    ++conflicts;
    next_conflict.reset();

    auto support_level = [&](const Literal& l) { return A_.primary_level(l.atom); };
    auto support_pos = [&](const Literal& l) { return A_.primary_pos(l.atom); };

    std::vector<Literal> C = nogoods_[c.nogood].literals;

    auto conflict_level = [&]() {
        int lv = 0;
        for (const auto& l : C) lv = std::max(lv, support_level(l));
        return lv;
    };

    int clevel = conflict_level();
    if (clevel == 0) return false;

    bool chrono = false;
    for (;;) {
        int count = 0;
        int latest = -1;
        for (std::size_t i = 0; i < C.size(); ++i) {
            if (support_level(C[i]) == clevel) {
                ++count;
                if (latest < 0 || support_pos(C[i]) > support_pos(C[latest]))
                    latest = static_cast<int>(i);
            }
        }
        if (count <= 1) break;

        const Literal l = C[latest];
        Reason r = A_.primary_reason(l.atom);
        if (r.kind != ReasonKind::FromNogood) {
            chrono = true;
            break;
        }
        // Resolving an M-entry whose T-upgrade lives on another level is the
        // documented chronological-fallback condition.
        if (l.pol == Polarity::T && A_.value(l.atom) == Truth::T &&
            A_.t_level(l.atom) != A_.primary_level(l.atom)) {
            chrono = true;
            break;
        }
        C.erase(C.begin() + latest);
        for (const auto& rl : nogoods_[r.nogood].literals) {
            if (rl.atom == l.atom) continue;
            if (std::find(C.begin(), C.end(), rl) == C.end()) C.push_back(rl);
        }
    }

    if (!chrono) {
        // Asserting first-UIP nogood.
        int uip = -1;
        int assert_level = 0;
        for (std::size_t i = 0; i < C.size(); ++i) {
            if (support_level(C[i]) == clevel)
                uip = static_cast<int>(i);
            else
                assert_level = std::max(assert_level, support_level(C[i]));
        }
        (void)uip;
        ++learned_count;
        if (auto conflict = backjump(assert_level, hook)) {
            next_conflict = conflict;
            return true;
        }
        if (auto conflict = add_nogood(C, -1, nullptr, /*dedup=*/true)) {
            next_conflict = conflict;
            return true;
        }
        return true;
    }

    return chronological(hook, next_conflict);
}

bool Engine::force_chronological(const std::function<void(AtomId)>& hook,
                                 std::optional<Conflict>& next_conflict) {
    ++conflicts;
    next_conflict.reset();
    return chronological(hook, next_conflict);
}

// Negates the current branch prefix and flips the last branch literal.
bool Engine::chronological(const std::function<void(AtomId)>& hook,
                           std::optional<Conflict>& next_conflict) {
    if (branches_.empty()) return false;
    std::vector<Literal> D;
    D.reserve(branches_.size());
    for (const auto& b : branches_) D.push_back(b.literal);
    int target = branches_.back().level - 1;
    ++learned_count;
    if (auto conflict = backjump(target, hook)) {
        next_conflict = conflict;
        return true;
    }
    if (auto conflict = add_nogood(D, -1, nullptr, /*dedup=*/true)) {
        next_conflict = conflict;
        return true;
    }
    return true;
}

bool Engine::at_fixpoint_clean(std::string* why) const {
    for (std::size_t i = 0; i < nogoods_.size(); ++i) {
        Classification c = classify(nogoods_[i], A_);
        if (c.kind != Classification::Kind::None) {
            if (why)
                *why = "nogood " + std::to_string(i) + " " + to_string(nogoods_[i], store_) +
                       " not at fixpoint (kind " + std::to_string(static_cast<int>(c.kind)) + ")";
            return false;
        }
    }
    return true;
}

} // namespace heurasp::solve
