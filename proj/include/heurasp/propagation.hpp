#ifndef HEURASP_PROPAGATION_HPP
#define HEURASP_PROPAGATION_HPP

#include <array>
#include <cassert>
#include <functional>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "heurasp/nogood.hpp"

namespace heurasp::solve {

enum class Truth : std::uint8_t { U, F, M, T };

inline bool in_M(Truth v) { return v == Truth::M || v == Truth::T; }

enum class ReasonKind : std::uint8_t { Decision, Forced, Closure, FromNogood };

struct Reason {
    ReasonKind kind = ReasonKind::Decision;
    int nogood = -1;

    static Reason decision() { return Reason{ReasonKind::Decision, -1}; }
    static Reason forced() { return Reason{ReasonKind::Forced, -1}; }
    static Reason closure() { return Reason{ReasonKind::Closure, -1}; }
    static Reason nogood_id(int id) { return Reason{ReasonKind::FromNogood, id}; }
};

// A trail entry carries one signed assignment step. A fresh true assignment
// pushes an M entry followed by a T entry; upgrading must-be-true pushes a
// single T entry.
struct TrailEntry {
    AtomId atom;
    Truth sign; // F, M or T
    int level;
    Reason reason;
};

// Three-valued assignment with trail. Consistency invariant: an atom is never
// both F and M/T; T implies M. The M entry and T entry of one atom may carry
// different decision levels.
class Assignment {
public:
    void ensure(AtomId max_id) {
        if (static_cast<std::size_t>(max_id) >= state_.size())
            state_.resize(max_id + 1);
    }

    Truth value(AtomId a) const {
        return static_cast<std::size_t>(a) < state_.size() ? state_[a].value : Truth::U;
    }
    bool is_true(AtomId a) const { return value(a) == Truth::T; }
    bool is_must(AtomId a) const { return in_M(value(a)); }
    bool is_false(AtomId a) const { return value(a) == Truth::F; }

    int primary_level(AtomId a) const { return state_[a].primary_level; } // F or M entry
    int t_level(AtomId a) const { return state_[a].t_level; }
    int primary_pos(AtomId a) const { return state_[a].primary_pos; }
    Reason primary_reason(AtomId a) const { return state_[a].primary_reason; }
    Reason t_reason(AtomId a) const { return state_[a].t_reason; }

    int decision_level() const { return static_cast<int>(level_start_.size()); }
    void push_level() { level_start_.push_back(trail_.size()); }

    const std::vector<TrailEntry>& trail() const { return trail_; }

    void assign_F(AtomId a, Reason r) {
        ensure(a);
        assert(state_[a].value == Truth::U);
        state_[a].value = Truth::F;
        state_[a].primary_level = decision_level();
        state_[a].primary_pos = static_cast<int>(trail_.size());
        state_[a].primary_reason = r;
        trail_.push_back({a, Truth::F, decision_level(), r});
    }

    void assign_M(AtomId a, Reason r) {
        ensure(a);
        assert(state_[a].value == Truth::U);
        state_[a].value = Truth::M;
        state_[a].primary_level = decision_level();
        state_[a].primary_pos = static_cast<int>(trail_.size());
        state_[a].primary_reason = r;
        trail_.push_back({a, Truth::M, decision_level(), r});
    }

    // Fresh U -> T: one M entry and one T entry, same reason.
    void assign_MT(AtomId a, Reason r) {
        assign_M(a, r);
        upgrade_T(a, r);
    }

    void upgrade_T(AtomId a, Reason r) {
        ensure(a);
        assert(state_[a].value == Truth::M);
        state_[a].value = Truth::T;
        state_[a].t_level = decision_level();
        state_[a].t_pos = static_cast<int>(trail_.size());
        state_[a].t_reason = r;
        trail_.push_back({a, Truth::T, decision_level(), r});
    }

    // Removes every entry of levels above `level`. Calls unassign_hook(atom)
    // for each atom whose visible value changed.
    void backjump(int level, const std::function<void(AtomId)>& unassign_hook) {
        assert(level <= decision_level());
        std::size_t cut = level_start_.empty() || level >= decision_level()
                              ? trail_.size()
                              : level_start_[level];
        while (trail_.size() > cut) {
            TrailEntry e = trail_.back();
            trail_.pop_back();
            VarState& s = state_[e.atom];
            if (e.sign == Truth::T) {
                s.value = Truth::M;
                s.t_level = -1;
                s.t_pos = -1;
            } else {
                s.value = Truth::U;
                s.primary_level = -1;
                s.primary_pos = -1;
            }
            if (unassign_hook) unassign_hook(e.atom);
        }
        level_start_.resize(level);
    }

    std::size_t trail_size() const { return trail_.size(); }

private:
    struct VarState {
        Truth value = Truth::U;
        int primary_level = -1;
        int primary_pos = -1;
        int t_level = -1;
        int t_pos = -1;
        Reason primary_reason;
        Reason t_reason;
    };
    std::vector<VarState> state_;
    std::vector<TrailEntry> trail_;
    std::vector<std::size_t> level_start_; // level_start_[k] = first trail index of level k+1
};

// Classification of a nogood against an assignment, following the paper's
// three unit definitions. A (T,c) literal is satisfied by M or T; an (F,c)
// literal by F.
struct Classification {
    enum class Kind { None, FUnit, MUnit, TUnit, Violated } kind = Kind::None;
    int literal = -1; // index of the unit literal
};

Classification classify(const Nogood& g, const Assignment& A);

// prop(g, A): the truth values unit propagation would assign.
// {F b} on F-unit; {M b} on M-unit but not T-unit; {M b, T b} on T-unit.
std::vector<std::pair<Truth, AtomId>> prop(const Nogood& g, const Assignment& A);

struct Conflict {
    int nogood = -1;
};

// Nogood store with two-watched-literal indexing plus a strict index that
// re-examines head-bearing nogoods for T-unit upgrades when atoms reach
// strict truth values.
class Engine {
public:
    explicit Engine(AtomStore& store) : store_(store) {}

    Assignment& assignment() { return A_; }
    const Assignment& assignment() const { return A_; }
    AtomStore& store() { return store_; }

    int nogood_count() const { return static_cast<int>(nogoods_.size()); }
    const Nogood& nogood(int id) const { return nogoods_[id]; }

    // Adds a nogood and immediately applies any propagation it implies under
    // the current assignment. Returns a conflict when it is violated.
    // Tautological nogoods are skipped (returns nullopt, id set to -1).
    // When dedup is set, an identical earlier nogood is reused instead.
    std::optional<Conflict> add_nogood(std::vector<Literal> lits, int head_pos,
                                       int* id_out = nullptr, bool dedup = false);

    // Unit propagation to fixpoint.
    std::optional<Conflict> propagate();

    // Decision on an unassigned atom; opens a new level.
    void decide(Literal l, ReasonKind kind);

    // Truncates the trail to `level`. Nogoods that had fired at add time are
    // re-examined afterwards; a violation among them is returned.
    std::optional<Conflict> backjump(int level, const std::function<void(AtomId)>& unassign_hook);

    // First-UIP conflict analysis with a documented chronological fallback.
    // Returns false when the conflict proves unsatisfiability.
    // After a successful call the trail is at the asserting level and the
    // learned nogood's propagation has been applied (or a new conflict is
    // reported through `next_conflict`).
    bool analyze_and_backjump(const Conflict& c, const std::function<void(AtomId)>& unassign_hook,
                              std::optional<Conflict>& next_conflict);

    // Chronological step without a violated nogood: learns the negation of
    // the current branch prefix and flips the last branch literal. Used for
    // closure failures (must-be-true atoms that never became true).
    bool force_chronological(const std::function<void(AtomId)>& unassign_hook,
                             std::optional<Conflict>& next_conflict);

    // Branch entries: decisions and forced firings, one per level.
    struct Branch {
        Literal literal;
        int level;
        ReasonKind kind;
    };
    const std::vector<Branch>& branches() const { return branches_; }

    long conflicts = 0;
    long learned_count = 0;

    // Debug helper: true when no nogood is violated and none is unit-unfired.
    bool at_fixpoint_clean(std::string* why = nullptr) const;

private:
    friend class EngineTestPeer;

    bool chronological(const std::function<void(AtomId)>& unassign_hook,
                       std::optional<Conflict>& next_conflict);

    bool literal_sat(const Literal& l) const {
        return l.pol == Polarity::T ? A_.is_must(l.atom) : A_.is_false(l.atom);
    }
    bool literal_strict_sat(const Literal& l) const {
        return l.pol == Polarity::T ? A_.is_true(l.atom) : A_.is_false(l.atom);
    }

    std::optional<Conflict> on_watch_event(int ng_id, Literal satisfied_lit);
    std::optional<Conflict> try_strict(int ng_id);
    std::optional<Conflict> fire_initial(int ng_id);
    void watch(int ng_id, int pos);
    void unwatch(int ng_id, int pos);
    std::vector<int>& watchers(const Literal& l) {
        return l.pol == Polarity::T ? watch_T_[l.atom] : watch_F_[l.atom];
    }

    void ensure_atom(AtomId a) {
        A_.ensure(a);
        if (static_cast<std::size_t>(a) >= watch_T_.size()) {
            watch_T_.resize(a + 1);
            watch_F_.resize(a + 1);
            strict_of_.resize(a + 1);
        }
    }

    AtomStore& store_;
    Assignment A_;
    std::vector<Nogood> nogoods_;
    std::vector<std::array<int, 2>> watchpos_;
    std::vector<std::vector<int>> watch_T_, watch_F_;
    std::vector<std::vector<int>> strict_of_; // atom -> head-bearing nogoods containing it
    std::vector<int> replay_; // nogoods fired at add-time with older supports
    std::vector<char> in_replay_;
    std::unordered_map<std::size_t, std::vector<int>> dedup_index_;
    std::vector<Branch> branches_;
    std::size_t trail_ptr_ = 0;
};

} // namespace heurasp::solve

#endif
