#ifndef HEURASP_HEURISTICS_HPP
#define HEURASP_HEURISTICS_HPP

#include <set>
#include <vector>

#include "heurasp/grounder.hpp"
#include "heurasp/propagation.hpp"

namespace heurasp::heur {

using ground::Grounder;
using ground::GroundRuleRecord;
using ground::HeuristicRecord;
using solve::Assignment;
using solve::AtomId;
using solve::Literal;
using solve::Truth;

class MultipleRuleError : public std::runtime_error {
public:
    MultipleRuleError(const std::string& what) : std::runtime_error(what) {}
};

// Enabled by all HeuOn gates, not disabled by any HeuOff gate.
bool is_solving_satisfied(const HeuristicRecord& h, const Assignment& A);

// Solving-satisfied and the head atom is unassigned or must-be-true.
bool is_solving_applicable(const HeuristicRecord& h, const Assignment& A);

// Rule applicability: positive body all true, negative body free of
// must-be-true. Checked through the choice gates.
bool rule_applicable(const GroundRuleRecord& r, const Assignment& A);

// Direct evaluation of the declarative semantics on a ground directive; used
// by the test suites as the reference side of the solving equivalence.
bool reference_satisfied(const ast::HeuristicDirective& d, const Assignment& A,
                         const solve::AtomStore& store);
bool reference_applicability(const ast::HeuristicDirective& d, const Assignment& A,
                             const solve::AtomStore& store,
                             const std::vector<GroundRuleRecord>& rules);

// Max-priority structure over solving-applicable heuristic records, keyed by
// (level, weight) with lowest record id breaking ties.
class DirectiveHeap {
public:
    explicit DirectiveHeap(const Grounder& grounder, const Assignment& A)
        : grounder_(grounder), A_(A) {}

    // Registers a new record and caches its applicability.
    void add_record(int heu_id);

    // Re-evaluates records affected by a change of the given atom (gate atoms
    // via their owner, program atoms via the head reverse index).
    void on_atom_changed(AtomId a, const solve::AtomStore& store);

    // Highest-priority applicable record id, or -1.
    int select_directive() const;

    // Identifies the unique applicable rule deriving the selected record's
    // head. T-signed heads yield a decision on the rule body atom; F-signed
    // heads yield a decision making the head atom false. More than one
    // applicable deriving rule is a fatal error. Returns Skip when the record
    // cannot fire right now (no applicable rule, body atom already assigned,
    // or F-head already must-be-true).
    struct Fired {
        enum class Kind { Literal, Skip, Fatal } kind;
        Literal literal{solve::Polarity::T, -1};
        std::vector<int> rule_ids; // offending rules for Fatal
    };
    Fired choose_literal(int heu_id) const;

    bool member(int heu_id) const { return in_heap_.size() > static_cast<std::size_t>(heu_id) && in_heap_[heu_id]; }
    std::size_t size() const { return heap_.size(); }

    struct Key {
        std::int64_t level;
        std::int64_t weight;
        int id;
        bool operator<(const Key& o) const {
            if (level != o.level) return level > o.level;   // higher level first
            if (weight != o.weight) return weight > o.weight; // then higher weight
            return id < o.id;                                 // then lowest id
        }
    };

    // Applicable records in priority order.
    const std::set<Key>& entries() const { return heap_; }

    // Debug: recompute everything and compare with the incremental state.
    bool consistent() const;

private:
    void refresh(int heu_id);

    const Grounder& grounder_;
    const Assignment& A_;
    std::set<Key> heap_;
    std::vector<char> in_heap_;
    std::map<AtomId, std::vector<int>> head_watch_; // head atom -> heu record ids
};

} // namespace heurasp::heur

#endif
