#ifndef HEURASP_SOLVER_HPP
#define HEURASP_SOLVER_HPP

#include <chrono>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>

#include "heurasp/heuristics.hpp"

namespace heurasp::solve {

struct SolveConfig {
    long max_answer_sets = 1; // 0 = all
    bool heuristics_enabled = true;
    std::optional<unsigned> seed; // shuffles the fallback order
    std::ostream* trace = nullptr;
    std::optional<double> time_limit_s;
    bool paranoid = false;       // full-scan invariant checks after every fixpoint
    bool check_theorem = false;  // reference-vs-solving applicability audit
};

struct SolveStats {
    long guesses = 0;
    long heuristic_decisions = 0;
    long fallback_decisions = 0;
    long forced_firings = 0;
    long conflicts = 0;
    long ground_rules = 0;
    long ground_directives = 0;
    long theorem_checks = 0;
    long theorem_mismatches = 0;
};

enum class Status { SAT, UNSAT, INTERRUPTED };

struct SolveResult {
    Status status = Status::UNSAT;
    std::vector<std::set<ast::Atom>> answer_sets;
    SolveStats stats;
    std::string theorem_mismatch_example;
};

class FatalSolverError : public std::runtime_error {
public:
    explicit FatalSolverError(const std::string& what) : std::runtime_error(what) {}
};

// CDNL search with lazy grounding over computation sequences. One instance
// per thread; instances share nothing.
class Solver {
public:
    Solver(const transform::CanonicalProgram& program, SolveConfig cfg,
           std::vector<ast::HeuristicDirective> original_directives = {});

    // Enumerates answer sets until the configured limit. The callback, when
    // given, sees each answer set as it is found; returning false stops the
    // enumeration early.
    SolveResult run(const std::function<bool(const std::set<ast::Atom>&)>& on_answer = {});

    const AtomStore& store() const { return store_; }
    const ground::Grounder& grounder() const { return grounder_; }
    const Engine& engine() const { return engine_; }

private:
    bool propagate_and_ground(); // false on UNSAT
    bool handle_conflict(Conflict c);
    void refresh_from_trail();
    void update_choosable(int rule_record);
    void ingest(ground::GroundBatch&& batch);
    std::optional<Literal> forced_choice();
    std::optional<Literal> heuristic_choice();
    std::optional<Literal> fallback_choice();
    bool closure_and_extract(); // false when a conflict was synthesized
    std::set<ast::Atom> extract_answer_set() const;
    void theorem_audit();
    void trace_entry(const TrailEntry& e);

    transform::CanonicalProgram program_;
    std::vector<ast::HeuristicDirective> original_directives_;
    SolveConfig cfg_;
    AtomStore store_;
    Engine engine_;
    ground::Grounder grounder_;
    heur::DirectiveHeap heap_;
    std::set<int> choosable_; // applicable choice points with unassigned body atom
    std::vector<std::uint32_t> fallback_rank_;
    std::mt19937 rng_;
    SolveResult result_;
    std::size_t refreshed_ptr_ = 0;
    std::size_t fed_ptr_ = 0;
    bool program_unsat_ = false;
    std::optional<Conflict> pending_conflict_;
    std::chrono::steady_clock::time_point deadline_;
    bool has_deadline_ = false;

    struct TheoremGroup {
        int origin;
        ast::HeuristicDirective ground_directive;
        std::vector<int> record_ids;
    };
    std::map<std::pair<int, std::string>, TheoremGroup> theorem_groups_;
};

} // namespace heurasp::solve

#endif
