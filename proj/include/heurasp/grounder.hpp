#ifndef HEURASP_GROUNDER_HPP
#define HEURASP_GROUNDER_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "heurasp/nogood.hpp"
#include "heurasp/transform.hpp"

namespace heurasp::ground {

using solve::AtomId;
using solve::AtomStore;
using solve::Literal;

class GroundError : public std::runtime_error {
public:
    explicit GroundError(const std::string& what) : std::runtime_error(what) {}
};

// One ground rule instance with its solver-internal atoms.
struct GroundRuleRecord {
    int id = -1;
    int rule_index = -1; // index into the canonical program
    std::optional<AtomId> head;
    std::vector<AtomId> positive_body;
    std::vector<AtomId> negative_body;
    AtomId beta = -1;       // -1 for facts and constraints
    AtomId choice_on = -1;  // present iff negative body nonempty
    AtomId choice_off = -1;
    std::vector<int> nogood_ids;

    bool is_constraint_record() const { return !head.has_value(); }
    bool is_fact_record() const {
        return head.has_value() && positive_body.empty() && negative_body.empty();
    }
    bool is_choice_point() const { return choice_on != -1; }
};

// One ground heuristic directive instance with its six gate atoms.
struct HeuristicRecord {
    int id = -1;
    int directive_index = -1; // index into the canonical program
    AtomId head_atom = -1;
    bool head_sign_true = true; // false: head sign F
    AtomId heu_on_t = -1, heu_on_mt = -1, heu_on_f = -1;
    AtomId heu_off_t = -1, heu_off_mt = -1, heu_off_f = -1;
    // Ground condition atoms grouped by canonical sign set.
    std::vector<AtomId> pos_t, pos_mt, pos_f;
    std::vector<AtomId> neg_t, neg_mt, neg_f;
    std::int64_t weight = 0;
    std::int64_t level = 0;
    ast::Substitution substitution; // over the directive's variables
    std::vector<int> nogood_ids;
};

struct NogoodSpec {
    std::vector<Literal> literals;
    int head_pos = -1;
    int rule_record = -1; // owner bookkeeping
    int heu_record = -1;
};

struct GroundBatch {
    std::vector<int> new_rule_records;
    std::vector<int> new_heu_records;
    std::vector<NogoodSpec> nogoods;
    bool empty_constraint = false; // a ground constraint with empty body: program is unsatisfiable
};

// Nogood translation per ground rule instance: body atom, head support,
// per-literal body falsification, and choice gates when the negative body is
// nonempty. Facts yield a single head-style nogood, constraints a single
// headless one.
std::vector<NogoodSpec> rule_to_nogoods(const GroundRuleRecord& g);

// Gate nogoods for a ground heuristic directive: one per HeuOn group (empty
// groups yield a fact-style nogood so the gate defaults to true) and one per
// negative-condition atom.
std::vector<NogoodSpec> directive_to_nogoods(const HeuristicRecord& h);

// Lazy grounding engine. Working memory holds every ground atom that has been
// assigned M or T on the current run; a (rule, substitution) pair is
// instantiated at most once.
class Grounder {
public:
    Grounder(const transform::CanonicalProgram& program, AtomStore& store);

    // Instantiates every rule and directive whose binding-relevant positive
    // atoms are covered by working memory after adding `newly_true`.
    GroundBatch ground_step(const std::vector<AtomId>& newly_true);

    // Startup instantiation: facts plus all rules/directives with no binding
    // literals.
    GroundBatch ground_initial();

    const std::vector<GroundRuleRecord>& rule_records() const { return rule_records_; }
    const std::vector<HeuristicRecord>& heu_records() const { return heu_records_; }
    GroundRuleRecord& rule_record(int id) { return rule_records_[id]; }
    HeuristicRecord& heu_record(int id) { return heu_records_[id]; }

    // Records whose ground head equals the given atom.
    const std::vector<int>& deriving_records(AtomId head) const;

    const transform::CanonicalProgram& program() const { return program_; }

    long wm_size() const { return static_cast<long>(wm_.size()); }

private:
    struct RuleShape {
        std::vector<ast::Atom> binding;  // non-builtin positive literals
        std::vector<ast::Atom> builtins; // comparison literals
        std::vector<std::string> var_order;
    };
    struct DirectiveShape {
        std::vector<ast::Atom> binding; // cond+ atoms with sign T or MT
        std::vector<ast::Atom> builtins;
        std::vector<std::string> var_order;
    };

    void index_add(AtomId id);
    bool in_wm(AtomId id) const { return wm_.count(id) != 0; }

    void join(const std::vector<ast::Atom>& binding, const std::vector<ast::Atom>& builtins,
              std::vector<bool>& used, ast::Substitution& sigma,
              const std::function<void(const ast::Substitution&)>& emit);

    void instantiate_rule(int rule_index, const ast::Substitution& sigma, GroundBatch& out);
    void instantiate_directive(int dir_index, const ast::Substitution& sigma, GroundBatch& out);

    void match_rule_against(int rule_index, AtomId delta, GroundBatch& out);
    void match_directive_against(int dir_index, AtomId delta, GroundBatch& out);

    const transform::CanonicalProgram& program_;
    AtomStore& store_;
    std::vector<RuleShape> rule_shapes_;
    std::vector<DirectiveShape> dir_shapes_;
    std::set<AtomId> wm_;
    std::map<std::pair<std::string, std::size_t>, std::vector<AtomId>> pred_index_;
    std::vector<std::set<std::vector<ast::Term>>> rule_seen_;
    std::vector<std::set<std::vector<ast::Term>>> dir_seen_;
    std::vector<GroundRuleRecord> rule_records_;
    std::vector<HeuristicRecord> heu_records_;
    std::map<AtomId, std::vector<int>> head_index_;
    std::vector<int> empty_head_index_;
};

} // namespace heurasp::ground

#endif
