#ifndef HEURASP_TRANSFORM_HPP
#define HEURASP_TRANSFORM_HPP

#include <functional>
#include <string>
#include <vector>

#include "heurasp/parser.hpp"

namespace heurasp::transform {

struct SafetyViolation {
    int element_line = 0;
    std::string element; // printed rule or directive
    std::vector<std::string> unsafe_vars;
};

class TransformError : public std::runtime_error {
public:
    explicit TransformError(const std::string& what) : std::runtime_error(what) {}
};

// Warning sink for dropped directives and similar diagnostics.
using WarnFn = std::function<void(const std::string&)>;

// Replaces every choice rule { h } :- B (and { h : cond } :- B) by the pair
//   h :- B, cond, not h__off.     h__off :- B, cond, not h.
// The fresh predicate h__off is reserved; collisions are rejected by the parser.
parser::SourceProgram rewrite_choice_rules(const parser::SourceProgram& p);

// Fixpoint of the sign-set rewriting cases; the result contains only sign
// sets {F}, {T} and {M,T}. Atoms are processed left to right, positive
// condition before negative, so output order is deterministic.
std::vector<ast::HeuristicDirective> transform_directive(const ast::HeuristicDirective& d);

// Adds the body of each deriving rule to every directive whose head unifies
// with the rule head (one directive copy per rule). Directives whose head
// unifies with no rule head are dropped with a warning. Facts do not count
// as deriving rules.
parser::SourceProgram enhance_directives(const parser::SourceProgram& p, const WarnFn& warn);

// Safety of a heuristic directive: every variable occurring in the directive
// must occur in a positive condition literal whose sign set is {T} or {M,T}.
// Returns the unsafe variables; empty means safe.
std::vector<std::string> check_safety(const ast::HeuristicDirective& d);

// Rule safety: every rule variable must be bindable from the positive body
// (non-builtin atoms bind directly; V = expr binds V once expr is bound).
std::vector<std::string> check_rule_safety(const ast::Rule& r);

struct CanonicalProgram {
    std::vector<ast::Rule> rules;                       // normal rules only
    std::vector<ast::HeuristicDirective> directives;    // canonical, safe, enhanced
};

// Full pre-solving pipeline: validates rule and directive safety, rewrites
// choice rules, canonicalizes sign sets and enhances directives. Throws
// TransformError on safety violations (naming each unsafe variable).
CanonicalProgram canonicalize(const parser::SourceProgram& p, const WarnFn& warn);

} // namespace heurasp::transform

#endif
