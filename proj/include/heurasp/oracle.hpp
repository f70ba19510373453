#ifndef HEURASP_ORACLE_HPP
#define HEURASP_ORACLE_HPP

#include <set>
#include <vector>

#include "heurasp/transform.hpp"

namespace heurasp::oracle {

class OracleError : public std::runtime_error {
public:
    explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

struct GroundProgram {
    std::vector<ast::Rule> rules;          // ground, builtin-free
    std::set<ast::Atom> facts;             // heads of body-free rules
    std::set<ast::Atom> derivable;         // every possibly-derivable head atom
    std::set<ast::Atom> base;              // all atoms occurring anywhere
};

struct OracleLimits {
    std::int64_t int_lo = -100;
    std::int64_t int_hi = 100;
    std::size_t enumerable_cap = 20; // non-fact derivable atoms
    std::size_t atom_cap = 100000;
    int function_depth_cap = 2;
};

// Full instantiation by bottom-up possibly-true iteration (negation ignored).
// Builtins are evaluated; failing instances are dropped. Heuristic directives
// are ignored entirely. Errors when a derived integer leaves [int_lo, int_hi],
// a function term exceeds the depth cap, or the atom cap is exceeded.
GroundProgram naive_ground(const transform::CanonicalProgram& p, const OracleLimits& limits = {});

// FLP reduct: rules whose every body literal is true w.r.t. I.
GroundProgram reduct(const GroundProgram& gp, const std::set<ast::Atom>& I);

// I models reduct(gp, I) and no proper subset of I does.
bool is_answer_set(const GroundProgram& gp, const std::set<ast::Atom>& I);

// All answer sets, by exhaustive candidate enumeration over the derivable
// non-fact atoms (facts are always in). Errors when the enumerable base
// exceeds the cap.
std::vector<std::set<ast::Atom>> enumerate_answer_sets(const GroundProgram& gp,
                                                       const OracleLimits& limits = {});

// Convenience: answer sets with the choice-rewrite complements (__off atoms)
// filtered out, as comparable sets.
std::set<std::set<ast::Atom>> answer_sets_filtered(const GroundProgram& gp,
                                                   const OracleLimits& limits = {});

} // namespace heurasp::oracle

#endif
