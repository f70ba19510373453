#ifndef HEURASP_ATOM_STORE_HPP
#define HEURASP_ATOM_STORE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heurasp/ast.hpp"

namespace heurasp::solve {

using AtomId = std::int32_t;

// Interns ground program atoms and allocates solver-internal atoms (rule
// bodies, choice gates, heuristic gates). Internal atoms never appear in
// answer sets.
class AtomStore {
public:
    enum class Kind : std::uint8_t {
        Program, Beta, ChoiceOn, ChoiceOff, HeuOnT, HeuOnMT, HeuOnF, HeuOffT, HeuOffMT, HeuOffF
    };

    AtomId intern(const ast::Atom& ground_atom) {
        auto it = index_.find(ground_atom);
        if (it != index_.end()) return it->second;
        AtomId id = static_cast<AtomId>(entries_.size());
        entries_.push_back(Entry{Kind::Program, -1, ground_atom});
        index_.emplace(ground_atom, id);
        return id;
    }

    std::optional<AtomId> find(const ast::Atom& ground_atom) const {
        auto it = index_.find(ground_atom);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    AtomId make_internal(Kind kind, int owner) {
        AtomId id = static_cast<AtomId>(entries_.size());
        entries_.push_back(Entry{kind, owner, {}});
        return id;
    }

    Kind kind(AtomId id) const { return entries_[id].kind; }
    int owner(AtomId id) const { return entries_[id].owner; }
    bool is_internal(AtomId id) const { return entries_[id].kind != Kind::Program; }
    const ast::Atom& program_atom(AtomId id) const { return entries_[id].atom; }

    std::string name(AtomId id) const {
        const Entry& e = entries_[id];
        switch (e.kind) {
        case Kind::Program: return ast::to_string(e.atom);
        case Kind::Beta: return "_beta(" + std::to_string(e.owner) + ")";
        case Kind::ChoiceOn: return "_choice_on(" + std::to_string(e.owner) + ")";
        case Kind::ChoiceOff: return "_choice_off(" + std::to_string(e.owner) + ")";
        case Kind::HeuOnT: return "_heu_on_t(" + std::to_string(e.owner) + ")";
        case Kind::HeuOnMT: return "_heu_on_mt(" + std::to_string(e.owner) + ")";
        case Kind::HeuOnF: return "_heu_on_f(" + std::to_string(e.owner) + ")";
        case Kind::HeuOffT: return "_heu_off_t(" + std::to_string(e.owner) + ")";
        case Kind::HeuOffMT: return "_heu_off_mt(" + std::to_string(e.owner) + ")";
        case Kind::HeuOffF: return "_heu_off_f(" + std::to_string(e.owner) + ")";
        }
        return "?";
    }

    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        Kind kind;
        int owner;
        ast::Atom atom;
    };
    std::vector<Entry> entries_;
    std::map<ast::Atom, AtomId> index_;
};

} // namespace heurasp::solve

#endif
